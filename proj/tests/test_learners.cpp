/*
 Copyright 2026 The cmdp-forge Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cmdp/environments.hpp"
#include "cmdp/lambda_schedule.hpp"
#include "cmdp/learners.hpp"
#include "cmdp/oracle.hpp"
#include "cmdp/rollout.hpp"
#include "cmdp/solver.hpp"
#include "cmdp/tables.hpp"

using namespace cmdp;

namespace {

const std::vector<ActionId> kTwo{0, 1};

/// Three-state deterministic chain: s0 --a0 (r 1)--> s1, s0 --a1 (r 0.5)--> s2, no costs.
Cmdp zero_cost_chain() {
    ChainSpec spec{{{1.0, {{1.0, {0.0}}}}, {0.5, {{1.0, {0.0}}}}}, {2.0}, 1, 1.0};
    return make_chain(spec);
}

LearnerConfig chain_config(double lambda) {
    LearnerConfig c;
    c.lambda0 = {lambda};
    c.lambda_floor = std::max(lambda, 1e-6);
    c.episodes = 2000;
    c.batch_size = 8;
    c.update_every = 1;
    c.target_period = 50;
    c.n_step = 1;
    c.lr_actor = 0.1;
    return c;
}

} // namespace

TEST_CASE("lambda schedule examples") {
    LambdaSchedule high(2.0, 0.1, 3, 2.0);
    high.observe(1.0);
    high.observe(2.0);  // reaching the budget blocks the decay
    CHECK(high.observe(0.0));
    CHECK(high.lambda() == 2.0);
    CHECK_FALSE(high.last_window_safe());

    LambdaSchedule low(2.0, 0.1, 2, 2.0);
    CHECK_FALSE(low.observe(1.0));
    CHECK(low.pending() == 1);
    CHECK(low.observe(1.5));
    CHECK(low.lambda() == 2.0 * 0.95);
    CHECK(low.pending() == 0);

    LambdaSchedule floor(0.1, 0.1, 1, 2.0);
    floor.observe(0.0);
    CHECK(floor.lambda() == 0.1);
    CHECK_THROWS_AS(LambdaSchedule(1.0, 0.1, 0, 2.0), Error);
}

TEST_CASE("lambda schedule never drops below the floor") {
    LambdaSchedule s(10.0, 1.0, 1, 2.0);
    double prev = s.lambda();
    for (int i = 0; i < 200; ++i) {
        s.observe(0.0);
        CHECK(s.lambda() >= 1.0);
        CHECK(s.lambda() <= prev);
        prev = s.lambda();
    }
    CHECK(0.95 * s.lambda() <= 1.0);
}

TEST_CASE("penalize_sample examples") {
    const SampleTransition safe{-1.0, 0.5, 0.5, 1.0, 0};
    CHECK(penalize_sample(safe, 2.0, PenaltyScheme::RiskNeutral, 1.0, 2.0) == -1.0);
    const SampleTransition crossing{-1.0, 1.0, 1.5, 2.5, 0};
    CHECK(penalize_sample(crossing, 2.0, PenaltyScheme::RiskNeutral, 1.0, 2.0) == -6.0);
    const SampleTransition after{-1.0, 1.5, 3.0, 4.5, 0};
    CHECK(penalize_sample(after, 2.0, PenaltyScheme::RiskNeutral, 1.0, 2.0) == -4.0);
    SampleTransition no_time = crossing;
    no_time.t.reset();
    CHECK(penalize_sample(no_time, 2.0, PenaltyScheme::RiskNeutral, 1.0, 2.0) == -6.0);
    CHECK_THROWS_AS((void)penalize_sample(no_time, 2.0, PenaltyScheme::RiskNeutral, 0.9, 2.0), Error);
    CHECK_THROWS_AS((void)penalize_sample(no_time, 2.0, PenaltyScheme::ValueAtRisk, 1.0, 2.0), Error);
}

TEST_CASE("terminal penalty and epsilon schedule") {
    CHECK(terminal_penalty_amount(PenaltyScheme::RiskNeutral, 2.0, 1.5, 1.0, 3, 10, 2.0) == 5.0);
    CHECK(terminal_penalty_amount(PenaltyScheme::RiskNeutral, 2.0, 0.5, 1.0, 3, 10, 2.0) == 0.0);
    // VaR: one unit for the final step and one for each skipped step
    CHECK(terminal_penalty_amount(PenaltyScheme::ValueAtRisk, 2.0, 3.0, 0.0, 7, 10, 2.0) == 2.0 * 4);
    CHECK(linear_epsilon(0, 100, 1.0, 0.1, 0.5) == 1.0);
    CHECK(linear_epsilon(25, 100, 1.0, 0.1, 0.5) == doctest::Approx(0.55));
    CHECK(linear_epsilon(80, 100, 1.0, 0.1, 0.5) == doctest::Approx(0.1));
}

TEST_CASE("constrained action selection examples") {
    const std::vector<double> pi{0.5, 0.5}, q1{1.0, 2.0}, q2{1.5, 1.8}, zero{0.0, 0.0};
    // vacuous constraint: soft-greedy choice
    CHECK(constrained_action_select(pi, q1, q2, zero, zero, kTwo, 0.0, 0.0, 2.0, 0.01) == 1);
    // qd predicts 3 for action 0 and 0.5 for action 1
    const std::vector<double> qa{3.0, 0.5}, qb{2.0, 0.25}, rev_q1{2.0, 1.0};
    CHECK(constrained_action_select(pi, rev_q1, rev_q1, qa, qb, kTwo, 1.0, 0.5, 2.0, 0.01) == 1);
    // both infeasible: smallest predicted overrun
    const std::vector<double> big{5.0, 4.0};
    CHECK(constrained_action_select(pi, rev_q1, rev_q1, big, big, kTwo, 0.0, 0.0, 2.0, 0.01) == 1);
    // entropy term prefers the less likely action on equal critics
    const std::vector<double> skew{0.9, 0.1}, flat{1.0, 1.0};
    CHECK(constrained_action_select(skew, flat, flat, zero, zero, kTwo, 0.0, 0.0, 2.0, 0.5) == 1);
}

TEST_CASE("feasible action set uses the larger cost critic") {
    const std::vector<double> pi{0.5, 0.5}, q{0.0, 0.0}, qd1{1.0, 0.5}, qd2{2.5, 0.5};
    CriticRows rows{pi, q, q, {qd1}, {qd2}};
    const std::vector<double> c{0.5}, d{0.0}, b{2.0};
    CHECK(feasible_actions(rows, kTwo, c, d, b) == std::vector<ActionId>{1});
}

TEST_CASE("ledger bins") {
    const LedgerBins bins({2.0}, 0.25);
    CHECK(bins.count() == 10);
    CHECK(bins.bin(0, 0.0) == 0);
    CHECK(bins.bin(0, 1.25) == 5);
    CHECK(bins.bin(0, 2.0) == 8);
    CHECK(bins.bin(0, 2.01) == 9);
    const LedgerBins two({2.0, 1.0}, 0.5);
    const std::vector<double> c{0.5, 1.5};
    CHECK(two.index(c) == 1 * 4 + 3);
}

TEST_CASE("Polyak target equals eager averaging") {
    QTable online(3, 2, 2);
    PolyakTarget lazy(online, 0.9);
    std::vector<double> eager = online.data();
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> s(0, 2), b(0, 1), a(0, 1);
    std::normal_distribution<double> n;
    for (int step = 0; step < 300; ++step) {
        const int si = s(rng), bi = b(rng), ai = a(rng);
        lazy.sync(online, si, bi, ai);
        online.at(si, bi, ai) += n(rng);
        lazy.tick();
        for (std::size_t i = 0; i < eager.size(); ++i) eager[i] = 0.9 * eager[i] + 0.1 * online.data()[i];
    }
    for (int si = 0; si < 3; ++si) {
        for (int bi = 0; bi < 2; ++bi) {
            for (int ai = 0; ai < 2; ++ai) {
                CHECK(lazy.value(online, si, bi, ai) == doctest::Approx(eager[online.flat(si, bi, ai)]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("replay buffer keeps the newest items") {
    ReplayBuffer<int> rb(3);
    for (int i = 0; i < 5; ++i) rb.push(i);
    CHECK(rb.size() == 3);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i) CHECK(rb.sample(rng) >= 2);
}

TEST_CASE("checkpoint text round trip") {
    const CmdpEnvironment env(two_action_chain());
    const TrainResult r = safe_actor_critic(env, chain_config(1.0), 3);
    std::stringstream ss;
    write_checkpoint(ss, r.checkpoint);
    const std::string first = ss.str();
    const Checkpoint back = read_checkpoint(ss);
    std::stringstream again;
    write_checkpoint(again, back);
    CHECK(again.str() == first);
    CHECK(back.table("logits").data() == r.checkpoint.table("logits").data());
    std::stringstream bad("cmdp-forge-checkpoint 9\n");
    CHECK_THROWS_AS((void)read_checkpoint(bad), Error);
}

TEST_CASE("learners are deterministic for a fixed seed") {
    const GridWorldEnvironment env(desk_grid());
    LearnerConfig c;
    c.episodes = 50;
    c.lambda0 = {5.0};
    for (int learner = 0; learner < 2; ++learner) {
        const auto run = [&](std::uint64_t seed) {
            return learner == 0 ? safe_q_learning(env, c, seed) : safe_actor_critic(env, c, seed);
        };
        const TrainResult a = run(7), b = run(7), other = run(8);
        REQUIRE(a.log.size() == 50);
        bool same = true, differs = false;
        for (std::size_t i = 0; i < a.log.size(); ++i) {
            same = same && a.log[i].ret == b.log[i].ret && a.log[i].final_cost == b.log[i].final_cost;
            differs = differs || a.log[i].ret != other.log[i].ret;
        }
        CHECK(same);
        CHECK(differs);
    }
}

TEST_CASE("safe Q-learning greedy action matches the exact solver") {
    const Cmdp m = two_action_chain();
    const CmdpEnvironment env(m);
    for (double lambda : {0.0, 0.5, 5.0}) {
        const ValueTable v = backward_induction(build_extended(m, lambda, PenaltyScheme::RiskNeutral));
        const TrainResult r = safe_q_learning(env, chain_config(lambda), 1);
        const CheckpointPolicy pol(r.checkpoint);
        const std::vector<double> ledger{0.0};
        CHECK_MESSAGE(pol.action_probability(0, ledger, v.greedy[0][0]) == 1.0, lambda);
    }
}

TEST_CASE("actor-critic on a zero-cost chain approaches the DP value") {
    const Cmdp m = zero_cost_chain();
    const CmdpEnvironment env(m);
    const TrainResult r = safe_actor_critic(env, chain_config(0.0), 2);
    const CheckpointPolicy pol(r.checkpoint);
    const RolloutStats st = rollout(env, checkpoint_action_fn(pol), 2000, 5);
    CHECK(st.ret.mean >= 0.95 * unconstrained_value(m));
    double tail = 0.0;
    for (std::size_t i = r.log.size() - 200; i < r.log.size(); ++i) tail += r.log[i].ret;
    CHECK(tail / 200.0 >= 0.95 * unconstrained_value(m));
}

TEST_CASE("rollouts agree with the oracle") {
    const Cmdp m = lottery_chain();
    const CmdpEnvironment env(m);
    const ExtendedMdp e = build_extended(m, 0.0, PenaltyScheme::RiskNeutral);
    const TabularPolicy greedy = backward_induction(e).policy(m);
    const OracleStats exact = oracle_stats(m, greedy, {{0.0}, {PenaltyScheme::RiskNeutral}});
    const RolloutStats mc = rollout(env, tabular_action_fn(greedy), 100000, 17);
    CHECK(std::abs(mc.cost[0].mean - exact.expected_cost[0]) <= 3.0 * mc.cost[0].se);
    CHECK(std::abs(mc.ret.mean - exact.expected_return) <= 3.0 * mc.ret.se + 1e-12);

    // always-risky policy on the two-action chain violates on every episode
    const CmdpEnvironment chain(two_action_chain());
    const ActionFn risky = [](StateId s, int, std::span<const double>, std::span<const double>,
                              std::span<const ActionId> avail, std::mt19937_64&) { return s == 0 ? 1 : avail[0]; };
    const RolloutStats r = rollout(chain, risky, 1000, 1);
    CHECK(r.violation[0].mean == 1.0);
    CHECK(r.excess[0].mean == 1.0);

    const CmdpEnvironment free_env(zero_cost_chain());
    const ActionFn first = [](StateId, int, std::span<const double>, std::span<const double>,
                              std::span<const ActionId> avail, std::mt19937_64&) { return avail[0]; };
    CHECK(rollout(free_env, first, 500, 2).violation[0].mean == 0.0);
}

TEST_CASE("learner config validation") {
    LearnerConfig c;
    CHECK(c.validate(1).empty());
    c.lambda0 = {1.0, 2.0};
    CHECK_FALSE(c.validate(1).empty());
    c = LearnerConfig{};
    c.rho = 1.5;
    CHECK_FALSE(c.validate(1).empty());
}
