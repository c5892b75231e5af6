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

#include "cmdp/environments.hpp"
#include "cmdp/oracle.hpp"
#include "cmdp/solver.hpp"
#include "cmdp/verify.hpp"
#include "support.hpp"

using namespace cmdp;

namespace {

struct ChainPolicies {
    ExtendedMdp e;
    TabularPolicy safe, risky, uniform;
};

ChainPolicies chain_policies() {
    const Cmdp m = two_action_chain();
    ExtendedMdp e = build_extended(m, 0.5, PenaltyScheme::RiskNeutral);
    TabularPolicy safe(e.space_ptr(), 2, 1, TabularPolicy::Kind::Deterministic);
    TabularPolicy risky(e.space_ptr(), 2, 1, TabularPolicy::Kind::Deterministic);
    for (std::size_t x = 0; x < e.size(); ++x) {
        safe.set_action(0, static_cast<int>(x), 0);
        risky.set_action(0, static_cast<int>(x), e.space().at(static_cast<int>(x)).state == 0 ? 1 : 0);
    }
    TabularPolicy uniform = TabularPolicy::uniform(e.space_ptr(), m, 1);
    return {e, safe, risky, uniform};
}

const OraclePenalties kRnHalf{{0.5}, {PenaltyScheme::RiskNeutral}};

} // namespace

TEST_CASE("enumeration: deterministic model and policy give one trajectory") {
    const auto p = chain_policies();
    const TrajectorySet set = enumerate(two_action_chain(), p.safe);
    REQUIRE(set.items.size() == 1);
    CHECK(set.items[0].probability == 1.0);
    CHECK(set.items[0].trajectory.states == std::vector<StateId>{0, 1});
}

TEST_CASE("enumeration: uniform policy on the chain gives two halves") {
    const auto p = chain_policies();
    const TrajectorySet set = enumerate(two_action_chain(), p.uniform);
    REQUIRE(set.items.size() == 2);
    CHECK(set.items[0].probability == 0.5);
    CHECK(set.items[1].probability == 0.5);
    CHECK(set.mass == 1.0);
}

TEST_CASE("enumeration: noisy 3x3 grid under the greedy policy") {
    const Cmdp m = fixture_by_name("grid3x3_noisy").model;
    const ExtendedMdp e = build_extended(m, 1.0, PenaltyScheme::RiskNeutral);
    const TrajectorySet set = enumerate(m, backward_induction(e).policy(m));
    CHECK(set.items.size() == 15567);
    CHECK(std::abs(set.mass - 1.0) <= 1e-9);
}

TEST_CASE("enumeration: cap violation names the cap") {
    const Cmdp m = fixture_by_name("grid3x3_noisy").model;
    const ExtendedMdp e = build_extended(m, 1.0, PenaltyScheme::RiskNeutral);
    OracleOptions o;
    o.cap = 100;
    try {
        (void)enumerate(m, backward_induction(e).policy(m), o);
        FAIL("expected the cap to trip");
    } catch (const Error& err) {
        CHECK(std::string(err.what()).find("100") != std::string::npos);
    }
}

TEST_CASE("trajectory probabilities sum to one for random policies") {
    std::mt19937_64 rng(5);
    for (const auto& f : fixture_pack()) {
        if (f.name == "grid3x3_noisy") continue;
        const auto l = std::vector<double>(static_cast<std::size_t>(f.model.num_constraints()), 1.0);
        const ExtendedMdp e = build_extended(f.model, l, std::vector(l.size(), PenaltyScheme::RiskNeutral));
        for (int i = 0; i < 5; ++i) {
            const auto pol = TabularPolicy::random(e.space_ptr(), f.model, std::max(f.model.horizon, 1), rng);
            CHECK_MESSAGE(std::abs(enumerate(f.model, pol).mass - 1.0) <= 1e-9, f.name);
        }
    }
}

TEST_CASE("oracle statistics on the two-action chain") {
    const auto p = chain_policies();
    const Cmdp m = two_action_chain();
    const OracleStats safe = oracle_stats(m, p.safe, kRnHalf);
    CHECK(safe.expected_cost[0] == 0.0);
    CHECK(safe.violation_prob[0] == 0.0);
    CHECK(safe.cvar_excess[0] == 0.0);

    const OracleStats risky = oracle_stats(m, p.risky, kRnHalf);
    CHECK(risky.expected_return == 2.0);
    CHECK(risky.trunc_above[0] == 3.0);
    CHECK(risky.penalized_objective == 0.5);
    CHECK(risky.stepwise_objective == 0.5);

    const OracleStats uni = oracle_stats(m, p.uniform, kRnHalf);
    CHECK(uni.expected_cost[0] == 1.5);
    CHECK(uni.violation_prob[0] == 0.5);
    CHECK(uni.cvar_excess[0] == 0.5);
}

TEST_CASE("oracle step penalty: independent case arithmetic") {
    // crossing c=1.5, d=1, c_max 2 under RN is charged the full c + d
    CHECK(oracle_step_penalty(PenaltyScheme::RiskNeutral, 2.0, 1.5, 1.0, 0, 2.0, 1e-9) == 5.0);
    CHECK(oracle_step_penalty(PenaltyScheme::RiskNeutral, 2.0, 3.0, 1.5, 0, 2.0, 1e-9) == 3.0);
    CHECK(oracle_step_penalty(PenaltyScheme::ConditionalValueAtRisk, 2.0, 1.5, 1.0, 0, 2.0, 1e-9) == 1.0);
    CHECK(oracle_step_penalty(PenaltyScheme::ValueAtRisk, 2.0, 3.0, 0.0, 4, 2.0, 1e-9) == 2.0);
    CHECK(oracle_step_penalty(PenaltyScheme::RiskNeutral, 2.0, 1.0, 1.0, 0, 2.0, 1e-9) == 0.0);
}

TEST_CASE("reward decomposition holds for every random policy") {
    std::mt19937_64 rng(20260101);
    for (const auto& f : fixture_pack()) {
        const Cmdp& m = f.model;
        const std::size_t K = static_cast<std::size_t>(m.num_constraints());
        const std::vector<double> l(K, 0.75);
        const std::vector<PenaltyScheme> rn(K, PenaltyScheme::RiskNeutral);
        const ExtendedMdp e = build_extended(m, l, rn);
        const bool big = f.name.rfind("grid", 0) == 0;
        for (int i = 0; i < 20; ++i) {
            const TabularPolicy pol = big ? testing_support::random_deterministic(e, rng)
                                          : TabularPolicy::random(e.space_ptr(), m, std::max(m.horizon, 1), rng);
            const OracleStats s = oracle_stats(m, pol, {l, rn});
            double closed = s.expected_return;
            for (std::size_t k = 0; k < K; ++k) closed -= l[k] * s.trunc_above[k];
            CHECK_MESSAGE(std::abs(evaluate_policy(e, pol) - closed) <= 1e-9, f.name);
            CHECK(std::abs(s.stepwise_objective - closed) <= 1e-9);
        }
    }
}

TEST_CASE("deterministic policy count on the chain") {
    const ExtendedMdp e = build_extended(two_action_chain(), 1.0, PenaltyScheme::RiskNeutral);
    const auto n = deterministic_policy_count(e, 10000);
    REQUIRE(n.has_value());
    CHECK(*n == 2);
    std::size_t visited = 0;
    for_each_deterministic_policy(e, [&](const TabularPolicy&) { ++visited; });
    CHECK(visited == 2);
    CHECK_FALSE(deterministic_policy_count(build_extended(make_gridworld(desk_grid()), 1.0, PenaltyScheme::RiskNeutral), 10000)
                    .has_value());
}

TEST_CASE("verify: every suite passes on the fixture pack") {
    const auto rows = verify_all(fixture_pack());
    for (const auto& r : rows) {
        if (r.status == RowStatus::Fail) FAIL_CHECK(verify_csv_row(r));
    }
    CHECK_FALSE(any_failed(rows));
}

TEST_CASE("verify: lambda 0 is n/a for the RN bound") {
    VerifyOptions o;
    o.rn_extra = {0.0};
    const auto rows = verify(VerifyKind::RiskNeutral, fixture_by_name("two_action_chain"), o);
    bool zero_na = false;
    for (const auto& r : rows) {
        if (r.lambda == 0.0 && r.status == RowStatus::NotApplicable) zero_na = true;
        if (r.status == RowStatus::Pass) CHECK(r.measured == 0.0);
    }
    CHECK(zero_na);
    const auto prop = verify(VerifyKind::Unconstrained, fixture_by_name("two_action_chain"));
    CHECK_FALSE(any_failed(prop));
}

TEST_CASE("verify: asserting the RN bound far below the threshold fails") {
    VerifyOptions o;
    o.rn_extra = {0.05};  // lambda_rn / 10
    o.assert_below_bound = true;
    const auto rows = verify(VerifyKind::RiskNeutral, fixture_by_name("two_action_chain"), o);
    bool failed_low = false;
    for (const auto& r : rows) {
        if (r.lambda == 0.05) {
            CHECK(r.status == RowStatus::Fail);
            CHECK(r.measured == 3.0);
            failed_low = true;
        }
    }
    CHECK(failed_low);
}

TEST_CASE("verify: CVaR excess on the chain is monotone and below 1/lambda") {
    VerifyOptions o;
    o.equivalence_grid = {0.1, 0.5, 1.0};
    const auto rows = verify(VerifyKind::Cvar, fixture_by_name("two_action_chain"), o);
    CHECK_FALSE(any_failed(rows));
    for (const auto& r : rows) {
        if (r.quantity.rfind("E[(D-c)+]", 0) == 0 && r.status == RowStatus::Pass && r.lambda > 0.0) {
            CHECK(r.measured <= 1.0 / r.lambda + 1e-9);
        }
    }
}

TEST_CASE("verify CSV has the documented columns") {
    CHECK(verify_csv_header() == "kind,fixture,quantity,lambda,bound,measured,status,note\n");
    for (VerifyKind k : kAllVerifyKinds) CHECK(parse_kind(kind_name(k)) == k);
}
