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

#include <chrono>
#include <cmath>
#include <random>

#include "cmdp/lambda_schedule.hpp"
#include "cmdp/learners.hpp"
#include "cmdp/numeric.hpp"

namespace cmdp {

std::vector<std::string> LearnerConfig::validate(int num_constraints) const {
    std::vector<std::string> out;
    const auto K = static_cast<std::size_t>(num_constraints);
    if (schemes.size() != K) out.push_back("need one scheme per constraint (" + std::to_string(K) + ")");
    if (lambda0.size() != K) out.push_back("need one lambda per constraint (" + std::to_string(K) + ")");
    for (double l : lambda0) {
        if (!(l >= 0.0) || !std::isfinite(l)) out.push_back("lambda must be finite and non-negative");
    }
    if (!(lambda_floor >= 0.0)) out.push_back("Lambda_floor must be non-negative");
    if (window < 1) out.push_back("M must be at least 1");
    if (!(decay > 0.0 && decay <= 1.0)) out.push_back("decay must lie in (0, 1]");
    if (episodes < 1) out.push_back("episodes must be at least 1");
    if (!(quantum > 0.0)) out.push_back("quantum must be positive");
    if (!(lr > 0.0 && lr <= 1.0)) out.push_back("lr must lie in (0, 1]");
    if (!(eps_start >= 0.0 && eps_start <= 1.0 && eps_end >= 0.0 && eps_end <= 1.0)) out.push_back("epsilon must lie in [0, 1]");
    if (!(eps_fraction >= 0.0 && eps_fraction <= 1.0)) out.push_back("eps_fraction must lie in [0, 1]");
    if (replay_capacity < 1) out.push_back("N must be at least 1");
    if (target_period < 1) out.push_back("C must be at least 1");
    if (batch_size < 1) out.push_back("batch_size must be at least 1");
    if (update_every < 1) out.push_back("update_every must be at least 1");
    if (n_step < 1) out.push_back("n must be at least 1");
    if (!(rho >= 0.0 && rho < 1.0)) out.push_back("rho must lie in [0, 1)");
    if (!(alpha_ent > 0.0)) out.push_back("alpha_ent must be positive");
    if (!(lr_critic > 0.0 && lr_critic <= 1.0)) out.push_back("lr_critic must lie in (0, 1]");
    if (!(lr_actor > 0.0)) out.push_back("lr_actor must be positive");
    if (!(w > 0.0)) out.push_back("w must be positive");
    return out;
}

std::vector<double> softmax_row(std::span<const double> logits, std::span<const ActionId> available) {
    std::vector<double> p(logits.size(), 0.0);
    double top = -std::numeric_limits<double>::infinity();
    for (ActionId a : available) top = std::max(top, logits[static_cast<std::size_t>(a)]);
    double z = 0.0;
    for (ActionId a : available) {
        const double e = std::exp(logits[static_cast<std::size_t>(a)] - top);
        p[static_cast<std::size_t>(a)] = e;
        z += e;
    }
    for (ActionId a : available) p[static_cast<std::size_t>(a)] /= z;
    return p;
}

namespace {

struct QSample {
    int s;
    int bin;
    ActionId a;
    double reward;
    int s2;
    int bin2;
    bool done;
};

ActionId greedy(std::span<const double> row, const std::vector<ActionId>& available) {
    ActionId best = available.front();
    for (ActionId a : available) {
        if (row[static_cast<std::size_t>(a)] > row[static_cast<std::size_t>(best)]) best = a;
    }
    return best;
}

double best_value(std::span<const double> row, const std::vector<ActionId>& available) {
    return row[static_cast<std::size_t>(greedy(row, available))];
}

} // namespace

TrainResult safe_q_learning(const Environment& env, const LearnerConfig& cfg, std::uint64_t seed) {
    const int K = env.num_constraints();
    if (auto problems = cfg.validate(K); !problems.empty()) throw Error("safe_q config: " + problems.front());
    const int S = env.num_states();
    const int A = env.num_actions();
    const int T = env.horizon();
    const double gamma = env.discount();
    const auto& budgets = env.budgets();
    const LedgerBins bins(budgets, cfg.quantum);

    std::vector<std::vector<ActionId>> avail(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s) avail[static_cast<std::size_t>(s)] = env.available_actions(s);

    QTable q(S, bins.count(), A);
    QTable target = q;
    std::vector<LambdaSchedule> sched;
    for (int k = 0; k < K; ++k) {
        sched.emplace_back(cfg.lambda0[static_cast<std::size_t>(k)], cfg.lambda_floor, static_cast<std::size_t>(cfg.window),
                           budgets[static_cast<std::size_t>(k)], cfg.decay);
    }
    ReplayBuffer<QSample> replay(cfg.replay_capacity);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    long long steps = 0;

    TrainResult result;
    result.log.reserve(static_cast<std::size_t>(cfg.episodes));
    std::vector<double> c(static_cast<std::size_t>(K)), c_next(static_cast<std::size_t>(K));
    for (int ep = 0; ep < cfg.episodes; ++ep) {
        const auto t0 = std::chrono::steady_clock::now();
        const double eps = linear_epsilon(ep, cfg.episodes, cfg.eps_start, cfg.eps_end, cfg.eps_fraction);
        std::vector<double> lambdas;
        for (const auto& sc : sched) lambdas.push_back(sc.lambda());

        Observation obs = env.reset(rng);
        std::fill(c.begin(), c.end(), 0.0);
        double ret = 0.0;
        double discount = 1.0;
        double scale = 1.0;  // gamma^t
        for (int t = 0; t < T; ++t) {
            const int s = obs.state;
            const int x = bins.index(c);
            const auto& av = avail[static_cast<std::size_t>(s)];
            ActionId a;
            if (unit(rng) < eps) {
                a = av[std::uniform_int_distribution<std::size_t>(0, av.size() - 1)(rng)];
            } else {
                a = greedy(q.row(s, x), av);
            }
            StepResult st = env.step(s, a, rng);
            ret += discount * st.reward;
            discount *= gamma;

            double amount = 0.0;
            for (int k = 0; k < K; ++k) {
                const auto ku = static_cast<std::size_t>(k);
                c_next[ku] = c[ku] + obs.costs[ku];
                amount += sample_penalty_amount({st.reward, obs.costs[ku], c[ku], c_next[ku], t}, lambdas[ku],
                                                cfg.schemes[ku], budgets[ku]);
            }
            const bool done = t + 1 == T || st.next.absorbing;
            if (done) {
                for (int k = 0; k < K; ++k) {
                    const auto ku = static_cast<std::size_t>(k);
                    amount += terminal_penalty_amount(cfg.schemes[ku], lambdas[ku], c_next[ku], st.next.costs[ku],
                                                      t + 1, T, budgets[ku]);
                }
            }
            const double r_tilde = amount == 0.0 ? st.reward : st.reward - amount / scale;
            scale *= gamma;
            replay.push({s, x, a, r_tilde, st.next.state, bins.index(c_next), done});

            ++steps;
            if (steps % cfg.update_every == 0 && replay.size() >= static_cast<std::size_t>(cfg.batch_size)) {
                for (int b = 0; b < cfg.batch_size; ++b) {
                    const QSample& j = replay.sample(rng);
                    const double y =
                        j.reward + (j.done ? 0.0 : gamma * best_value(target.row(j.s2, j.bin2), avail[static_cast<std::size_t>(j.s2)]));
                    double& qa = q.at(j.s, j.bin, j.a);
                    qa += cfg.lr * (y - qa);
                }
            }
            if (steps % cfg.target_period == 0) target = q;

            c.swap(c_next);
            obs = std::move(st.next);
            if (done) break;
        }

        EpisodeLog log;
        log.episode = ep;
        log.ret = ret;
        for (int k = 0; k < K; ++k) log.final_cost.push_back(c[static_cast<std::size_t>(k)] + obs.costs[static_cast<std::size_t>(k)]);
        log.lambda = lambdas;
        log.explore = eps;
        if (cfg.log_wall_ms) {
            log.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        }
        for (int k = 0; k < K; ++k) sched[static_cast<std::size_t>(k)].observe(log.final_cost[static_cast<std::size_t>(k)]);
        result.log.push_back(std::move(log));
    }

    Checkpoint& cp = result.checkpoint;
    cp.learner = "safe_q";
    cp.num_states = S;
    cp.num_actions = A;
    cp.quantum = cfg.quantum;
    cp.budgets = budgets;
    for (const auto& sc : sched) cp.lambdas.push_back(sc.lambda());
    cp.tables.push_back({"q", std::move(q)});
    return result;
}

} // namespace cmdp
