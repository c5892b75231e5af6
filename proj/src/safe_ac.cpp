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
#include <deque>
#include <limits>
#include <random>

#include "cmdp/lambda_schedule.hpp"
#include "cmdp/learners.hpp"

namespace cmdp {

namespace {

double safe_log(double p) { return std::log(std::max(p, 1e-300)); }

double max_cost(const CriticRows& rows, std::size_t k, ActionId a) {
    const auto i = static_cast<std::size_t>(a);
    return std::max(rows.qd1[k][i], rows.qd2[k][i]);
}

} // namespace

std::vector<ActionId> feasible_actions(const CriticRows& rows, std::span<const ActionId> available,
                                       std::span<const double> c, std::span<const double> d,
                                       std::span<const double> budgets) {
    std::vector<ActionId> out;
    for (ActionId a : available) {
        bool ok = true;
        for (std::size_t k = 0; k < budgets.size() && ok; ++k) ok = max_cost(rows, k, a) + c[k] - d[k] <= budgets[k];
        if (ok) out.push_back(a);
    }
    return out;
}

ActionId constrained_action_select(const CriticRows& rows, std::span<const ActionId> available,
                                   std::span<const double> c, std::span<const double> d,
                                   std::span<const double> budgets, double alpha_ent) {
    const auto feasible = feasible_actions(rows, available, c, d, budgets);
    if (!feasible.empty()) {
        ActionId best = feasible.front();
        double best_score = -std::numeric_limits<double>::infinity();
        for (ActionId a : feasible) {
            const auto i = static_cast<std::size_t>(a);
            const double score = std::min(rows.q1[i], rows.q2[i]) - alpha_ent * safe_log(rows.policy[i]);
            if (score > best_score) {
                best = a;
                best_score = score;
            }
        }
        return best;
    }
    ActionId best = available.front();
    double best_over = std::numeric_limits<double>::infinity();
    for (ActionId a : available) {
        double over = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < budgets.size(); ++k) over = std::max(over, max_cost(rows, k, a) + c[k] - d[k] - budgets[k]);
        if (over < best_over) {
            best = a;
            best_over = over;
        }
    }
    return best;
}

ActionId constrained_action_select(std::span<const double> policy, std::span<const double> q1,
                                   std::span<const double> q2, std::span<const double> qd1,
                                   std::span<const double> qd2, std::span<const ActionId> available, double c,
                                   double d, double budget, double alpha_ent) {
    const CriticRows rows{policy, q1, q2, {qd1}, {qd2}};
    return constrained_action_select(rows, available, std::span<const double>(&c, 1), std::span<const double>(&d, 1),
                                     std::span<const double>(&budget, 1), alpha_ent);
}

namespace {

struct AcStep {
    int s;
    int bin;
    ActionId a;
    double reward;               // penalized
    std::vector<double> cost;    // d(s_j)
};

class ActorCritic {
public:
    ActorCritic(const Environment& env, const LearnerConfig& cfg)
        : env_(env), cfg_(cfg), K_(env.num_constraints()), bins_(env.budgets(), cfg.quantum),
          q_{QTable(env.num_states(), bins_.count(), env.num_actions()), QTable(env.num_states(), bins_.count(), env.num_actions())},
          logits_(env.num_states(), bins_.count(), env.num_actions()) {
        for (int i = 0; i < 2; ++i) {
            qd_[i].assign(static_cast<std::size_t>(K_), QTable(env.num_states(), bins_.count(), env.num_actions()));
            qt_[i] = PolyakTarget(q_[i], cfg.rho);
            for (int k = 0; k < K_; ++k) qdt_[i].emplace_back(qd_[i][static_cast<std::size_t>(k)], cfg.rho);
        }
        for (int s = 0; s < env.num_states(); ++s) avail_.push_back(env.available_actions(s));
    }

    const std::vector<ActionId>& available(int s) const { return avail_[static_cast<std::size_t>(s)]; }
    std::vector<double> policy(int s, int bin) const { return softmax_row(logits_.row(s, bin), available(s)); }

    CriticRows rows(int s, int bin, const std::vector<double>& pi) const {
        CriticRows r{pi, q_[0].row(s, bin), q_[1].row(s, bin), {}, {}};
        for (int k = 0; k < K_; ++k) {
            r.qd1.push_back(qd_[0][static_cast<std::size_t>(k)].row(s, bin));
            r.qd2.push_back(qd_[1][static_cast<std::size_t>(k)].row(s, bin));
        }
        return r;
    }

    double soft_target_value(int s, int bin) {
        const auto pi = policy(s, bin);
        double v = 0.0;
        for (ActionId a : available(s)) {
            const double p = pi[static_cast<std::size_t>(a)];
            const double q = std::min(qt_[0].value(q_[0], s, bin, a), qt_[1].value(q_[1], s, bin, a));
            v += p * (q - cfg_.alpha_ent * safe_log(p));
        }
        return v;
    }

    double cost_target_value(int k, int s, int bin) {
        const auto pi = policy(s, bin);
        const auto ku = static_cast<std::size_t>(k);
        double v = 0.0;
        for (ActionId a : available(s)) {
            v += pi[static_cast<std::size_t>(a)] *
                 std::max(qdt_[0][ku].value(qd_[0][ku], s, bin, a), qdt_[1][ku].value(qd_[1][ku], s, bin, a));
        }
        return v;
    }

    // Backs up steps[first] over `count` steps, bootstrapping at (s_b, bin_b)
    // or, with s_b < 0, ending at a final state whose costs are `final_cost`.
    void backup(const std::deque<AcStep>& steps, std::size_t count, int s_b, int bin_b,
                const std::vector<double>& final_cost, bool policy_safe, std::mt19937_64& rng) {
        const double gamma = env_.discount();
        const AcStep& j = steps.front();
        double R = 0.0;
        double g = 1.0;
        std::vector<double> RD(static_cast<std::size_t>(K_), 0.0);
        for (std::size_t i = 0; i < count; ++i) {
            R += g * steps[i].reward;
            g *= gamma;
            for (int k = 0; k < K_; ++k) RD[static_cast<std::size_t>(k)] += steps[i].cost[static_cast<std::size_t>(k)];
        }
        if (s_b >= 0) {
            R += g * soft_target_value(s_b, bin_b);
            for (int k = 0; k < K_; ++k) RD[static_cast<std::size_t>(k)] += cost_target_value(k, s_b, bin_b);
        } else {
            for (int k = 0; k < K_; ++k) RD[static_cast<std::size_t>(k)] += final_cost[static_cast<std::size_t>(k)];
        }

        const int i = std::uniform_int_distribution<int>(0, 1)(rng);
        qt_[i].sync(q_[i], j.s, j.bin, j.a);
        double& qa = q_[i].at(j.s, j.bin, j.a);
        qa += cfg_.lr_critic * (R - qa);
        for (int k = 0; k < K_; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            qdt_[i][ku].sync(qd_[i][ku], j.s, j.bin, j.a);
            double& qd = qd_[i][ku].at(j.s, j.bin, j.a);
            qd += cfg_.lr_critic * (RD[ku] - qd);
        }

        update_actor(j.s, j.bin, policy_safe);

        qt_[0].tick();
        qt_[1].tick();
        for (int k = 0; k < K_; ++k) {
            qdt_[0][static_cast<std::size_t>(k)].tick();
            qdt_[1][static_cast<std::size_t>(k)].tick();
        }
    }

    void update_actor(int s, int bin, bool policy_safe) {
        const auto& av = available(s);
        const auto pi = policy(s, bin);
        std::vector<double> score(pi.size(), 0.0);
        double mean = 0.0;
        for (ActionId a : av) {
            const auto i = static_cast<std::size_t>(a);
            if (policy_safe) {
                score[i] = std::min(q_[0].at(s, bin, a), q_[1].at(s, bin, a)) - cfg_.alpha_ent * safe_log(pi[i]);
            } else {
                for (int k = 0; k < K_; ++k) {
                    const auto ku = static_cast<std::size_t>(k);
                    score[i] -= std::max(qd_[0][ku].at(s, bin, a), qd_[1][ku].at(s, bin, a));
                }
            }
            mean += pi[i] * score[i];
        }
        const double step = policy_safe ? cfg_.lr_actor * cfg_.w : cfg_.lr_actor;
        auto row = logits_.mutable_row(s, bin);
        for (ActionId a : av) {
            const auto i = static_cast<std::size_t>(a);
            row[i] += step * pi[i] * (score[i] - mean);
        }
    }

    ActionId training_action(int s, int bin, std::span<const double> c, std::span<const double> d,
                             std::mt19937_64& rng) const {
        const auto pi = policy(s, bin);
        const CriticRows r = rows(s, bin, pi);
        const auto feasible = feasible_actions(r, available(s), c, d, env_.budgets());
        if (feasible.empty()) return constrained_action_select(r, available(s), c, d, env_.budgets(), cfg_.alpha_ent);
        double z = 0.0;
        for (ActionId a : feasible) z += pi[static_cast<std::size_t>(a)];
        double u = std::uniform_real_distribution<double>(0.0, z)(rng);
        for (ActionId a : feasible) {
            u -= pi[static_cast<std::size_t>(a)];
            if (u < 0.0) return a;
        }
        return feasible.back();
    }

    double entropy(int s, int bin) const {
        const auto pi = policy(s, bin);
        double h = 0.0;
        for (ActionId a : available(s)) {
            const double p = pi[static_cast<std::size_t>(a)];
            if (p > 0.0) h -= p * std::log(p);
        }
        return h;
    }

    const LedgerBins& bins() const { return bins_; }

    Checkpoint checkpoint(const std::vector<double>& lambdas) const {
        Checkpoint cp;
        cp.learner = "safe_ac";
        cp.num_states = env_.num_states();
        cp.num_actions = env_.num_actions();
        cp.quantum = cfg_.quantum;
        cp.budgets = env_.budgets();
        cp.lambdas = lambdas;
        cp.alpha_ent = cfg_.alpha_ent;
        cp.tables.push_back({"q1", q_[0]});
        cp.tables.push_back({"q2", q_[1]});
        for (int k = 0; k < K_; ++k) {
            cp.tables.push_back({"qd1." + std::to_string(k), qd_[0][static_cast<std::size_t>(k)]});
            cp.tables.push_back({"qd2." + std::to_string(k), qd_[1][static_cast<std::size_t>(k)]});
        }
        cp.tables.push_back({"logits", logits_});
        return cp;
    }

private:
    const Environment& env_;
    const LearnerConfig& cfg_;
    int K_;
    LedgerBins bins_;
    QTable q_[2];
    std::vector<QTable> qd_[2];
    PolyakTarget qt_[2];
    std::vector<PolyakTarget> qdt_[2];
    QTable logits_;
    std::vector<std::vector<ActionId>> avail_;
};

} // namespace

TrainResult safe_actor_critic(const Environment& env, const LearnerConfig& cfg, std::uint64_t seed) {
    const int K = env.num_constraints();
    if (auto problems = cfg.validate(K); !problems.empty()) throw Error("safe_ac config: " + problems.front());
    const int T = env.horizon();
    const double gamma = env.discount();
    const auto& budgets = env.budgets();
    const auto Ku = static_cast<std::size_t>(K);

    ActorCritic ac(env, cfg);
    std::vector<LambdaSchedule> sched;
    for (std::size_t k = 0; k < Ku; ++k) {
        sched.emplace_back(cfg.lambda0[k], cfg.lambda_floor, static_cast<std::size_t>(cfg.window), budgets[k], cfg.decay);
    }
    std::mt19937_64 rng(seed);
    const auto n = static_cast<std::size_t>(cfg.n_step);

    TrainResult result;
    result.log.reserve(static_cast<std::size_t>(cfg.episodes));
    std::vector<double> c(Ku), c_next(Ku), c_inclusive(Ku);
    std::deque<AcStep> pending;
    for (int ep = 0; ep < cfg.episodes; ++ep) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<double> lambdas;
        for (const auto& sc : sched) lambdas.push_back(sc.lambda());
        bool policy_safe = true;
        for (const auto& sc : sched) policy_safe = policy_safe && sc.last_window_safe();

        Observation obs = env.reset(rng);
        std::fill(c.begin(), c.end(), 0.0);
        pending.clear();
        double ret = 0.0;
        double discount = 1.0;
        double scale = 1.0;
        double entropy_sum = 0.0;
        int steps = 0;
        for (int t = 0; t < T; ++t) {
            const int s = obs.state;
            const int x = ac.bins().index(c);
            for (std::size_t k = 0; k < Ku; ++k) c_inclusive[k] = c[k] + obs.costs[k];
            const ActionId a = ac.training_action(s, x, c_inclusive, obs.costs, rng);
            entropy_sum += ac.entropy(s, x);
            ++steps;
            StepResult st = env.step(s, a, rng);
            ret += discount * st.reward;
            discount *= gamma;

            double amount = 0.0;
            for (std::size_t k = 0; k < Ku; ++k) {
                c_next[k] = c_inclusive[k];
                amount += sample_penalty_amount({st.reward, obs.costs[k], c[k], c_next[k], t}, lambdas[k], cfg.schemes[k],
                                                budgets[k]);
            }
            const bool done = t + 1 == T || st.next.absorbing;
            if (done) {
                for (std::size_t k = 0; k < Ku; ++k) {
                    amount += terminal_penalty_amount(cfg.schemes[k], lambdas[k], c_next[k], st.next.costs[k], t + 1, T,
                                                      budgets[k]);
                }
            }
            const double r_tilde = amount == 0.0 ? st.reward : st.reward - amount / scale;
            scale *= gamma;
            pending.push_back({s, x, a, r_tilde, obs.costs});

            c.swap(c_next);
            obs = std::move(st.next);
            if (done) {
                while (!pending.empty()) {
                    ac.backup(pending, pending.size(), -1, 0, obs.costs, policy_safe, rng);
                    pending.pop_front();
                }
                break;
            }
            if (pending.size() == n) {
                ac.backup(pending, n, obs.state, ac.bins().index(c), obs.costs, policy_safe, rng);
                pending.pop_front();
            }
        }

        EpisodeLog log;
        log.episode = ep;
        log.ret = ret;
        for (std::size_t k = 0; k < Ku; ++k) log.final_cost.push_back(c[k] + obs.costs[k]);
        log.lambda = lambdas;
        log.explore = steps > 0 ? entropy_sum / steps : 0.0;
        if (cfg.log_wall_ms) {
            log.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        }
        for (std::size_t k = 0; k < Ku; ++k) sched[k].observe(log.final_cost[k]);
        result.log.push_back(std::move(log));
    }
    std::vector<double> lambdas;
    for (const auto& sc : sched) lambdas.push_back(sc.lambda());
    result.checkpoint = ac.checkpoint(lambdas);
    return result;
}

} // namespace cmdp
