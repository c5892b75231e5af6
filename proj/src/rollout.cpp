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

#include "cmdp/rollout.hpp"

#include <cmath>

#include "cmdp/numeric.hpp"

namespace cmdp {

CheckpointPolicy::CheckpointPolicy(Checkpoint cp) : cp_(std::move(cp)), bins_(cp_.budgets, cp_.quantum) {
    if (cp_.learner != "safe_q" && cp_.learner != "safe_ac") throw Error("unknown learner in checkpoint: " + cp_.learner);
    if (cp_.lambdas.size() != cp_.budgets.size()) throw Error("checkpoint lambdas/budgets size mismatch");
    for (const auto& t : cp_.tables) {
        if (t.table.num_bins() != bins_.count()) throw Error("checkpoint table '" + t.name + "' has the wrong ledger size");
    }
    if (cp_.learner == "safe_q") {
        (void)cp_.table("q");
    } else {
        (void)cp_.table("q1");
        (void)cp_.table("q2");
        (void)cp_.table("logits");
        for (std::size_t k = 0; k < cp_.budgets.size(); ++k) {
            (void)cp_.table("qd1." + std::to_string(k));
            (void)cp_.table("qd2." + std::to_string(k));
        }
    }
}

ActionId CheckpointPolicy::act(StateId s, std::span<const double> ledger, std::span<const double> cost,
                               std::span<const ActionId> available) const {
    const int x = bins_.index(ledger);
    if (cp_.learner == "safe_q") {
        const auto row = cp_.table("q").row(s, x);
        ActionId best = available.front();
        for (ActionId a : available) {
            if (row[static_cast<std::size_t>(a)] > row[static_cast<std::size_t>(best)]) best = a;
        }
        return best;
    }
    const auto pi = softmax_row(cp_.table("logits").row(s, x), available);
    CriticRows rows{pi, cp_.table("q1").row(s, x), cp_.table("q2").row(s, x), {}, {}};
    std::vector<double> c(ledger.begin(), ledger.end());
    for (std::size_t k = 0; k < cp_.budgets.size(); ++k) {
        rows.qd1.push_back(cp_.table("qd1." + std::to_string(k)).row(s, x));
        rows.qd2.push_back(cp_.table("qd2." + std::to_string(k)).row(s, x));
        c[k] += cost[k];
    }
    return constrained_action_select(rows, available, c, cost, cp_.budgets, cp_.alpha_ent);
}

double CheckpointPolicy::action_probability(StateId s, std::span<const double> ledger, ActionId a) const {
    const int x = bins_.index(ledger);
    std::vector<ActionId> all(static_cast<std::size_t>(cp_.num_actions));
    for (int i = 0; i < cp_.num_actions; ++i) all[static_cast<std::size_t>(i)] = i;
    if (cp_.learner == "safe_q") {
        const auto row = cp_.table("q").row(s, x);
        ActionId best = 0;
        for (ActionId b : all) {
            if (row[static_cast<std::size_t>(b)] > row[static_cast<std::size_t>(best)]) best = b;
        }
        return best == a ? 1.0 : 0.0;
    }
    return softmax_row(cp_.table("logits").row(s, x), all)[static_cast<std::size_t>(a)];
}

namespace {

MeanSe finish(double sum, double sum_sq, int n) {
    MeanSe out;
    out.mean = sum / n;
    if (n > 1) {
        const double var = std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1));
        out.se = std::sqrt(var / n);
    }
    return out;
}

} // namespace

RolloutStats rollout(const Environment& env, const ActionFn& policy, int episodes, std::uint64_t seed) {
    if (episodes < 1) throw Error("rollout needs at least one episode");
    const auto K = static_cast<std::size_t>(env.num_constraints());
    const auto& budgets = env.budgets();
    std::mt19937_64 rng(seed);
    CompensatedSum r1, r2;
    std::vector<CompensatedSum> c1(K), c2(K), v1(K), e1(K), e2(K);
    std::vector<double> c(K);
    for (int ep = 0; ep < episodes; ++ep) {
        Observation obs = env.reset(rng);
        std::fill(c.begin(), c.end(), 0.0);
        double ret = 0.0;
        double g = 1.0;
        for (int t = 0; t < env.horizon(); ++t) {
            const auto av = env.available_actions(obs.state);
            const ActionId a = policy(obs.state, t, c, obs.costs, av, rng);
            StepResult st = env.step(obs.state, a, rng);
            ret += g * st.reward;
            g *= env.discount();
            for (std::size_t k = 0; k < K; ++k) c[k] += obs.costs[k];
            obs = std::move(st.next);
            if (obs.absorbing) break;
        }
        r1.add(ret);
        r2.add(ret * ret);
        for (std::size_t k = 0; k < K; ++k) {
            const double D = c[k] + obs.costs[k];
            const double ex = std::max(0.0, D - budgets[k]);
            c1[k].add(D);
            c2[k].add(D * D);
            if (D > budgets[k]) v1[k].add(1.0);
            e1[k].add(ex);
            e2[k].add(ex * ex);
        }
    }
    RolloutStats out;
    out.episodes = episodes;
    out.ret = finish(r1.value(), r2.value(), episodes);
    for (std::size_t k = 0; k < K; ++k) {
        out.cost.push_back(finish(c1[k].value(), c2[k].value(), episodes));
        out.violation.push_back(finish(v1[k].value(), v1[k].value(), episodes));
        out.excess.push_back(finish(e1[k].value(), e2[k].value(), episodes));
    }
    return out;
}

ActionFn checkpoint_action_fn(const CheckpointPolicy& policy) {
    return [&policy](StateId s, int, std::span<const double> c, std::span<const double> d,
                     std::span<const ActionId> av, std::mt19937_64&) { return policy.act(s, c, d, av); };
}

ActionFn tabular_action_fn(const TabularPolicy& policy) {
    return [&policy](StateId s, int t, std::span<const double> c, std::span<const double>, std::span<const ActionId>,
                     std::mt19937_64& rng) {
        const int x = policy.space().find_for_costs(s, c);
        if (x < 0) throw Error("tabular policy has no row for state " + std::to_string(s));
        if (policy.kind() == TabularPolicy::Kind::Deterministic) return policy.mode(t, x);
        const auto row = policy.row(t, x);
        double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        for (std::size_t a = 0; a < row.size(); ++a) {
            if (row[a] <= 0.0) continue;
            if (u < row[a]) return static_cast<ActionId>(a);
            u -= row[a];
        }
        for (std::size_t a = row.size(); a-- > 0;) {
            if (row[a] > 0.0) return static_cast<ActionId>(a);
        }
        return ActionId{0};
    };
}

} // namespace cmdp
