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

#include "cmdp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cmdp/numeric.hpp"

namespace cmdp {

namespace {

struct Walker {
    const Cmdp& m;
    const TabularPolicy& policy;
    const TrajectoryVisitor& visit;
    const OracleOptions& options;
    std::size_t count = 0;
    TrajectoryRecord rec;
    std::vector<double> costs;  // lagged ledger c_t per constraint
    std::vector<double> discount;

    void descend(int t, double probability, double ret) {
        const StateId s = rec.trajectory.states.back();
        const int K = m.num_constraints();
        if (t == m.horizon) {
            if (++count > options.cap) {
                throw Error("trajectory enumeration exceeded cap of " + std::to_string(options.cap) +
                            " trajectories at depth " + std::to_string(t));
            }
            rec.probability = probability;
            rec.trajectory.probability = probability;
            rec.discounted_return = ret;
            for (int k = 0; k < K; ++k) rec.cost[static_cast<std::size_t>(k)] = costs[static_cast<std::size_t>(k)] + m.cost(k, s);
            visit(rec);
            return;
        }
        const int x = policy.space().find_for_costs(s, costs);
        if (x < 0 || static_cast<std::size_t>(x) >= policy.num_states()) {
            throw Error("policy has no row for state " + std::to_string(s) + " at t=" + std::to_string(t));
        }
        const auto row = policy.row(t, x);
        std::vector<double> saved = costs;
        for (int k = 0; k < K; ++k) costs[static_cast<std::size_t>(k)] += m.cost(k, s);
        for (ActionId a = 0; a < m.num_actions; ++a) {
            const double pa = row[static_cast<std::size_t>(a)];
            if (pa <= 0.0) continue;
            const double r = ret + discount[static_cast<std::size_t>(t)] * m.reward(s, a);
            rec.trajectory.actions.push_back(a);
            for (const Outcome& o : m.outcomes(s, a)) {
                if (o.probability <= 0.0) continue;
                rec.trajectory.states.push_back(o.next);
                descend(t + 1, probability * pa * o.probability, r);
                rec.trajectory.states.pop_back();
            }
            rec.trajectory.actions.pop_back();
        }
        costs = std::move(saved);
    }
};

} // namespace

std::size_t stream_trajectories(const Cmdp& m, const TabularPolicy& policy, const TrajectoryVisitor& visit,
                                const OracleOptions& options) {
    require_valid(m);
    Walker w{m, policy, visit, options, 0, {}, std::vector<double>(static_cast<std::size_t>(m.num_constraints()), 0.0), {}};
    w.rec.cost.assign(static_cast<std::size_t>(m.num_constraints()), 0.0);
    w.rec.trajectory.states.push_back(m.initial_state);
    double g = 1.0;
    for (int t = 0; t < m.horizon; ++t) {
        w.discount.push_back(g);
        g *= m.discount;
    }
    w.descend(0, 1.0, 0.0);
    return w.count;
}

TrajectorySet enumerate(const Cmdp& m, const TabularPolicy& policy, const OracleOptions& options) {
    TrajectorySet out;
    CompensatedSum mass;
    stream_trajectories(
        m, policy,
        [&](const TrajectoryRecord& r) {
            out.items.push_back(r);
            mass.add(r.probability);
        },
        options);
    out.mass = mass.value();
    return out;
}

double oracle_step_penalty(PenaltyScheme scheme, double lambda, double accumulated, double step_cost, int t,
                           double budget, double tolerance) {
    if (accumulated > budget + tolerance) {
        return scheme == PenaltyScheme::ValueAtRisk ? lambda : lambda * step_cost;
    }
    const double after = accumulated + step_cost;
    if (after <= budget + tolerance) return 0.0;
    switch (scheme) {
    case PenaltyScheme::RiskNeutral:
        return lambda * after;
    case PenaltyScheme::ValueAtRisk:
        return lambda * (t + 1);
    case PenaltyScheme::ConditionalValueAtRisk:
        return lambda * (after - budget);
    }
    return 0.0;
}

OracleStats oracle_stats(const Cmdp& m, const TabularPolicy& policy, const OraclePenalties& penalties,
                         const OracleOptions& options) {
    const auto K = static_cast<std::size_t>(m.num_constraints());
    if (penalties.lambdas.size() != K || penalties.schemes.size() != K) {
        throw Error("oracle_stats: need one lambda and one scheme per constraint");
    }
    const double tol = options.violation_tolerance;
    CompensatedSum mass, ret, pen_obj, step_obj;
    std::vector<CompensatedSum> cost(K), above(K), below(K), viol(K), excess(K);
    double var_min = std::numeric_limits<double>::infinity();
    double var_max = -std::numeric_limits<double>::infinity();
    bool any_violation = false;

    OracleStats st;
    st.count = stream_trajectories(
        m, policy,
        [&](const TrajectoryRecord& r) {
            const double p = r.probability;
            mass.add(p);
            ret.add(p * r.discounted_return);
            double closed = 0.0;
            double stepwise = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                const double D = r.cost[k];
                const double budget = m.budgets[k];
                const bool v = D > budget + tol;
                cost[k].add(p * D);
                (v ? above[k] : below[k]).add(p * D);
                if (v) {
                    viol[k].add(p);
                    excess[k].add(p * (D - budget));
                }
                const double lambda = penalties.lambdas[k];
                if (v) {
                    switch (penalties.schemes[k]) {
                    case PenaltyScheme::RiskNeutral: closed += lambda * D; break;
                    case PenaltyScheme::ValueAtRisk: closed += lambda * (m.horizon + 1); break;
                    case PenaltyScheme::ConditionalValueAtRisk: closed += lambda * (D - budget); break;
                    }
                }
                double c = 0.0;
                double var_steps = 0.0;
                for (int t = 0; t <= m.horizon; ++t) {
                    const double d = m.cost(static_cast<int>(k), r.trajectory.states[static_cast<std::size_t>(t)]);
                    stepwise += oracle_step_penalty(penalties.schemes[k], lambda, c, d, t, budget, tol);
                    var_steps += oracle_step_penalty(PenaltyScheme::ValueAtRisk, 1.0, c, d, t, budget, tol);
                    c += d;
                }
                if (v) {
                    any_violation = true;
                    var_min = std::min(var_min, var_steps);
                    var_max = std::max(var_max, var_steps);
                }
            }
            pen_obj.add(p * (r.discounted_return - closed));
            step_obj.add(p * (r.discounted_return - stepwise));
        },
        options);

    st.mass = mass.value();
    st.expected_return = ret.value();
    st.penalized_objective = pen_obj.value();
    st.stepwise_objective = step_obj.value();
    for (std::size_t k = 0; k < K; ++k) {
        st.expected_cost.push_back(cost[k].value());
        st.trunc_above.push_back(above[k].value());
        st.trunc_below.push_back(below[k].value());
        st.violation_prob.push_back(viol[k].value());
        st.cvar_excess.push_back(excess[k].value());
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    st.var_constant_min = any_violation ? var_min : nan;
    st.var_constant_max = any_violation ? var_max : nan;
    return st;
}

namespace {

struct DecisionPoint {
    int t;
    int x;
    std::vector<ActionId> actions;
};

std::vector<DecisionPoint> decision_points(const ExtendedMdp& e) {
    std::vector<DecisionPoint> out;
    const Cmdp& m = e.base();
    for (int t = 0; t < e.horizon(); ++t) {
        for (int x : e.layer(t)) {
            out.push_back({t, x, m.available_actions(e.space().at(x).state)});
        }
    }
    return out;
}

} // namespace

std::optional<std::size_t> deterministic_policy_count(const ExtendedMdp& e, std::size_t cap) {
    std::size_t n = 1;
    for (const auto& d : decision_points(e)) {
        n *= d.actions.size();
        if (n > cap) return std::nullopt;
    }
    return n;
}

void for_each_deterministic_policy(const ExtendedMdp& e, const std::function<void(const TabularPolicy&)>& visit) {
    const Cmdp& m = e.base();
    const auto points = decision_points(e);
    const int layers = std::max(e.horizon(), 1);
    TabularPolicy policy(e.space_ptr(), m.num_actions, layers, TabularPolicy::Kind::Deterministic);
    for (int t = 0; t < layers; ++t) {
        for (std::size_t x = 0; x < e.size(); ++x) {
            policy.set_action(t, static_cast<int>(x), m.available_actions(e.space().at(static_cast<int>(x)).state).front());
        }
    }
    std::vector<std::size_t> digit(points.size(), 0);
    while (true) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            policy.set_action(points[i].t, points[i].x, points[i].actions[digit[i]]);
        }
        visit(policy);
        std::size_t i = 0;
        while (i < points.size() && ++digit[i] == points[i].actions.size()) digit[i++] = 0;
        if (i == points.size()) break;
    }
}

} // namespace cmdp
