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

#include "cmdp/cmdp.hpp"

#include <cmath>
#include <sstream>

#include "cmdp/numeric.hpp"

namespace cmdp {

namespace {

constexpr double kRowSumTolerance = 1e-12;

std::string pair_name(StateId s, ActionId a) {
    return "(s" + std::to_string(s) + ", a" + std::to_string(a) + ")";
}

void check_shape(const Trajectory& tau, const Cmdp& m) {
    if (tau.states.empty() || tau.states.size() != tau.actions.size() + 1) {
        throw Error("trajectory: expected |states| = |actions| + 1, got " +
                    std::to_string(tau.states.size()) + " states and " +
                    std::to_string(tau.actions.size()) + " actions");
    }
    for (StateId s : tau.states) {
        if (s < 0 || s >= m.num_states) throw Error("trajectory: state " + std::to_string(s) + " out of range");
    }
    for (ActionId a : tau.actions) {
        if (a < 0 || a >= m.num_actions) throw Error("trajectory: action " + std::to_string(a) + " out of range");
    }
}

} // namespace

std::vector<ActionId> Cmdp::available_actions(StateId s) const {
    std::vector<ActionId> out;
    for (ActionId a = 0; a < num_actions; ++a) {
        if (is_available(s, a)) out.push_back(a);
    }
    return out;
}

Cmdp Cmdp::with_shape(int num_states, int num_actions, int num_constraints) {
    Cmdp m;
    m.num_states = num_states;
    m.num_actions = num_actions;
    const auto pairs = static_cast<std::size_t>(num_states) * static_cast<std::size_t>(num_actions);
    m.transitions.assign(pairs, {});
    m.rewards.assign(pairs, 0.0);
    m.costs.assign(static_cast<std::size_t>(num_constraints),
                   std::vector<double>(static_cast<std::size_t>(num_states), 0.0));
    m.budgets.assign(static_cast<std::size_t>(num_constraints), 1.0);
    return m;
}

std::vector<Violation> validate_cmdp(const Cmdp& m) {
    std::vector<Violation> out;
    auto report = [&](std::string field, std::string where, double measured, std::string message) {
        out.push_back({std::move(field), std::move(where), measured, std::move(message)});
    };

    if (m.num_states < 1) report("states", "count", m.num_states, "at least one state required");
    if (m.num_actions < 1) report("actions", "count", m.num_actions, "at least one action required");
    if (!out.empty()) return out;

    const auto pairs = static_cast<std::size_t>(m.num_states) * static_cast<std::size_t>(m.num_actions);
    if (m.initial_state < 0 || m.initial_state >= m.num_states) {
        report("s0", "s0", m.initial_state, "initial state out of range");
    }
    if (m.transitions.size() != pairs) report("transition", "size", static_cast<double>(m.transitions.size()), "expected |S|*|A| rows");
    if (m.rewards.size() != pairs) report("reward", "size", static_cast<double>(m.rewards.size()), "expected |S|*|A| entries");
    if (!m.available.empty() && m.available.size() != pairs) report("available", "size", static_cast<double>(m.available.size()), "expected |S|*|A| entries");
    if (!m.absorbing.empty() && m.absorbing.size() != static_cast<std::size_t>(m.num_states)) report("absorbing", "size", static_cast<double>(m.absorbing.size()), "expected |S| entries");
    if (m.horizon < 1) report("horizon", "horizon", m.horizon, "horizon must be >= 1");
    if (!(m.discount > 0.0 && m.discount <= 1.0)) report("discount", "discount", m.discount, "discount must lie in (0, 1]");
    if (m.costs.empty()) report("cost", "K", 0, "at least one cost function required");
    if (m.budgets.size() != m.costs.size()) report("budget", "K", static_cast<double>(m.budgets.size()), "one budget per cost function required");
    if (!out.empty()) return out;

    for (StateId s = 0; s < m.num_states; ++s) {
        bool any = false;
        for (ActionId a = 0; a < m.num_actions; ++a) {
            if (!m.is_available(s, a)) continue;
            any = true;
            const double r = m.reward(s, a);
            if (!std::isfinite(r)) report("reward", pair_name(s, a), r, "reward must be finite");
            CompensatedSum sum;
            for (const Outcome& o : m.outcomes(s, a)) {
                if (o.next < 0 || o.next >= m.num_states) {
                    report("transition", pair_name(s, a), o.next, "successor out of range");
                }
                if (!(o.probability >= 0.0) || !std::isfinite(o.probability)) {
                    report("transition", pair_name(s, a), o.probability, "negative or non-finite probability");
                }
                sum.add(o.probability);
            }
            if (std::abs(sum.value() - 1.0) > kRowSumTolerance) {
                report("transition", pair_name(s, a), sum.value(), "row does not sum to 1");
            }
        }
        if (!any) report("actions", "s" + std::to_string(s), 0, "state has no available action");
    }
    for (std::size_t k = 0; k < m.costs.size(); ++k) {
        if (m.costs[k].size() != static_cast<std::size_t>(m.num_states)) {
            report("cost." + std::to_string(k), "size", static_cast<double>(m.costs[k].size()), "expected |S| entries");
            continue;
        }
        for (StateId s = 0; s < m.num_states; ++s) {
            const double d = m.costs[k][static_cast<std::size_t>(s)];
            if (!(d >= 0.0) || !std::isfinite(d)) {
                report("cost." + std::to_string(k), "s" + std::to_string(s), d, "cost must be finite and non-negative");
            }
        }
        const double b = m.budgets[k];
        if (!(b > 0.0) || !std::isfinite(b)) {
            report("budget." + std::to_string(k), "budget." + std::to_string(k), b, "budget must be finite and positive");
        }
    }
    return out;
}

std::string describe(const std::vector<Violation>& violations) {
    std::ostringstream os;
    for (const auto& v : violations) {
        os << v.field << " " << v.where << ": " << v.message << " (measured " << format_double(v.measured) << ")\n";
    }
    return os.str();
}

void require_valid(const Cmdp& m) {
    const auto violations = validate_cmdp(m);
    if (!violations.empty()) throw Error("invalid CMDP:\n" + describe(violations));
}

double trajectory_cost(const Trajectory& tau, const Cmdp& m, int k) {
    if (k < 0 || k >= m.num_constraints()) {
        throw Error("trajectory_cost: constraint index " + std::to_string(k) + " out of range");
    }
    check_shape(tau, m);
    double total = 0.0;
    if (!tau.realized_costs.empty()) {
        const auto& row = tau.realized_costs.at(static_cast<std::size_t>(k));
        if (row.size() != tau.states.size()) throw Error("trajectory_cost: realized cost row has wrong length");
        for (double d : row) total += d;
        return total;
    }
    for (StateId s : tau.states) total += m.cost(k, s);
    return total;
}

double discounted_return(const Trajectory& tau, const Cmdp& m) {
    check_shape(tau, m);
    const bool realized = !tau.realized_rewards.empty();
    if (realized && tau.realized_rewards.size() != tau.actions.size()) {
        throw Error("discounted_return: realized reward row has wrong length");
    }
    double total = 0.0;
    double weight = 1.0;
    for (std::size_t t = 0; t < tau.actions.size(); ++t) {
        const double r = realized ? tau.realized_rewards[t] : m.reward(tau.states[t], tau.actions[t]);
        total += weight * r;
        weight *= m.discount;
    }
    return total;
}

} // namespace cmdp
