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

#include "cmdp/solver.hpp"

#include <cmath>
#include <sstream>

#include "cmdp/numeric.hpp"

namespace cmdp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> discount_powers(const Cmdp& m) {
    std::vector<double> out(static_cast<std::size_t>(m.horizon) + 1);
    double w = 1.0;
    for (auto& v : out) {
        v = w;
        w *= m.discount;
    }
    return out;
}

ValueTable empty_table(const ExtendedMdp& e) {
    if (!e.built()) throw Error("backward induction requires an exact-mode extended MDP");
    ValueTable table;
    table.horizon = e.horizon();
    table.space = e.space_ptr();
    const std::size_t X = e.size();
    table.value.assign(static_cast<std::size_t>(e.horizon()) + 2, std::vector<double>(X, 0.0));
    table.greedy.assign(static_cast<std::size_t>(e.horizon()), std::vector<int>(X, -1));
    return table;
}

double expected_next(const ExtendedMdp& e, const std::vector<double>& next, int x, ActionId a) {
    double sum = 0.0;
    for (const auto& tr : e.successors(x, a)) sum += tr.probability * next[static_cast<std::size_t>(tr.next)];
    return sum;
}

bool violating(const ExtendedMdp& e, int x) {
    for (int k = 0; k < e.base().num_constraints(); ++k) {
        if (e.ledger_case(x, k) != LedgerCase::Safe) return true;
    }
    return false;
}

} // namespace

TabularPolicy ValueTable::policy(const Cmdp& m) const {
    TabularPolicy out(space, m.num_actions, std::max(horizon, 1), TabularPolicy::Kind::Deterministic);
    for (int t = 0; t < std::max(horizon, 1); ++t) {
        for (std::size_t x = 0; x < space->size(); ++x) {
            int a = t < horizon ? greedy[static_cast<std::size_t>(t)][x] : -1;
            if (a < 0) a = m.available_actions(space->at(static_cast<int>(x)).state).front();
            out.set_action(t, static_cast<int>(x), a);
        }
    }
    return out;
}

WorstCaseInfeasible::WorstCaseInfeasible(const std::string& state_name)
    : Error("worst-case CMDP infeasible: no action at " + state_name +
            " keeps every trajectory within budget") {}

std::vector<std::vector<double>> unconstrained_values(const Cmdp& m) {
    require_valid(m);
    const auto disc = discount_powers(m);
    const auto S = static_cast<std::size_t>(m.num_states);
    std::vector<std::vector<double>> w(static_cast<std::size_t>(m.horizon) + 1, std::vector<double>(S, 0.0));
    for (int t = m.horizon - 1; t >= 0; --t) {
        const auto& next = w[static_cast<std::size_t>(t) + 1];
        for (StateId s = 0; s < m.num_states; ++s) {
            double best = kNegInf;
            for (ActionId a = 0; a < m.num_actions; ++a) {
                if (!m.is_available(s, a)) continue;
                double q = disc[static_cast<std::size_t>(t)] * m.reward(s, a);
                for (const Outcome& o : m.outcomes(s, a)) q += o.probability * next[static_cast<std::size_t>(o.next)];
                if (q > best + kTieTolerance || best == kNegInf) best = q;
            }
            w[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)] = best;
        }
    }
    return w;
}

double unconstrained_value(const Cmdp& m) {
    return unconstrained_values(m)[0][static_cast<std::size_t>(m.initial_state)];
}

ValueTable backward_induction(const ExtendedMdp& e) {
    ValueTable table = empty_table(e);
    const Cmdp& m = e.base();
    const int T = m.horizon;
    const auto disc = discount_powers(m);
    for (int x : e.layer(T)) {
        table.value[static_cast<std::size_t>(T)][static_cast<std::size_t>(x)] = -e.step_penalty(x, T);
    }
    for (int t = T - 1; t >= 0; --t) {
        const auto& next = table.value[static_cast<std::size_t>(t) + 1];
        for (int x : e.layer(t)) {
            const StateId s = e.space().at(x).state;
            double best = kNegInf;
            int arg = -1;
            for (ActionId a = 0; a < m.num_actions; ++a) {
                if (!m.is_available(s, a)) continue;
                const double q = disc[static_cast<std::size_t>(t)] * m.reward(s, a) + expected_next(e, next, x, a);
                if (arg < 0 || q > best + kTieTolerance) {
                    best = q;
                    arg = a;
                }
            }
            table.value[static_cast<std::size_t>(t)][static_cast<std::size_t>(x)] = best - e.step_penalty(x, t);
            table.greedy[static_cast<std::size_t>(t)][static_cast<std::size_t>(x)] = arg;
        }
    }
    return table;
}

double evaluate_policy(const ExtendedMdp& e, const TabularPolicy& policy) {
    if (!e.built()) throw Error("evaluate_policy requires an exact-mode extended MDP");
    if (policy.space_ptr() != e.space_ptr()) throw Error("evaluate_policy: policy is defined on a different augmented space");
    const Cmdp& m = e.base();
    const int T = m.horizon;
    const auto disc = discount_powers(m);
    const std::size_t X = e.size();
    std::vector<double> next(X, 0.0), cur(X, 0.0);
    for (int x : e.layer(T)) next[static_cast<std::size_t>(x)] = -e.step_penalty(x, T);
    for (int t = T - 1; t >= 0; --t) {
        for (int x : e.layer(t)) {
            const StateId s = e.space().at(x).state;
            const auto row = policy.row(t, x);
            double v = 0.0;
            for (ActionId a = 0; a < m.num_actions; ++a) {
                const double p = row[static_cast<std::size_t>(a)];
                if (p == 0.0) continue;
                v += p * (disc[static_cast<std::size_t>(t)] * m.reward(s, a) + expected_next(e, next, x, a));
            }
            cur[static_cast<std::size_t>(x)] = v - e.step_penalty(x, t);
        }
        std::swap(cur, next);
    }
    return next[0];
}

WorstCaseSolution worst_case_solution(const Cmdp& m, const ExtendedOptions& options) {
    const ExtendedMdp e = build_extended(m, 0.0, PenaltyScheme::RiskNeutral, options);
    ValueTable table = empty_table(e);
    const int T = m.horizon;
    const auto disc = discount_powers(m);
    for (int x : e.layer(T)) {
        table.value[static_cast<std::size_t>(T)][static_cast<std::size_t>(x)] = violating(e, x) ? kNegInf : 0.0;
    }
    for (int t = T - 1; t >= 0; --t) {
        const auto& next = table.value[static_cast<std::size_t>(t) + 1];
        for (int x : e.layer(t)) {
            auto& slot = table.value[static_cast<std::size_t>(t)][static_cast<std::size_t>(x)];
            slot = kNegInf;
            if (violating(e, x)) continue;
            const StateId s = e.space().at(x).state;
            int arg = -1;
            for (ActionId a = 0; a < m.num_actions; ++a) {
                if (!m.is_available(s, a)) continue;
                bool feasible = true;
                for (const auto& tr : e.successors(x, a)) {
                    if (next[static_cast<std::size_t>(tr.next)] == kNegInf) {
                        feasible = false;
                        break;
                    }
                }
                if (!feasible) continue;
                const double q = disc[static_cast<std::size_t>(t)] * m.reward(s, a) + expected_next(e, next, x, a);
                if (arg < 0 || q > slot + kTieTolerance) {
                    slot = q;
                    arg = a;
                }
            }
            table.greedy[static_cast<std::size_t>(t)][static_cast<std::size_t>(x)] = arg;
        }
    }
    const double v = table.initial_value();
    if (v == kNegInf) {
        throw WorstCaseInfeasible("(t=0, s=" + std::to_string(m.initial_state) + ", c=0)");
    }
    return {v, std::move(table)};
}

double worst_case_value(const Cmdp& m, const ExtendedOptions& options) {
    return worst_case_solution(m, options).value;
}

// Terminal reward c_T + d(s_T) inside the budget, 0 otherwise; no step rewards.
double max_truncated_cost(const Cmdp& m, int k, const ExtendedOptions& options) {
    if (k < 0 || k >= m.num_constraints()) throw Error("max_truncated_cost: constraint index out of range");
    const ExtendedMdp e = build_extended(m, 0.0, PenaltyScheme::RiskNeutral, options);
    const int T = m.horizon;
    const std::size_t X = e.size();
    std::vector<double> next(X, 0.0), cur(X, 0.0);
    for (int x : e.layer(T)) {
        const StateId s = e.space().at(x).state;
        next[static_cast<std::size_t>(x)] =
            e.ledger_case(x, k) == LedgerCase::Safe ? e.accumulated(x, k) + m.cost(k, s) : 0.0;
    }
    for (int t = T - 1; t >= 0; --t) {
        for (int x : e.layer(t)) {
            const StateId s = e.space().at(x).state;
            double best = kNegInf;
            for (ActionId a = 0; a < m.num_actions; ++a) {
                if (!m.is_available(s, a)) continue;
                best = std::max(best, expected_next(e, next, x, a));
            }
            cur[static_cast<std::size_t>(x)] = best;
        }
        std::swap(cur, next);
    }
    return next[0];
}

double phi_star(const Cmdp& m, int k, const ExtendedOptions& options) {
    return m.budgets.at(static_cast<std::size_t>(k)) - max_truncated_cost(m, k, options);
}

namespace {

BoundsReport fill_bounds(const Cmdp& m, double alpha, const ExtendedOptions& options, bool throw_infeasible) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("lambda_bounds: alpha must lie in (0, 1], got " + format_double(alpha));
    BoundsReport r;
    r.alpha = alpha;
    r.psi_star = unconstrained_value(m);
    try {
        r.psi_bar = worst_case_value(m, options);
        r.feasible_worst_case = true;
    } catch (const WorstCaseInfeasible&) {
        if (throw_infeasible) throw;
    }
    const double inf = std::numeric_limits<double>::infinity();
    for (int k = 0; k < m.num_constraints(); ++k) {
        const double phi = phi_star(m, k, options);
        r.phi_star.push_back(phi);
        if (!r.feasible_worst_case) {
            r.lambda_rn.push_back(inf);
            r.lambda_var.push_back(inf);
            continue;
        }
        const double gap = r.psi_star - r.psi_bar;
        r.lambda_rn.push_back(phi <= kTieTolerance ? inf : gap / phi);
        r.lambda_var.push_back(gap / (alpha * m.budgets[static_cast<std::size_t>(k)]));
    }
    return r;
}

} // namespace

BoundsReport lambda_bounds(const Cmdp& m, double alpha, const ExtendedOptions& options) {
    return fill_bounds(m, alpha, options, true);
}

BoundsReport bounds_report(const Cmdp& m, double alpha, const ExtendedOptions& options) {
    return fill_bounds(m, alpha, options, false);
}

std::string bounds_csv_header() {
    return "instance,k,alpha,psi_star,psi_bar,feasible,phi_star,lambda_rn,lambda_var\n";
}

std::string bounds_csv_rows(const std::string& name, const BoundsReport& report) {
    std::ostringstream os;
    for (std::size_t k = 0; k < report.phi_star.size(); ++k) {
        os << name << "," << k << "," << format_double(report.alpha) << "," << format_double(report.psi_star) << ","
           << format_double(report.psi_bar) << "," << (report.feasible_worst_case ? 1 : 0) << ","
           << format_double(report.phi_star[k]) << "," << format_double(report.lambda_rn[k]) << ","
           << format_double(report.lambda_var[k]) << "\n";
    }
    return os.str();
}

} // namespace cmdp
