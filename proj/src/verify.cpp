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

#include "cmdp/verify.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "cmdp/numeric.hpp"
#include "cmdp/solver.hpp"

namespace cmdp {

std::string_view kind_name(VerifyKind kind) noexcept {
    switch (kind) {
    case VerifyKind::Unconstrained: return "unconstrained";
    case VerifyKind::WorstCase: return "worst_case";
    case VerifyKind::TruncatedCost: return "truncated_cost";
    case VerifyKind::RiskNeutral: return "rn_bound";
    case VerifyKind::VarBound: return "var_bound";
    case VerifyKind::VarEquivalence: return "var_equivalence";
    case VerifyKind::Cvar: return "cvar_equivalence";
    case VerifyKind::MultiRiskNeutral: return "multi_rn";
    }
    return "unconstrained";
}

VerifyKind parse_kind(std::string_view name) {
    for (VerifyKind k : kAllVerifyKinds) {
        if (kind_name(k) == name) return k;
    }
    throw Error("unknown verification kind '" + std::string(name) + "'");
}

std::string_view status_name(RowStatus s) noexcept {
    switch (s) {
    case RowStatus::Pass: return "pass";
    case RowStatus::Fail: return "fail";
    case RowStatus::NotApplicable: return "n/a";
    }
    return "n/a";
}

namespace {

struct Solved {
    ExtendedMdp e;
    ValueTable table;
    TabularPolicy policy;
    OracleStats stats;
};

Solved solve(const Cmdp& m, const std::vector<double>& lambdas, PenaltyScheme scheme, const VerifyOptions& o) {
    const std::vector<PenaltyScheme> schemes(lambdas.size(), scheme);
    ExtendedMdp e = build_extended(m, lambdas, schemes, o.extended);
    ValueTable table = backward_induction(e);
    TabularPolicy policy = table.policy(m);
    OracleStats stats = oracle_stats(m, policy, {lambdas, schemes}, o.oracle);
    return {std::move(e), std::move(table), std::move(policy), std::move(stats)};
}

std::vector<double> uniform(const Cmdp& m, double lambda) {
    return std::vector<double>(static_cast<std::size_t>(m.num_constraints()), lambda);
}

std::string indexed(const std::string& q, std::size_t k) { return q + "." + std::to_string(k); }

struct RowSink {
    VerifyKind kind;
    const std::string& fixture;
    std::vector<VerifyRow>& rows;

    void check(std::string quantity, double lambda, double bound, double measured, bool ok, std::string note = {}) {
        rows.push_back({kind, fixture, std::move(quantity), lambda, bound, measured, ok ? RowStatus::Pass : RowStatus::Fail,
                        std::move(note)});
    }
    void skip(std::string quantity, double lambda, std::string note) {
        rows.push_back({kind, fixture, std::move(quantity), lambda, 0.0, 0.0, RowStatus::NotApplicable, std::move(note)});
    }
};

// Rows shared by the VaR- and CVaR-penalty equivalence checks.
void equivalence_rows(RowSink& sink, const Fixture& f, const BoundsReport& b, PenaltyScheme scheme,
                      const VerifyOptions& o) {
    const Cmdp& m = f.model;
    const auto K = static_cast<std::size_t>(m.num_constraints());
    const bool var = scheme == PenaltyScheme::ValueAtRisk;
    const double gap = b.psi_star - b.psi_bar;
    const std::string name = var ? "P(D>c)" : "E[(D-c)+]";
    std::vector<std::vector<double>> measured(K);
    std::vector<double> lambdas;
    std::vector<Solved> solved;
    double horizon_factor = 1.0;
    if (var) {
        // Measured on the unconstrained optimum, falling back to the uniform policy.
        horizon_factor = m.horizon + 1.0;
        const std::vector<PenaltyScheme> schemes(K, scheme);
        OracleStats probe = solve(m, uniform(m, 0.0), scheme, o).stats;
        if (std::isnan(probe.var_constant_min)) {
            const ExtendedMdp e = build_extended(m, uniform(m, 0.0), schemes, o.extended);
            probe = oracle_stats(m, TabularPolicy::uniform(e.space_ptr(), m, std::max(m.horizon, 1)),
                                 {uniform(m, 0.0), schemes}, o.oracle);
        }
        if (std::isnan(probe.var_constant_min)) {
            sink.skip("T'", 0.0, "no violating trajectory; using T+1");
        } else {
            horizon_factor = probe.var_constant_min;
            sink.check("T'", 0.0, m.horizon + 1.0, probe.var_constant_min,
                       probe.var_constant_min == probe.var_constant_max,
                       "per-trajectory VaR penalty constant (min; max " + format_double(probe.var_constant_max) + ")");
        }
    }
    for (double lambda : o.equivalence_grid) {
        if (!(lambda > 0.0)) {
            sink.skip(name, lambda, "bound needs lambda > 0");
            continue;
        }
        Solved s = solve(m, uniform(m, lambda), scheme, o);
        for (std::size_t k = 0; k < K; ++k) {
            const double value = var ? s.stats.violation_prob[k] : s.stats.cvar_excess[k];
            const double bound = gap / (lambda * horizon_factor);
            sink.check(indexed(name, k), lambda, bound, value, value <= bound + o.tolerance);
            measured[k].push_back(value);
        }
        lambdas.push_back(lambda);
        solved.push_back(std::move(s));
    }
    if (lambdas.empty()) return;
    for (std::size_t k = 0; k < K; ++k) {
        bool monotone = true;
        double worst_rise = 0.0;
        for (std::size_t i = 1; i < measured[k].size(); ++i) {
            const double rise = measured[k][i] - measured[k][i - 1];
            worst_rise = std::max(worst_rise, rise);
            if (rise > 1e-12) monotone = false;
        }
        sink.check(indexed("monotone " + name, k), lambdas.back(), 0.0, worst_rise, monotone,
                   "largest increase along the lambda grid");
        sink.check(indexed("limit " + name, k), lambdas.back(), 0.0, measured[k].back(),
                   measured[k].back() <= o.tolerance, "value at the largest lambda");
    }

    // Optimality among deterministic policies meeting the same risk level.
    for (std::size_t i = 0; i < solved.size(); ++i) {
        const Solved& s = solved[i];
        const auto count = deterministic_policy_count(s.e, o.policy_enumeration_cap);
        if (!count) {
            sink.skip("optimal E[R]", lambdas[i],
                      "more than " + std::to_string(o.policy_enumeration_cap) + " deterministic policies; optimality not checked");
            continue;
        }
        const std::vector<double> zero(K, 0.0);
        const std::vector<PenaltyScheme> schemes(K, scheme);
        double best_rival = -std::numeric_limits<double>::infinity();
        for_each_deterministic_policy(s.e, [&](const TabularPolicy& p) {
            const OracleStats st = oracle_stats(m, p, {zero, schemes}, o.oracle);
            for (std::size_t k = 0; k < K; ++k) {
                const double risk = var ? st.violation_prob[k] : st.cvar_excess[k];
                const double level = var ? s.stats.violation_prob[k] : s.stats.cvar_excess[k];
                if (risk > level + 1e-12) return;
            }
            best_rival = std::max(best_rival, st.expected_return);
        });
        sink.check("optimal E[R]", lambdas[i], s.stats.expected_return, best_rival,
                   best_rival <= s.stats.expected_return + o.tolerance,
                   "best rival over " + std::to_string(*count) + " deterministic policies at the same risk level");
    }
}

} // namespace

std::vector<VerifyRow> verify(VerifyKind kind, const Fixture& f, const VerifyOptions& o) {
    std::vector<VerifyRow> rows;
    RowSink sink{kind, f.name, rows};
    const Cmdp& m = f.model;
    const auto K = static_cast<std::size_t>(m.num_constraints());

    if (kind == VerifyKind::Unconstrained) {
        const double psi = unconstrained_value(m);
        for (PenaltyScheme scheme : {PenaltyScheme::RiskNeutral, PenaltyScheme::ValueAtRisk,
                                     PenaltyScheme::ConditionalValueAtRisk}) {
            const Solved s = solve(m, uniform(m, 0.0), scheme, o);
            const double v = s.table.initial_value();
            sink.check("value/" + std::string(scheme_name(scheme)), 0.0, psi, v, std::abs(v - psi) <= o.tolerance);
        }
        const Solved s = solve(m, uniform(m, 0.0), PenaltyScheme::RiskNeutral, o);
        sink.check("E[R]", 0.0, psi, s.stats.expected_return, std::abs(s.stats.expected_return - psi) <= o.tolerance);
        return rows;
    }

    const BoundsReport b = bounds_report(m, 1.0, o.extended);
    if (!b.feasible_worst_case) {
        sink.skip("-", 0.0, "worst case infeasible");
        return rows;
    }
    const double gap = b.psi_star - b.psi_bar;

    switch (kind) {
    case VerifyKind::Unconstrained:
        break;
    case VerifyKind::WorstCase: {
        const double lambda = o.worst_case_lambda;
        const Solved s = solve(m, uniform(m, lambda), PenaltyScheme::RiskNeutral, o);
        for (std::size_t k = 0; k < K; ++k) {
            sink.check(indexed("P(D>c)", k), lambda, 0.0, s.stats.violation_prob[k], s.stats.violation_prob[k] == 0.0);
        }
        sink.check("E[R]", lambda, b.psi_bar, s.stats.expected_return,
                   std::abs(s.stats.expected_return - b.psi_bar) <= o.tolerance);
        const double v = s.table.initial_value();
        sink.check("value", lambda, b.psi_bar, v, std::abs(v - b.psi_bar) <= o.worst_case_value_tolerance);
        break;
    }
    case VerifyKind::TruncatedCost:
        for (double lambda : o.truncated_grid) {
            if (!(lambda > 0.0)) {
                sink.skip("trunc_above", lambda, "bound needs lambda > 0");
                continue;
            }
            const Solved s = solve(m, uniform(m, lambda), PenaltyScheme::RiskNeutral, o);
            const double bound = gap / lambda;
            for (std::size_t k = 0; k < K; ++k) {
                sink.check(indexed("trunc_above", k), lambda, bound, s.stats.trunc_above[k],
                           s.stats.trunc_above[k] <= bound + o.tolerance);
            }
        }
        break;
    case VerifyKind::RiskNeutral: {
        if (K != 1) {
            sink.skip("E[D]", 0.0, "single-constraint check; see multi_rn");
            break;
        }
        const double lrn = b.lambda_rn[0];
        if (!std::isfinite(lrn)) {
            sink.skip("E[D]", lrn, "lambda_rn is infinite");
            break;
        }
        std::vector<std::pair<double, bool>> grid;
        for (double mult : o.rn_multipliers) grid.emplace_back(mult * lrn, true);
        for (double lambda : o.rn_extra) grid.emplace_back(lambda, lambda >= lrn);
        for (auto [lambda, covered] : grid) {
            if (!covered && !o.assert_below_bound) {
                sink.skip("E[D]", lambda, "bound not applicable (lambda < lambda_rn = " + format_double(lrn) + ")");
                continue;
            }
            const Solved s = solve(m, {lambda}, PenaltyScheme::RiskNeutral, o);
            sink.check("E[D]", lambda, m.budgets[0], s.stats.expected_cost[0],
                       s.stats.expected_cost[0] <= m.budgets[0] + o.tolerance,
                       covered ? "" : "asserted below lambda_rn");
        }
        break;
    }
    case VerifyKind::VarBound:
        for (double alpha : o.alphas) {
            std::vector<double> lambdas;
            for (std::size_t k = 0; k < K; ++k) lambdas.push_back(gap / (alpha * m.budgets[k]));
            const Solved s = solve(m, lambdas, PenaltyScheme::RiskNeutral, o);
            for (std::size_t k = 0; k < K; ++k) {
                sink.check(indexed("P(D>c)", k), lambdas[k], alpha, s.stats.violation_prob[k],
                           s.stats.violation_prob[k] <= alpha + o.tolerance, "alpha = " + format_double(alpha));
            }
        }
        break;
    case VerifyKind::VarEquivalence:
        equivalence_rows(sink, f, b, PenaltyScheme::ValueAtRisk, o);
        break;
    case VerifyKind::Cvar:
        equivalence_rows(sink, f, b, PenaltyScheme::ConditionalValueAtRisk, o);
        break;
    case VerifyKind::MultiRiskNeutral: {
        if (K < 2) {
            sink.skip("E[D]", 0.0, "needs at least two constraints");
            break;
        }
        for (double mult : o.rn_multipliers) {
            std::vector<double> lambdas;
            bool finite = true;
            for (std::size_t k = 0; k < K; ++k) {
                lambdas.push_back(mult * b.lambda_rn[k]);
                finite = finite && std::isfinite(b.lambda_rn[k]);
            }
            if (!finite) {
                sink.skip("E[D]", 0.0, "some lambda_rn is infinite");
                break;
            }
            const Solved s = solve(m, lambdas, PenaltyScheme::RiskNeutral, o);
            for (std::size_t k = 0; k < K; ++k) {
                sink.check(indexed("E[D]", k), lambdas[k], m.budgets[k], s.stats.expected_cost[k],
                           s.stats.expected_cost[k] <= m.budgets[k] + o.tolerance);
            }
        }
        break;
    }
    }
    return rows;
}

std::vector<VerifyRow> verify_all(const std::vector<Fixture>& fixtures, const VerifyOptions& options) {
    std::vector<VerifyRow> rows;
    for (VerifyKind kind : kAllVerifyKinds) {
        for (const Fixture& f : fixtures) {
            auto part = verify(kind, f, options);
            rows.insert(rows.end(), part.begin(), part.end());
        }
    }
    return rows;
}

bool any_failed(const std::vector<VerifyRow>& rows) noexcept {
    for (const auto& r : rows) {
        if (r.status == RowStatus::Fail) return true;
    }
    return false;
}

std::string verify_csv_header() { return "kind,fixture,quantity,lambda,bound,measured,status,note\n"; }

std::string verify_csv_row(const VerifyRow& r) {
    std::string note = r.note;
    for (char& ch : note) {
        if (ch == ',' || ch == '\n') ch = ';';
    }
    std::ostringstream os;
    os << kind_name(r.kind) << ',' << r.fixture << ',' << r.quantity << ',' << format_double(r.lambda) << ','
       << format_double(r.bound) << ',' << format_double(r.measured) << ',' << status_name(r.status) << ',' << note
       << '\n';
    return os.str();
}

std::string verify_summary(const std::vector<VerifyRow>& rows) {
    std::map<std::string, std::array<int, 3>> counts;
    std::vector<std::string> order;
    for (const auto& r : rows) {
        const std::string k(kind_name(r.kind));
        if (!counts.count(k)) order.push_back(k);
        counts[k][static_cast<std::size_t>(r.status)]++;
    }
    std::ostringstream os;
    for (const auto& k : order) {
        const auto& c = counts[k];
        os << k << ": " << c[0] << " pass, " << c[1] << " fail, " << c[2] << " n/a\n";
    }
    return os.str();
}

} // namespace cmdp
