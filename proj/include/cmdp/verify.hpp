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

// Executable bound checks: every check solves the extended MDP, replays the
// greedy policy through the trajectory oracle and compares against the
// analytic bound.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cmdp/environments.hpp"
#include "cmdp/oracle.hpp"

namespace cmdp {

enum class VerifyKind {
    Unconstrained,   // lambda = 0 reproduces the unconstrained optimum
    WorstCase,       // very large lambda reproduces the worst-case optimum
    TruncatedCost,   // sum_{D > c_max} P D <= (psi* - psi_bar) / lambda
    RiskNeutral,     // lambda >= lambda_rn  =>  E[D] <= c_max
    VarBound,        // lambda = lambda_var(alpha)  =>  P(D > c_max) <= alpha
    VarEquivalence,  // VaR penalties: alpha^lambda bound, monotone, optimal
    Cvar,            // CVaR penalties: beta^lambda bound, monotone, optimal
    MultiRiskNeutral // lambda_k >= (psi* - psi_bar) / phi*_k  =>  E[D^k] <= c_max^k
};

inline constexpr VerifyKind kAllVerifyKinds[] = {
    VerifyKind::Unconstrained, VerifyKind::WorstCase,      VerifyKind::TruncatedCost, VerifyKind::RiskNeutral,
    VerifyKind::VarBound,      VerifyKind::VarEquivalence, VerifyKind::Cvar,          VerifyKind::MultiRiskNeutral};

std::string_view kind_name(VerifyKind kind) noexcept;
VerifyKind parse_kind(std::string_view name);

enum class RowStatus { Pass, Fail, NotApplicable };
std::string_view status_name(RowStatus s) noexcept;  // "pass", "fail", "n/a"

struct VerifyRow {
    VerifyKind kind = VerifyKind::Unconstrained;
    std::string fixture;
    std::string quantity;  // what `measured` is, e.g. "E[D]" or "P(D>c).0"
    double lambda = 0.0;
    double bound = 0.0;
    double measured = 0.0;
    RowStatus status = RowStatus::NotApplicable;
    std::string note;
};

struct VerifyOptions {
    double tolerance = 1e-9;
    double worst_case_lambda = 1e9;
    double worst_case_value_tolerance = 1e-6;
    std::vector<double> truncated_grid{0.1, 0.5, 1.0, 5.0, 25.0};
    std::vector<double> equivalence_grid{0.1, 1.0, 10.0, 100.0};
    std::vector<double> rn_multipliers{1.0, 2.0, 10.0};
    std::vector<double> rn_extra;  // absolute lambdas; those below lambda_rn are reported as n/a
    std::vector<double> alphas{0.05, 0.25, 0.5};
    bool assert_below_bound = false;  // also assert the RN bound for lambda < lambda_rn
    std::size_t policy_enumeration_cap = 10'000;
    OracleOptions oracle;
    ExtendedOptions extended;
};

std::vector<VerifyRow> verify(VerifyKind kind, const Fixture& fixture, const VerifyOptions& options = {});
std::vector<VerifyRow> verify_all(const std::vector<Fixture>& fixtures, const VerifyOptions& options = {});

bool any_failed(const std::vector<VerifyRow>& rows) noexcept;

std::string verify_csv_header();  // kind,fixture,quantity,lambda,bound,measured,status,note
std::string verify_csv_row(const VerifyRow& row);
/// Per-kind pass/fail/n/a counts, one line per kind.
std::string verify_summary(const std::vector<VerifyRow>& rows);

} // namespace cmdp
