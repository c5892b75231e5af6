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

// Reward penalties charged when an accumulated-cost ledger crosses its budget.
//
// Every scheme distinguishes three cases for a step taken at (s_t, c_t):
//   safe      c_t <= c_max and c_t + d(s_t) <= c_max   no penalty
//   crossing  c_t <= c_max and c_t + d(s_t) >  c_max   RN: c_t+d   VaR: t+1   CVaR: c_t+d-c_max
//   violated  c_t >  c_max                              RN: d       VaR: 1     CVaR: d
// The amount is multiplied by lambda and divided by gamma^t before being
// subtracted from r. Summed over a trajectory (with the 1/gamma^t undone by
// discounting) the penalties total lambda * D, lambda * (T+1) and
// lambda * (D - c_max) respectively for every over-budget trajectory.

#pragma once

#include <limits>
#include <span>
#include <string>
#include <string_view>

namespace cmdp {

enum class PenaltyScheme { RiskNeutral, ValueAtRisk, ConditionalValueAtRisk };

std::string_view scheme_name(PenaltyScheme scheme) noexcept;  // "rn", "var", "cvar"
PenaltyScheme parse_scheme(std::string_view name);

enum class LedgerCase { Safe, Crossing, Violated };

/// Accumulated cost to pass for a collapsed (already violated) ledger.
inline constexpr double kViolatedLedger = std::numeric_limits<double>::infinity();

LedgerCase classify(double accumulated, double step_cost, double budget) noexcept;

/// Amount for an already classified step (already multiplied by lambda).
double penalty_for_case(PenaltyScheme scheme, LedgerCase ledger_case, double lambda, double step_cost,
                        double accumulated, int t, double budget) noexcept;

/// Undiscounted penalty amount (already multiplied by lambda).
double penalty_amount(PenaltyScheme scheme, double lambda, double step_cost, double accumulated, int t,
                      double budget) noexcept;

/// Literal per-step penalized reward r - amount / gamma^t. Throws if the
/// division overflows; use penalty_amount in return space instead.
double penalized_reward(PenaltyScheme scheme, double lambda, double reward, double step_cost, double accumulated,
                        int t, double gamma, double budget);

struct ConstraintTerm {
    PenaltyScheme scheme = PenaltyScheme::RiskNeutral;
    double lambda = 0.0;
    double step_cost = 0.0;
    double accumulated = 0.0;
    double budget = 1.0;
};

/// Sum of lambda_k * delta^k over constraints, undiscounted.
double multi_penalty_amount(std::span<const ConstraintTerm> terms, int t) noexcept;

/// r - sum_k lambda_k * delta^k / gamma^t. Identical to penalized_reward for one term.
double multi_penalized_reward(double reward, std::span<const ConstraintTerm> terms, int t, double gamma);

} // namespace cmdp
