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

#include "cmdp/penalty.hpp"

#include <cmath>

#include "cmdp/cmdp.hpp"

namespace cmdp {

std::string_view scheme_name(PenaltyScheme scheme) noexcept {
    switch (scheme) {
    case PenaltyScheme::RiskNeutral: return "rn";
    case PenaltyScheme::ValueAtRisk: return "var";
    case PenaltyScheme::ConditionalValueAtRisk: return "cvar";
    }
    return "rn";
}

PenaltyScheme parse_scheme(std::string_view name) {
    if (name == "rn") return PenaltyScheme::RiskNeutral;
    if (name == "var") return PenaltyScheme::ValueAtRisk;
    if (name == "cvar") return PenaltyScheme::ConditionalValueAtRisk;
    throw Error("unknown penalty scheme '" + std::string(name) + "' (expected rn, var or cvar)");
}

LedgerCase classify(double accumulated, double step_cost, double budget) noexcept {
    if (accumulated > budget) return LedgerCase::Violated;
    if (accumulated + step_cost > budget) return LedgerCase::Crossing;
    return LedgerCase::Safe;
}

double penalty_amount(PenaltyScheme scheme, double lambda, double step_cost, double accumulated, int t,
                      double budget) noexcept {
    return penalty_for_case(scheme, classify(accumulated, step_cost, budget), lambda, step_cost, accumulated, t,
                            budget);
}

double penalty_for_case(PenaltyScheme scheme, LedgerCase ledger_case, double lambda, double step_cost,
                        double accumulated, int t, double budget) noexcept {
    switch (ledger_case) {
    case LedgerCase::Safe:
        return 0.0;
    case LedgerCase::Crossing:
        switch (scheme) {
        case PenaltyScheme::RiskNeutral: return lambda * (accumulated + step_cost);
        case PenaltyScheme::ValueAtRisk: return lambda * static_cast<double>(t + 1);
        case PenaltyScheme::ConditionalValueAtRisk: return lambda * (accumulated + step_cost - budget);
        }
        break;
    case LedgerCase::Violated:
        switch (scheme) {
        case PenaltyScheme::RiskNeutral: return lambda * step_cost;
        case PenaltyScheme::ValueAtRisk: return lambda;
        case PenaltyScheme::ConditionalValueAtRisk: return lambda * step_cost;
        }
        break;
    }
    return 0.0;
}

namespace {

double apply_discounted(double reward, double amount, int t, double gamma) {
    if (amount == 0.0) return reward;
    const double scale = std::pow(gamma, t);
    const double result = reward - amount / scale;
    if (!std::isfinite(result)) {
        throw Error("penalized reward overflowed at t=" + std::to_string(t) +
                    " (gamma^t underflow); use the undiscounted penalty mode");
    }
    return result;
}

} // namespace

double penalized_reward(PenaltyScheme scheme, double lambda, double reward, double step_cost, double accumulated,
                        int t, double gamma, double budget) {
    return apply_discounted(reward, penalty_amount(scheme, lambda, step_cost, accumulated, t, budget), t, gamma);
}

double multi_penalty_amount(std::span<const ConstraintTerm> terms, int t) noexcept {
    double total = 0.0;
    for (const auto& term : terms) {
        total += penalty_amount(term.scheme, term.lambda, term.step_cost, term.accumulated, t, term.budget);
    }
    return total;
}

double multi_penalized_reward(double reward, std::span<const ConstraintTerm> terms, int t, double gamma) {
    return apply_discounted(reward, multi_penalty_amount(terms, t), t, gamma);
}

} // namespace cmdp
