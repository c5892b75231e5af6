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

#include "cmdp/lambda_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmdp/cmdp.hpp"

namespace cmdp {

LambdaSchedule::LambdaSchedule(double lambda0, double floor, std::size_t window, double budget, double decay)
    : lambda_(lambda0), floor_(floor), window_(window), budget_(budget), decay_(decay) {
    if (!(lambda0 >= 0.0)) throw Error("lambda0 must be non-negative");
    if (!(floor >= 0.0)) throw Error("lambda floor must be non-negative");
    if (window == 0) throw Error("lambda schedule window must be positive");
    if (!(decay > 0.0 && decay <= 1.0)) throw Error("lambda decay must lie in (0, 1]");
    costs_.reserve(window);
}

bool LambdaSchedule::observe(double final_cost) {
    costs_.push_back(final_cost);
    if (costs_.size() < window_) return false;
    const double worst = *std::max_element(costs_.begin(), costs_.end());
    last_safe_ = worst < budget_;
    if (last_safe_ && decay_ * lambda_ > floor_) lambda_ = decay_ * lambda_;
    costs_.clear();
    return true;
}

double sample_penalty_amount(const SampleTransition& tr, double lambda, PenaltyScheme scheme, double budget) {
    LedgerCase c = LedgerCase::Safe;
    if (tr.ledger > budget) {
        c = LedgerCase::Violated;
    } else if (tr.next_ledger > budget) {
        c = LedgerCase::Crossing;
    }
    return penalty_for_case(scheme, c, lambda, tr.cost, tr.ledger, tr.t.value_or(0), budget);
}

double penalize_sample(const SampleTransition& tr, double lambda, PenaltyScheme scheme, double gamma, double budget) {
    if (!tr.t && (gamma < 1.0 || scheme == PenaltyScheme::ValueAtRisk)) {
        throw Error("penalize_sample: time index required for this scheme/discount");
    }
    const int t = tr.t.value_or(0);
    const double amount = sample_penalty_amount(tr, lambda, scheme, budget);
    if (amount == 0.0) return tr.reward;
    const double result = tr.reward - amount / std::pow(gamma, t);
    if (!std::isfinite(result)) throw Error("penalize_sample: penalized reward overflowed at t=" + std::to_string(t));
    return result;
}

double terminal_penalty_amount(PenaltyScheme scheme, double lambda, double ledger, double cost, int t_end,
                               int horizon, double budget) {
    double amount = penalty_amount(scheme, lambda, cost, ledger, t_end, budget);
    if (scheme == PenaltyScheme::ValueAtRisk && ledger + cost > budget && t_end < horizon) {
        amount += lambda * static_cast<double>(horizon - t_end);
    }
    return amount;
}

double linear_epsilon(int episode, int episodes, double start, double end, double fraction) {
    const double span = fraction * static_cast<double>(episodes);
    if (span <= 0.0) return end;
    const double f = std::min(1.0, static_cast<double>(episode) / span);
    return start + (end - start) * f;
}

} // namespace cmdp
