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

// Penalty bookkeeping shared by the sampled learners: the dynamic lambda
// schedule, per-sample penalized rewards and the exploration schedule.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cmdp/penalty.hpp"

namespace cmdp {

/**
 * Every `window` episodes: if the largest final cost seen in the window is
 * below the budget and decay * lambda stays above the floor, lambda is
 * multiplied by decay. The window is emptied after each evaluation.
 */
class LambdaSchedule {
public:
    LambdaSchedule(double lambda0, double floor, std::size_t window, double budget, double decay = 0.95);

    double lambda() const noexcept { return lambda_; }
    double floor() const noexcept { return floor_; }
    std::size_t pending() const noexcept { return costs_.size(); }
    /// Outcome of the most recent window evaluation; true before the first one.
    bool last_window_safe() const noexcept { return last_safe_; }

    /// Records one episode's final cost; returns true when a window closed.
    bool observe(double final_cost);

private:
    double lambda_;
    double floor_;
    std::size_t window_;
    double budget_;
    double decay_;
    bool last_safe_ = true;
    std::vector<double> costs_;
};

struct SampleTransition {
    double reward = 0.0;
    double cost = 0.0;         // d(s_j)
    double ledger = 0.0;       // c_j
    double next_ledger = 0.0;  // c_{j+1} = c_j + d(s_j)
    std::optional<int> t;      // required when gamma < 1 or for the VaR scheme
};

/// Undiscounted amount lambda * delta for one constraint at time tr.t (0 if absent).
double sample_penalty_amount(const SampleTransition& tr, double lambda, PenaltyScheme scheme, double budget);

/// r~_j for one constraint: post-violation when c_j > c_max, crossing when
/// c_{j+1} > c_max, otherwise r unchanged.
double penalize_sample(const SampleTransition& tr, double lambda, PenaltyScheme scheme, double gamma, double budget);

/// Undiscounted penalty charged at the final state of an episode that ends at
/// time t_end <= horizon: the step penalty at t_end plus, for the VaR scheme
/// on a violated ledger, lambda for each of the remaining steps up to the horizon.
double terminal_penalty_amount(PenaltyScheme scheme, double lambda, double ledger, double cost, int t_end,
                               int horizon, double budget);

/// Linear decay from `start` to `end` over the first `fraction` of `episodes`.
double linear_epsilon(int episode, int episodes, double start, double end, double fraction);

} // namespace cmdp
