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

// Brute-force trajectory enumeration. Works on the base model with raw
// floating-point cost sums and shares no code with the solver.

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "cmdp/cmdp.hpp"
#include "cmdp/extended_mdp.hpp"
#include "cmdp/penalty.hpp"
#include "cmdp/policy.hpp"

namespace cmdp {

struct OracleOptions {
    std::size_t cap = 1'000'000;       // maximum number of enumerated trajectories
    double violation_tolerance = 1e-9; // D counts as over budget only when D > c_max + tol
};

struct TrajectoryRecord {
    Trajectory trajectory;
    double probability = 0.0;
    double discounted_return = 0.0;
    std::vector<double> cost;  // D^k, including the terminal state
};

struct TrajectorySet {
    std::vector<TrajectoryRecord> items;
    double mass = 0.0;
};

/// Penalty configuration the oracle scores trajectories under.
struct OraclePenalties {
    std::vector<double> lambdas;
    std::vector<PenaltyScheme> schemes;
};

struct OracleStats {
    std::size_t count = 0;
    double mass = 0.0;
    double expected_return = 0.0;
    std::vector<double> expected_cost;   // E[D^k]
    std::vector<double> trunc_above;     // sum_{D > c_max} P D
    std::vector<double> trunc_below;     // sum_{D <= c_max} P D
    std::vector<double> violation_prob;  // P(D > c_max)
    std::vector<double> cvar_excess;     // E[(D - c_max)^+]
    /// E[R] minus lambda times the closed-form per-trajectory penalty
    /// (RN: D, VaR: T+1, CVaR: D - c_max, on violating trajectories).
    double penalized_objective = 0.0;
    /// E[R] minus the step-by-step penalties charged at t = 0..T.
    double stepwise_objective = 0.0;
    /// Range over violating trajectories of the summed VaR step counts
    /// (NaN when no trajectory violates).
    double var_constant_min = 0.0;
    double var_constant_max = 0.0;
};

using TrajectoryVisitor = std::function<void(const TrajectoryRecord&)>;

/// Depth-first enumeration of every positive-probability trajectory under
/// `policy`, invoking `visit` on each leaf. Throws when the count passes
/// options.cap or the policy has no row for a reached augmented state.
std::size_t stream_trajectories(const Cmdp& m, const TabularPolicy& policy, const TrajectoryVisitor& visit,
                                const OracleOptions& options = {});

TrajectorySet enumerate(const Cmdp& m, const TabularPolicy& policy, const OracleOptions& options = {});

/// Step penalty as charged along a raw trajectory (independent of penalty.hpp).
double oracle_step_penalty(PenaltyScheme scheme, double lambda, double accumulated, double step_cost, int t,
                           double budget, double tolerance);

OracleStats oracle_stats(const Cmdp& m, const TabularPolicy& policy, const OraclePenalties& penalties,
                         const OracleOptions& options = {});

/// Number of deterministic time-indexed augmented policies, or nullopt if it exceeds `cap`.
std::optional<std::size_t> deterministic_policy_count(const ExtendedMdp& e, std::size_t cap);

/// Visits every deterministic time-indexed policy on e's reachable layers.
void for_each_deterministic_policy(const ExtendedMdp& e, const std::function<void(const TabularPolicy&)>& visit);

} // namespace cmdp
