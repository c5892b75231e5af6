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

// Finite constrained MDP model, trajectories and their cost/reward accounting.

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmdp {

using StateId = int;
using ActionId = int;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Outcome {
    StateId next = 0;
    double probability = 0.0;
};

/**
 * A finite constrained MDP with K state-cost functions.
 *
 * Episodes visit s_0..s_T; actions (and rewards) exist for t = 0..T-1 only,
 * while the cumulative cost counts every visited state including s_T.
 * Flat arrays are indexed by `s * num_actions + a`.
 */
struct Cmdp {
    int num_states = 0;
    int num_actions = 0;
    StateId initial_state = 0;
    int horizon = 1;
    double discount = 1.0;

    std::vector<std::vector<Outcome>> transitions;  // [s*A + a]
    std::vector<double> rewards;                     // [s*A + a]
    std::vector<char> available;                     // [s*A + a], empty = all available
    std::vector<std::vector<double>> costs;          // [k][s]
    std::vector<double> budgets;                     // [k]
    std::vector<char> absorbing;                     // [s], empty = none

    std::size_t index(StateId s, ActionId a) const noexcept {
        return static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions) +
               static_cast<std::size_t>(a);
    }
    int num_constraints() const noexcept { return static_cast<int>(costs.size()); }

    const std::vector<Outcome>& outcomes(StateId s, ActionId a) const { return transitions[index(s, a)]; }
    double reward(StateId s, ActionId a) const { return rewards[index(s, a)]; }
    double cost(int k, StateId s) const { return costs[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)]; }
    bool is_available(StateId s, ActionId a) const {
        return available.empty() || available[index(s, a)] != 0;
    }
    bool is_absorbing(StateId s) const {
        return !absorbing.empty() && absorbing[static_cast<std::size_t>(s)] != 0;
    }
    std::vector<ActionId> available_actions(StateId s) const;

    /// Allocates dense storage for the given shape; every action is available
    /// and every transition list is empty.
    static Cmdp with_shape(int num_states, int num_actions, int num_constraints);
};

/// One failed invariant. `where` names the offending index, e.g. "(s0, a0)".
struct Violation {
    std::string field;
    std::string where;
    double measured = 0.0;
    std::string message;
};

std::vector<Violation> validate_cmdp(const Cmdp& m);
std::string describe(const std::vector<Violation>& violations);

/// Throws Error listing every violation if the model is malformed.
void require_valid(const Cmdp& m);

struct Trajectory {
    std::vector<StateId> states;    // s_0 .. s_T
    std::vector<ActionId> actions;  // a_0 .. a_{T-1}
    std::optional<double> probability;
    // Sampled mode only: realized per-step rewards (size T) and per-constraint
    // per-state costs (K x (T+1)). Empty means "read them from the model".
    std::vector<double> realized_rewards;
    std::vector<std::vector<double>> realized_costs;
};

/// Sum of d^k over every visited state, including the terminal one.
double trajectory_cost(const Trajectory& tau, const Cmdp& m, int k);

/// Sum over t = 0..T-1 of gamma^t r(s_t, a_t).
double discounted_return(const Trajectory& tau, const Cmdp& m);

} // namespace cmdp
