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

// The cost-augmented MDP: states (s, ledger), deterministic ledger updates
// c' = c + d(s), and rewards penalized once a ledger exceeds its budget.

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "cmdp/cmdp.hpp"
#include "cmdp/ledger.hpp"
#include "cmdp/penalty.hpp"

namespace cmdp {

struct ExtendedOptions {
    double quantum = 0.25;
    bool collapse = true;
    std::size_t state_cap = 1'000'000;
};

struct AugmentedTransition {
    int next = 0;
    double probability = 0.0;
};

/**
 * Exact-mode extended MDP. Reachability is enumerated by time layer:
 * layer t (t = 0..T) holds every augmented state at which the process can be
 * at time t, and layer T+1 holds the terminal ledgers (s_T, c_T + d(s_T)),
 * whose entries equal the full trajectory cost D. Only states of layers
 * 0..T-1 carry outgoing transitions.
 *
 * The structure is shared; with_penalties() returns a view with different
 * lambdas/schemes without rebuilding it.
 */
class ExtendedMdp {
public:
    ExtendedMdp() = default;

    bool built() const noexcept { return structure_ != nullptr; }
    const Cmdp& base() const;
    const AugmentedSpace& space() const;
    std::shared_ptr<const AugmentedSpace> space_ptr() const;
    const ExtendedOptions& options() const;
    std::size_t size() const { return space().size(); }
    int horizon() const { return base().horizon; }
    int initial_state() const noexcept { return 0; }

    const std::vector<int>& layer(int t) const;
    bool in_layer(int t, int x) const;
    bool expanded(int x) const;
    std::span<const AugmentedTransition> successors(int x, ActionId a) const;

    const std::vector<double>& lambdas() const noexcept { return lambdas_; }
    const std::vector<PenaltyScheme>& schemes() const noexcept { return schemes_; }
    ExtendedMdp with_penalties(std::vector<double> lambdas, std::vector<PenaltyScheme> schemes) const;
    ExtendedMdp with_lambdas(std::vector<double> lambdas) const { return with_penalties(std::move(lambdas), schemes_); }

    LedgerCase ledger_case(int x, int k) const;
    /// Accumulated cost c of constraint k, or kViolatedLedger when collapsed.
    double accumulated(int x, int k) const;

    /// Sum over constraints of lambda_k * delta^k at time t, undiscounted.
    double step_penalty(int x, int t) const;
    /// Literal per-step reward r(s, a) - step_penalty / gamma^t.
    double penalized_reward(int x, ActionId a, int t) const;

    friend ExtendedMdp build_extended(const Cmdp& m, std::vector<double> lambdas, std::vector<PenaltyScheme> schemes,
                                      const ExtendedOptions& options);

private:
    struct Structure;
    std::shared_ptr<const Structure> structure_;
    std::vector<double> lambdas_;
    std::vector<PenaltyScheme> schemes_;
};

/// Throws on a lambda/scheme count mismatch, an invalid model, an off-grid
/// cost, or when the reachable set exceeds options.state_cap.
ExtendedMdp build_extended(const Cmdp& m, std::vector<double> lambdas, std::vector<PenaltyScheme> schemes,
                           const ExtendedOptions& options = {});

/// Convenience: one scheme shared by every constraint.
ExtendedMdp build_extended(const Cmdp& m, double lambda, PenaltyScheme scheme, const ExtendedOptions& options = {});

} // namespace cmdp
