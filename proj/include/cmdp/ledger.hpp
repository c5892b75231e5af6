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

// Accumulated-cost ledgers and the indexed augmented state space (s, ledger).

#pragma once

#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

#include "cmdp/cmdp.hpp"

namespace cmdp {

/// Ledger entry meaning "accumulated cost already exceeds the budget".
inline constexpr int kViolated = -1;

/**
 * Integer ledger arithmetic. Accumulated cost is stored as a count of
 * `quantum`-sized units so augmented states hash exactly. With `collapse`
 * set, every entry above the budget merges into kViolated.
 */
struct LedgerSpec {
    double quantum = 0.25;
    bool collapse = true;
    std::vector<double> budgets;
    std::vector<int> budget_units;  // largest unit count still <= budget

    static LedgerSpec for_model(const Cmdp& m, double quantum, bool collapse);

    int num_constraints() const noexcept { return static_cast<int>(budgets.size()); }

    /// Converts an on-grid cost to units; throws if it is not a multiple of the quantum.
    int to_units(double cost) const;

    bool under(int k, int entry) const noexcept {
        return entry != kViolated && entry <= budget_units[static_cast<std::size_t>(k)];
    }
    double accumulated(int entry) const noexcept { return entry * quantum; }

    /// Ledger rule c' = c + d(s), followed by collapse when enabled.
    int advance(int k, int entry, int cost_units) const noexcept;

    /// Collapsed key for a raw accumulated cost (used by callers that track
    /// costs in floating point, e.g. trajectory enumeration).
    int entry_for(int k, double accumulated_cost) const;
};

struct AugmentedState {
    StateId state = 0;
    std::vector<int> ledger;  // one entry per constraint
};

/// Interned set of augmented states with dense indices.
class AugmentedSpace {
public:
    explicit AugmentedSpace(LedgerSpec spec) : spec_(std::move(spec)) {}

    const LedgerSpec& ledger() const noexcept { return spec_; }
    std::size_t size() const noexcept { return states_.size(); }
    const AugmentedState& at(int index) const { return states_.at(static_cast<std::size_t>(index)); }

    /// Index of (s, ledger) or -1.
    int find(StateId s, std::span<const int> ledger) const;
    /// Index of (s, ledger), inserting it if new.
    int intern(StateId s, std::span<const int> ledger);

    /// Index for raw accumulated costs per constraint, or -1 if unknown.
    int find_for_costs(StateId s, std::span<const double> accumulated) const;

private:
    struct KeyHash {
        std::size_t operator()(const std::vector<int>& key) const noexcept;
    };
    static std::vector<int> make_key(StateId s, std::span<const int> ledger);

    LedgerSpec spec_;
    std::vector<AugmentedState> states_;
    std::unordered_map<std::vector<int>, int, KeyHash> index_;
};

} // namespace cmdp
