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

#pragma once

#include <memory>
#include <random>
#include <span>
#include <vector>

#include "cmdp/cmdp.hpp"
#include "cmdp/ledger.hpp"

namespace cmdp {

/**
 * Tabular policy over an augmented space. A policy has either one layer
 * (stationary) or one layer per decision epoch t = 0..T-1; each layer holds
 * one probability row per augmented state.
 */
class TabularPolicy {
public:
    enum class Kind { Deterministic, Stochastic };

    TabularPolicy(std::shared_ptr<const AugmentedSpace> space, int num_actions, int layers, Kind kind);

    /// Uniform over available actions at every augmented state.
    static TabularPolicy uniform(std::shared_ptr<const AugmentedSpace> space, const Cmdp& m, int layers);
    /// Independent Dirichlet(1) rows over available actions.
    static TabularPolicy random(std::shared_ptr<const AugmentedSpace> space, const Cmdp& m, int layers,
                                std::mt19937_64& rng);

    Kind kind() const noexcept { return kind_; }
    int layers() const noexcept { return layers_; }
    int num_actions() const noexcept { return num_actions_; }
    std::size_t num_states() const noexcept { return rows_; }
    const AugmentedSpace& space() const noexcept { return *space_; }
    const std::shared_ptr<const AugmentedSpace>& space_ptr() const noexcept { return space_; }

    std::span<const double> row(int t, int x) const;
    std::span<double> mutable_row(int t, int x);
    void set_action(int t, int x, ActionId a);
    double probability(int t, int x, ActionId a) const { return row(t, x)[static_cast<std::size_t>(a)]; }
    /// Most likely action, lowest index on ties.
    ActionId mode(int t, int x) const;

    /// Row-sum, non-negativity, one-hot and availability checks.
    std::vector<Violation> validate(const Cmdp& m) const;

private:
    std::size_t offset(int t, int x) const;

    std::shared_ptr<const AugmentedSpace> space_;
    int num_actions_;
    int layers_;
    Kind kind_;
    std::size_t rows_;
    std::vector<double> table_;
};

} // namespace cmdp
