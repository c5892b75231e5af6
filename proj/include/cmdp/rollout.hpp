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

// Monte-Carlo policy evaluation on a sampling environment.

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "cmdp/environments.hpp"
#include "cmdp/learners.hpp"
#include "cmdp/policy.hpp"

namespace cmdp {

/// Chooses a_t from (s_t, t, ledger c_t, current cost d(s_t), available actions).
using ActionFn = std::function<ActionId(StateId, int, std::span<const double>, std::span<const double>,
                                        std::span<const ActionId>, std::mt19937_64&)>;

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean
};

struct RolloutStats {
    int episodes = 0;
    MeanSe ret;
    std::vector<MeanSe> cost;       // D^k
    std::vector<MeanSe> violation;  // 1[D^k > c_max^k]
    std::vector<MeanSe> excess;     // (D^k - c_max^k)^+
};

RolloutStats rollout(const Environment& env, const ActionFn& policy, int episodes, std::uint64_t seed);

/// Evaluation policy of a trained checkpoint.
ActionFn checkpoint_action_fn(const CheckpointPolicy& policy);

/// Tabular augmented policy; rows are looked up by raw accumulated cost and
/// sampled when stochastic.
ActionFn tabular_action_fn(const TabularPolicy& policy);

} // namespace cmdp
