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

// Test-only helpers. Nothing here calls the solver; values derived through
// these helpers are independent cross-checks.

#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "cmdp/cmdp.hpp"
#include "cmdp/extended_mdp.hpp"
#include "cmdp/policy.hpp"

namespace testing_support {

/// Plain expectation over base-model trajectories of a Markov base policy
/// (action chosen from the base state and time only). Returns E[f(path)] with
/// path = states s_0 .. s_T and rewards.
inline double expect_markov(const cmdp::Cmdp& m, const std::function<int(int s, int t)>& act,
                            const std::function<double(const std::vector<int>&, double)>& f) {
    double total = 0.0;
    std::function<void(std::vector<int>&, double, double, double, int)> rec =
        [&](std::vector<int>& path, double p, double ret, double disc, int t) {
            const int s = path.back();
            if (t == m.horizon || m.is_absorbing(s)) {
                total += p * f(path, ret);
                return;
            }
            const int a = act(s, t);
            for (const auto& o : m.outcomes(s, a)) {
                if (o.probability <= 0.0) continue;
                path.push_back(o.next);
                rec(path, p * o.probability, ret + disc * m.reward(s, a), disc * m.discount, t + 1);
                path.pop_back();
            }
        };
    std::vector<int> path{m.initial_state};
    rec(path, 1.0, 0.0, 1.0, 0);
    return total;
}

inline double path_cost(const cmdp::Cmdp& m, const std::vector<int>& path, int k = 0) {
    double d = 0.0;
    for (int s : path) d += m.cost(k, s);
    return d;
}

/// Deterministic policy with a uniformly random available action per (t, x).
inline cmdp::TabularPolicy random_deterministic(const cmdp::ExtendedMdp& e, std::mt19937_64& rng) {
    const cmdp::Cmdp& m = e.base();
    const int layers = std::max(m.horizon, 1);
    cmdp::TabularPolicy p(e.space_ptr(), m.num_actions, layers, cmdp::TabularPolicy::Kind::Deterministic);
    for (int t = 0; t < layers; ++t) {
        for (std::size_t x = 0; x < e.size(); ++x) {
            const auto acts = m.available_actions(e.space().at(static_cast<int>(x)).state);
            std::uniform_int_distribution<std::size_t> pick(0, acts.size() - 1);
            p.set_action(t, static_cast<int>(x), acts[pick(rng)]);
        }
    }
    return p;
}

} // namespace testing_support
