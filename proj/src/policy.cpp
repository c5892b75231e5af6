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

#include "cmdp/policy.hpp"

#include <algorithm>
#include <cmath>

namespace cmdp {

TabularPolicy::TabularPolicy(std::shared_ptr<const AugmentedSpace> space, int num_actions, int layers, Kind kind)
    : space_(std::move(space)), num_actions_(num_actions), layers_(layers), kind_(kind) {
    if (!space_) throw Error("TabularPolicy: null augmented space");
    if (num_actions_ < 1 || layers_ < 1) throw Error("TabularPolicy: need at least one action and one layer");
    rows_ = space_->size();
    table_.assign(rows_ * static_cast<std::size_t>(layers_) * static_cast<std::size_t>(num_actions_), 0.0);
}

TabularPolicy TabularPolicy::uniform(std::shared_ptr<const AugmentedSpace> space, const Cmdp& m, int layers) {
    TabularPolicy p(std::move(space), m.num_actions, layers, Kind::Stochastic);
    for (int t = 0; t < layers; ++t) {
        for (std::size_t x = 0; x < p.rows_; ++x) {
            const auto actions = m.available_actions(p.space_->at(static_cast<int>(x)).state);
            auto r = p.mutable_row(t, static_cast<int>(x));
            for (ActionId a : actions) r[static_cast<std::size_t>(a)] = 1.0 / static_cast<double>(actions.size());
        }
    }
    return p;
}

TabularPolicy TabularPolicy::random(std::shared_ptr<const AugmentedSpace> space, const Cmdp& m, int layers,
                                    std::mt19937_64& rng) {
    TabularPolicy p(std::move(space), m.num_actions, layers, Kind::Stochastic);
    std::exponential_distribution<double> gamma1(1.0);
    for (int t = 0; t < layers; ++t) {
        for (std::size_t x = 0; x < p.rows_; ++x) {
            const auto actions = m.available_actions(p.space_->at(static_cast<int>(x)).state);
            auto r = p.mutable_row(t, static_cast<int>(x));
            double total = 0.0;
            for (ActionId a : actions) {
                r[static_cast<std::size_t>(a)] = gamma1(rng) + 1e-6;
                total += r[static_cast<std::size_t>(a)];
            }
            for (ActionId a : actions) r[static_cast<std::size_t>(a)] /= total;
        }
    }
    return p;
}

std::size_t TabularPolicy::offset(int t, int x) const {
    if (x < 0 || static_cast<std::size_t>(x) >= rows_) throw Error("TabularPolicy: augmented state out of range");
    if (t < 0) throw Error("TabularPolicy: negative time index");
    const int layer = std::min(t, layers_ - 1);
    return (static_cast<std::size_t>(layer) * rows_ + static_cast<std::size_t>(x)) *
           static_cast<std::size_t>(num_actions_);
}

std::span<const double> TabularPolicy::row(int t, int x) const {
    return {table_.data() + offset(t, x), static_cast<std::size_t>(num_actions_)};
}

std::span<double> TabularPolicy::mutable_row(int t, int x) {
    return {table_.data() + offset(t, x), static_cast<std::size_t>(num_actions_)};
}

void TabularPolicy::set_action(int t, int x, ActionId a) {
    auto r = mutable_row(t, x);
    std::fill(r.begin(), r.end(), 0.0);
    r[static_cast<std::size_t>(a)] = 1.0;
}

ActionId TabularPolicy::mode(int t, int x) const {
    const auto r = row(t, x);
    return static_cast<ActionId>(std::max_element(r.begin(), r.end()) - r.begin());
}

std::vector<Violation> TabularPolicy::validate(const Cmdp& m) const {
    std::vector<Violation> out;
    for (int t = 0; t < layers_; ++t) {
        for (std::size_t x = 0; x < rows_; ++x) {
            const auto r = row(t, static_cast<int>(x));
            const StateId s = space_->at(static_cast<int>(x)).state;
            const std::string where = "(t" + std::to_string(t) + ", x" + std::to_string(x) + ")";
            double sum = 0.0;
            int ones = 0;
            for (ActionId a = 0; a < num_actions_; ++a) {
                const double p = r[static_cast<std::size_t>(a)];
                if (p < 0.0) out.push_back({"policy", where, p, "negative probability"});
                if (p > 0.0 && !m.is_available(s, a)) out.push_back({"policy", where, p, "mass on unavailable action"});
                if (p == 1.0) ++ones;
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-12) out.push_back({"policy", where, sum, "row does not sum to 1"});
            if (kind_ == Kind::Deterministic && ones != 1) out.push_back({"policy", where, sum, "deterministic row is not one-hot"});
        }
    }
    return out;
}

} // namespace cmdp
