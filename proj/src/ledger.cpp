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

#include "cmdp/ledger.hpp"

#include <cmath>

#include "cmdp/numeric.hpp"

namespace cmdp {

namespace {
constexpr double kGridTolerance = 1e-9;
}

LedgerSpec LedgerSpec::for_model(const Cmdp& m, double quantum, bool collapse) {
    if (!(quantum > 0.0) || !std::isfinite(quantum)) {
        throw Error("ledger quantum must be positive, got " + format_double(quantum));
    }
    LedgerSpec spec;
    spec.quantum = quantum;
    spec.collapse = collapse;
    spec.budgets = m.budgets;
    for (double b : m.budgets) {
        spec.budget_units.push_back(static_cast<int>(std::floor(b / quantum + kGridTolerance)));
    }
    return spec;
}

int LedgerSpec::to_units(double cost) const {
    const double scaled = cost / quantum;
    const double rounded = std::round(scaled);
    if (std::abs(scaled - rounded) > kGridTolerance * std::max(1.0, std::abs(scaled))) {
        throw Error("cost " + format_double(cost) + " is not a multiple of the ledger quantum " +
                    format_double(quantum));
    }
    return static_cast<int>(rounded);
}

int LedgerSpec::advance(int k, int entry, int cost_units) const noexcept {
    if (entry == kViolated) return kViolated;
    const int next = entry + cost_units;
    if (collapse && next > budget_units[static_cast<std::size_t>(k)]) return kViolated;
    return next;
}

int LedgerSpec::entry_for(int k, double accumulated_cost) const {
    const double budget = budgets[static_cast<std::size_t>(k)];
    if (collapse && accumulated_cost > budget + kGridTolerance * std::max(1.0, std::abs(budget))) {
        return kViolated;
    }
    return static_cast<int>(std::llround(accumulated_cost / quantum));
}

std::size_t AugmentedSpace::KeyHash::operator()(const std::vector<int>& key) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (int v : key) {
        h ^= static_cast<std::size_t>(static_cast<unsigned int>(v));
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<int> AugmentedSpace::make_key(StateId s, std::span<const int> ledger) {
    std::vector<int> key;
    key.reserve(ledger.size() + 1);
    key.push_back(s);
    key.insert(key.end(), ledger.begin(), ledger.end());
    return key;
}

int AugmentedSpace::find(StateId s, std::span<const int> ledger) const {
    const auto it = index_.find(make_key(s, ledger));
    return it == index_.end() ? -1 : it->second;
}

int AugmentedSpace::intern(StateId s, std::span<const int> ledger) {
    auto key = make_key(s, ledger);
    const auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    const int id = static_cast<int>(states_.size());
    states_.push_back({s, std::vector<int>(ledger.begin(), ledger.end())});
    index_.emplace(std::move(key), id);
    return id;
}

int AugmentedSpace::find_for_costs(StateId s, std::span<const double> accumulated) const {
    std::vector<int> ledger(accumulated.size());
    for (std::size_t k = 0; k < accumulated.size(); ++k) {
        ledger[k] = spec_.entry_for(static_cast<int>(k), accumulated[k]);
    }
    return find(s, ledger);
}

} // namespace cmdp
