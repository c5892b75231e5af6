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

// Dense tables over (state, quantized ledger, action), replay storage and
// the plain-text checkpoint format.
//
// Checkpoint grammar (one item per line, '#' starts a comment):
//   cmdp-forge-checkpoint 1
//   learner <safe_q|safe_ac>
//   states <S>
//   actions <A>
//   quantum <q>
//   budgets <b_0> ... <b_{K-1}>
//   lambdas <l_0> ... <l_{K-1}>
//   alpha_ent <a>
//   table <name> <bins> <rows>
//   <state> <ledger-bin> <v_0> ... <v_{A-1}>      (rows lines, zero rows omitted)
//   end
// Numbers use the shortest round-trip decimal form.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cmdp/cmdp.hpp"

namespace cmdp {

/// Maps accumulated costs to a single ledger-bin index. Constraint k uses
/// bins 0..u_k for c <= c_max^k (u_k = floor(c_max^k / q)) and bin u_k + 1
/// for everything above the budget.
class LedgerBins {
public:
    LedgerBins() = default;
    LedgerBins(std::vector<double> budgets, double quantum);

    double quantum() const noexcept { return quantum_; }
    const std::vector<double>& budgets() const noexcept { return budgets_; }
    int num_constraints() const noexcept { return static_cast<int>(budgets_.size()); }
    int count() const noexcept { return count_; }

    int bin(int k, double accumulated) const;
    int index(std::span<const double> accumulated) const;

private:
    std::vector<double> budgets_;
    double quantum_ = 0.1;
    std::vector<int> sizes_;
    int count_ = 1;
};

/// Dense action-value table; unseen entries read as 0.
class QTable {
public:
    QTable() = default;
    QTable(int num_states, int num_bins, int num_actions, double init = 0.0);

    int num_states() const noexcept { return states_; }
    int num_bins() const noexcept { return bins_; }
    int num_actions() const noexcept { return actions_; }
    std::span<const double> row(int s, int bin) const;
    std::span<double> mutable_row(int s, int bin);
    double at(int s, int bin, ActionId a) const { return row(s, bin)[static_cast<std::size_t>(a)]; }
    double& at(int s, int bin, ActionId a) { return mutable_row(s, bin)[static_cast<std::size_t>(a)]; }
    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }
    std::size_t flat(int s, int bin, ActionId a) const { return offset(s, bin) + static_cast<std::size_t>(a); }

private:
    std::size_t offset(int s, int bin) const;
    int states_ = 0;
    int bins_ = 0;
    int actions_ = 0;
    std::vector<double> data_;
};

/// Target copy of a table kept under Polyak averaging
/// target <- rho * target + (1 - rho) * online after every step. Entries are
/// brought up to date lazily; the result equals applying the average to the
/// whole table each step.
class PolyakTarget {
public:
    PolyakTarget() = default;
    PolyakTarget(const QTable& online, double rho);

    /// Advances the step counter by one averaging step.
    void tick() noexcept { ++now_; }
    /// Must be called before writing to online(s, bin, a).
    void sync(const QTable& online, int s, int bin, ActionId a);
    double value(const QTable& online, int s, int bin, ActionId a);

private:
    double rho_ = 0.995;
    long long now_ = 0;
    QTable target_;
    std::vector<long long> stamp_;
};

struct NamedTable {
    std::string name;
    QTable table;
};

struct Checkpoint {
    std::string learner;
    int num_states = 0;
    int num_actions = 0;
    double quantum = 0.1;
    std::vector<double> budgets;
    std::vector<double> lambdas;
    double alpha_ent = 0.0;
    std::vector<NamedTable> tables;

    const QTable& table(const std::string& name) const;
};

void write_checkpoint(std::ostream& out, const Checkpoint& cp);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Checkpoint& cp);
Checkpoint load_checkpoint(const std::string& path);

/// Fixed-capacity ring buffer with uniform sampling.
template <class T>
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw Error("replay buffer capacity must be positive");
        items_.reserve(capacity);
    }
    std::size_t size() const noexcept { return items_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    void push(T item) {
        if (items_.size() < capacity_) {
            items_.push_back(std::move(item));
        } else {
            items_[next_] = std::move(item);
        }
        next_ = (next_ + 1) % capacity_;
    }
    const T& sample(std::mt19937_64& rng) const {
        if (items_.empty()) throw Error("sampling from an empty replay buffer");
        return items_[std::uniform_int_distribution<std::size_t>(0, items_.size() - 1)(rng)];
    }
    const T& operator[](std::size_t i) const { return items_.at(i); }

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<T> items_;
};

} // namespace cmdp
