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

// Tabular safe learners on the cost-augmented state (s, c): penalized
// Q-learning with replay and target copies, and a softmax actor-critic with
// double reward/cost critics and constrained action selection.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cmdp/environments.hpp"
#include "cmdp/penalty.hpp"
#include "cmdp/tables.hpp"

namespace cmdp {

struct LearnerConfig {
    std::vector<PenaltyScheme> schemes{PenaltyScheme::RiskNeutral};
    std::vector<double> lambda0{1.0};
    double lambda_floor = 0.1;
    int window = 20;  // M
    double decay = 0.95;
    int episodes = 2000;
    double quantum = 0.1;
    bool log_wall_ms = false;

    // Q-learning
    double lr = 0.1;
    double eps_start = 1.0;
    double eps_end = 0.05;
    double eps_fraction = 0.5;
    std::size_t replay_capacity = 10000;  // N
    int target_period = 100;              // C
    int batch_size = 32;
    int update_every = 4;

    // actor-critic
    int n_step = 5;
    double rho = 0.995;
    double alpha_ent = 0.01;
    double lr_critic = 0.1;
    double lr_actor = 0.01;
    double w = 1.0;

    std::vector<std::string> validate(int num_constraints) const;
};

struct EpisodeLog {
    int episode = 0;
    double ret = 0.0;
    std::vector<double> final_cost;
    std::vector<double> lambda;  // in force during the episode
    double explore = 0.0;        // epsilon (Q-learning) or mean policy entropy (actor-critic)
    double wall_ms = 0.0;
};

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<EpisodeLog> log;
};

TrainResult safe_q_learning(const Environment& env, const LearnerConfig& cfg, std::uint64_t seed);
TrainResult safe_actor_critic(const Environment& env, const LearnerConfig& cfg, std::uint64_t seed);

/// Rows of the actor-critic tables at one augmented state.
struct CriticRows {
    std::span<const double> policy;  // pi(a|x), zero for unavailable actions
    std::span<const double> q1;
    std::span<const double> q2;
    std::vector<std::span<const double>> qd1;  // per constraint
    std::vector<std::span<const double>> qd2;
};

/// Actions a with max_i QD_i^k(x, a) + c_k - d_k <= c_max^k for every k.
std::vector<ActionId> feasible_actions(const CriticRows& rows, std::span<const ActionId> available,
                                       std::span<const double> c, std::span<const double> d,
                                       std::span<const double> budgets);

/// Among feasible actions, argmax of min_i Q_i(x, a) - alpha_ent log pi(a|x);
/// with no feasible action, argmin of the largest predicted budget overrun
/// max_k (max_i QD_i^k(x, a) + c_k - d_k - c_max^k). Lowest index wins ties.
ActionId constrained_action_select(const CriticRows& rows, std::span<const ActionId> available,
                                   std::span<const double> c, std::span<const double> d,
                                   std::span<const double> budgets, double alpha_ent);

/// Single-constraint form.
ActionId constrained_action_select(std::span<const double> policy, std::span<const double> q1,
                                   std::span<const double> q2, std::span<const double> qd1,
                                   std::span<const double> qd2, std::span<const ActionId> available, double c,
                                   double d, double budget, double alpha_ent);

/// Deterministic evaluation-time policy restored from a checkpoint: greedy
/// for Q-learning, constrained selection for actor-critic.
class CheckpointPolicy {
public:
    explicit CheckpointPolicy(Checkpoint cp);
    const Checkpoint& checkpoint() const noexcept { return cp_; }
    /// `ledger` is c_t (costs before the current state), `cost` is d(s_t).
    ActionId act(StateId s, std::span<const double> ledger, std::span<const double> cost,
                 std::span<const ActionId> available) const;
    /// One-hot greedy probability for Q-learning, the softmax pi for actor-critic.
    double action_probability(StateId s, std::span<const double> ledger, ActionId a) const;

private:
    Checkpoint cp_;
    LedgerBins bins_;
};

/// Softmax over the available actions of a logit row.
std::vector<double> softmax_row(std::span<const double> logits, std::span<const ActionId> available);

} // namespace cmdp
