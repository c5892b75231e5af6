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

// Concrete instances: the stochastic GridWorld in exact and sampled form,
// small chain MDPs, and the fixture pack used by the verification suites.

#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "cmdp/cmdp.hpp"
#include "cmdp/extended_mdp.hpp"

namespace cmdp {

// ---------------------------------------------------------------- GridWorld

/// Column x grows to the right, row y grows downward; (0, 0) is the top-left cell.
struct Cell {
    int x = 0;
    int y = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Actions: 0 up, 1 right, 2 down, 3 left.
inline constexpr int kGridActions = 4;

struct GridConfig {
    int width = 5;
    int height = 5;
    std::vector<Cell> pits;
    Cell start{4, 4};
    Cell goal{0, 4};
    double noise = 0.05;  // probability a uniformly random action replaces the chosen one
    double step_reward = -1.0;
    double goal_reward = 100.0;
    std::vector<double> pit_support{1.0, 1.25, 1.5};  // exact mode, equal weights unless set
    std::vector<double> pit_weights;
    double pit_uniform_lo = 1.0;  // sampled mode
    double pit_uniform_hi = 1.5;
    int horizon = 50;
    double discount = 1.0;
    double budget = 2.0;

    std::vector<Violation> validate() const;
    int num_cells() const noexcept { return width * height; }
    int cell_index(Cell c) const noexcept { return c.y * width + c.x; }
    Cell cell_at(int index) const noexcept { return {index % width, index / width}; }
    bool is_pit(Cell c) const;
};

/// 5x5, T = 50, four pits. Shortest route (4 moves) crosses three pits, a
/// 6-move route crosses one, an 8-move route crosses none.
GridConfig desk_grid();
/// 8x8, T = 200, 18 pits.
GridConfig large_grid();
/// 3x3, one pit on the 2-move route, c_max = 1.
GridConfig small_grid(double noise);

/// Exact-mode GridWorld. Cell c has state index cell_index(c); every pit
/// additionally owns one extra state per further support value, so entering a
/// pit draws its cost variant with the support weights. The reward r(s, a) is
/// the expected one-step reward. The goal is absorbing.
Cmdp make_gridworld(const GridConfig& cfg);

/// Cell of an exact-mode state index.
Cell grid_state_cell(const GridConfig& cfg, StateId s);

/// ASCII rendering: S start, G goal, X pit, . free.
std::string ascii_map(const GridConfig& cfg);

// ------------------------------------------------------------- Environments

struct Observation {
    StateId state = 0;
    std::vector<double> costs;  // realized d^k(state)
    bool absorbing = false;
};

struct StepResult {
    Observation next;
    double reward = 0.0;
};

/// Sampling interface consumed by the learners and Monte-Carlo evaluation.
class Environment {
public:
    virtual ~Environment() = default;
    virtual int num_states() const = 0;
    virtual int num_actions() const = 0;
    virtual int num_constraints() const = 0;
    virtual int horizon() const = 0;
    virtual double discount() const = 0;
    virtual const std::vector<double>& budgets() const = 0;
    virtual std::vector<ActionId> available_actions(StateId s) const = 0;
    virtual Observation reset(std::mt19937_64& rng) const = 0;
    virtual StepResult step(StateId s, ActionId a, std::mt19937_64& rng) const = 0;
};

/// Samples a finite Cmdp's kernel; costs and rewards are the model's.
class CmdpEnvironment final : public Environment {
public:
    explicit CmdpEnvironment(Cmdp m);
    const Cmdp& model() const noexcept { return m_; }

    int num_states() const override { return m_.num_states; }
    int num_actions() const override { return m_.num_actions; }
    int num_constraints() const override { return m_.num_constraints(); }
    int horizon() const override { return m_.horizon; }
    double discount() const override { return m_.discount; }
    const std::vector<double>& budgets() const override { return m_.budgets; }
    std::vector<ActionId> available_actions(StateId s) const override { return m_.available_actions(s); }
    Observation reset(std::mt19937_64& rng) const override;
    StepResult step(StateId s, ActionId a, std::mt19937_64& rng) const override;

private:
    Observation observe(StateId s) const;
    Cmdp m_;
};

/// Sampled-mode GridWorld: states are cells, pit cost is drawn from
/// uniform[pit_uniform_lo, pit_uniform_hi] at every step spent in a pit, and
/// rewards are realized (goal_reward on entering the goal, step_reward otherwise).
class GridWorldEnvironment final : public Environment {
public:
    explicit GridWorldEnvironment(GridConfig cfg);
    const GridConfig& config() const noexcept { return cfg_; }

    int num_states() const override { return cfg_.num_cells(); }
    int num_actions() const override { return kGridActions; }
    int num_constraints() const override { return 1; }
    int horizon() const override { return cfg_.horizon; }
    double discount() const override { return cfg_.discount; }
    const std::vector<double>& budgets() const override { return budgets_; }
    std::vector<ActionId> available_actions(StateId) const override { return {0, 1, 2, 3}; }
    Observation reset(std::mt19937_64& rng) const override;
    StepResult step(StateId s, ActionId a, std::mt19937_64& rng) const override;

private:
    Observation observe(int cell, std::mt19937_64& rng) const;
    GridConfig cfg_;
    std::vector<char> pit_;
    std::vector<double> budgets_;
};

// -------------------------------------------------------------------- Chains

struct ChainOutcome {
    double probability = 1.0;
    std::vector<double> costs;  // d^k of the state reached
};

struct ChainBranch {
    double reward = 0.0;
    std::vector<ChainOutcome> outcomes;
};

/// One decision at s0 (cost 0); branch i is action i and leads to one leaf
/// state per outcome. For horizon > 1 every leaf moves on to a zero-cost
/// absorbing sink.
struct ChainSpec {
    std::vector<ChainBranch> branches;
    std::vector<double> budgets{2.0};
    int horizon = 1;
    double discount = 1.0;
};

Cmdp make_chain(const ChainSpec& spec);

/// safe: r = 1, d = 0; risky: r = 2, d = 3; c_max = 2, T = 1.
Cmdp two_action_chain();
/// two_action_chain plus a third action with r = 1.5, d = 2.
Cmdp three_action_chain();
/// Two decision stages with a stochastic first stage, T = 2.
Cmdp lottery_chain();
/// K = 2 chain: branches with costs (3, 0), (0, 3), (0, 0) and a stochastic branch; budgets (2, 2).
Cmdp multi_chain();
/// A single action with zero cost.
Cmdp degenerate_chain();
/// Layered random CMDP with costs on the 0.25 grid and a zero-cost path.
Cmdp layered_random(std::uint64_t seed, int layers = 4, int width = 3, int actions = 2);

struct Fixture {
    std::string name;
    Cmdp model;
    bool worst_case_feasible = true;
};

/// Exact-mode instances used by the verification suites.
std::vector<Fixture> fixture_pack();
/// Looks up a fixture by name (throws on unknown names).
Fixture fixture_by_name(const std::string& name);

} // namespace cmdp
