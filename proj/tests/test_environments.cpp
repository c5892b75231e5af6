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

#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "cmdp/environments.hpp"
#include "cmdp/solver.hpp"

using namespace cmdp;

TEST_CASE("grid presets") {
    const GridConfig large = large_grid();
    CHECK(large.width == 8);
    CHECK(large.height == 8);
    CHECK(large.horizon == 200);
    CHECK(large.budget == 2.0);
    CHECK(large.noise == 0.05);
    CHECK(large.goal_reward == 100.0);
    CHECK(large.step_reward == -1.0);
    CHECK(large.pit_uniform_lo == 1.0);
    CHECK(large.pit_uniform_hi == 1.5);
    CHECK(large.pits.size() == 18);
    CHECK(large.validate().empty());
    const GridConfig desk = desk_grid();
    CHECK(desk.pits.size() == 4);
    CHECK(ascii_map(desk) == ".....\n.....\n.....\n..X..\nGXXXS\n");
}

TEST_CASE("noise-free single step grid is a deterministic one-step MDP") {
    GridConfig g;
    g.width = 2;
    g.height = 1;
    g.pits = {};
    g.start = {1, 0};
    g.goal = {0, 0};
    g.noise = 0.0;
    g.horizon = 1;
    const Cmdp m = make_gridworld(g);
    CHECK(unconstrained_value(m) == g.goal_reward);
}

TEST_CASE("exact grid kernel: intended move, slips and walls") {
    const GridConfig g = desk_grid();
    const Cmdp m = make_gridworld(g);
    const int s = g.cell_index({2, 1});
    std::map<int, double> p;
    for (const auto& o : m.outcomes(s, 1)) p[g.cell_index(grid_state_cell(g, o.next))] += o.probability;
    CHECK(p[g.cell_index({3, 1})] == doctest::Approx(1.0 - 0.05 + 0.05 / 4));
    CHECK(p[g.cell_index({2, 0})] == doctest::Approx(0.05 / 4));
    CHECK(p[g.cell_index({2, 2})] == doctest::Approx(0.05 / 4));
    CHECK(p[g.cell_index({1, 1})] == doctest::Approx(0.05 / 4));
    // pushing into the top wall keeps the agent in place
    const int top = g.cell_index({2, 0});
    double stay = 0.0;
    for (const auto& o : m.outcomes(top, 0)) {
        if (o.next == top) stay += o.probability;
    }
    CHECK(stay == doctest::Approx(1.0 - 0.05 + 0.05 / 4));
    CHECK(m.is_absorbing(g.cell_index(g.goal)));
}

TEST_CASE("exact grid: pit variants carry the support costs") {
    const GridConfig g = desk_grid();
    const Cmdp m = make_gridworld(g);
    const int pit = g.cell_index({2, 3});
    const int above = g.cell_index({2, 2});
    std::map<double, double> cost_mass;
    for (const auto& o : m.outcomes(above, 2)) {
        if (grid_state_cell(g, o.next) == Cell{2, 3}) cost_mass[m.cost(0, o.next)] += o.probability;
    }
    const double enter = 1.0 - 0.05 + 0.05 / 4;
    CHECK(cost_mass.size() == 3);
    for (double c : {1.0, 1.25, 1.5}) CHECK(cost_mass[c] == doctest::Approx(enter / 3.0));
    CHECK(m.cost(0, pit) == 1.0);
}

TEST_CASE("sampled grid transitions converge to the exact kernel") {
    const GridConfig g = desk_grid();
    const Cmdp m = make_gridworld(g);
    const GridWorldEnvironment env(g);
    std::mt19937_64 rng(99);
    const int steps = 100000;
    double worst = 0.0;
    for (int s = 0; s < g.num_cells(); ++s) {
        if (g.cell_index(g.goal) == s) continue;
        for (int a = 0; a < kGridActions; ++a) {
            std::vector<double> exact(static_cast<std::size_t>(g.num_cells()), 0.0);
            for (const auto& o : m.outcomes(s, a)) {
                exact[static_cast<std::size_t>(g.cell_index(grid_state_cell(g, o.next)))] += o.probability;
            }
            std::vector<double> freq(exact.size(), 0.0);
            for (int i = 0; i < steps; ++i) freq[static_cast<std::size_t>(env.step(s, a, rng).next.state)] += 1.0;
            for (std::size_t c = 0; c < exact.size(); ++c) worst = std::max(worst, std::abs(freq[c] / steps - exact[c]));
        }
    }
    CHECK(worst <= 0.01);
}

TEST_CASE("sampled grid: pit costs are uniform draws, rewards are realized") {
    const GridConfig g = desk_grid();
    const GridWorldEnvironment env(g);
    std::mt19937_64 rng(3);
    const int above = g.cell_index({2, 2});
    double lo = 10.0, hi = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const StepResult r = env.step(above, 2, rng);
        CHECK(r.reward == -1.0);
        if (r.next.state == g.cell_index({2, 3})) {
            lo = std::min(lo, r.next.costs[0]);
            hi = std::max(hi, r.next.costs[0]);
        } else {
            CHECK(r.next.costs[0] == 0.0);
        }
    }
    CHECK(lo >= 1.0);
    CHECK(hi <= 1.5);
    CHECK(hi - lo > 0.4);
    const StepResult goal = env.step(g.cell_index({1, 4}), 3, rng);
    if (goal.next.state == g.cell_index(g.goal)) {
        CHECK(goal.reward == 100.0);
        CHECK(goal.next.absorbing);
    }
}

TEST_CASE("chains") {
    const Cmdp two = two_action_chain();
    CHECK(two.reward(0, 0) == 1.0);
    CHECK(two.reward(0, 1) == 2.0);
    CHECK(two.cost(0, 2) == 3.0);
    CHECK(two.budgets == std::vector<double>{2.0});
    const Cmdp multi = multi_chain();
    CHECK(multi.num_constraints() == 2);
    CHECK(unconstrained_value(degenerate_chain()) == worst_case_value(degenerate_chain()));
    CHECK(validate_cmdp(layered_random(7)).empty());
    CHECK(layered_random(7).rewards == layered_random(7).rewards);
    CHECK(layered_random(7).rewards != layered_random(8).rewards);
}
