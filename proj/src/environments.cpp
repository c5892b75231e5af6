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

#include "cmdp/environments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "cmdp/numeric.hpp"

namespace cmdp {

namespace {

constexpr int kDx[kGridActions] = {0, 1, 0, -1};
constexpr int kDy[kGridActions] = {-1, 0, 1, 0};

bool inside(const GridConfig& cfg, Cell c) {
    return c.x >= 0 && c.y >= 0 && c.x < cfg.width && c.y < cfg.height;
}

Cell move(const GridConfig& cfg, Cell c, int a) {
    const Cell n{c.x + kDx[a], c.y + kDy[a]};
    return inside(cfg, n) ? n : c;
}

std::string cell_name(Cell c) {
    return "(" + std::to_string(c.x) + ", " + std::to_string(c.y) + ")";
}

std::vector<double> support_weights(const GridConfig& cfg) {
    if (!cfg.pit_weights.empty()) return cfg.pit_weights;
    return std::vector<double>(cfg.pit_support.size(), 1.0 / static_cast<double>(cfg.pit_support.size()));
}

} // namespace

bool GridConfig::is_pit(Cell c) const {
    return std::find(pits.begin(), pits.end(), c) != pits.end();
}

std::vector<Violation> GridConfig::validate() const {
    std::vector<Violation> out;
    auto report = [&](std::string field, std::string where, double measured, std::string message) {
        out.push_back({std::move(field), std::move(where), measured, std::move(message)});
    };
    if (width < 1 || height < 1) {
        report("env.width", "grid", width * height, "grid must have at least one cell");
        return out;
    }
    if (!inside(*this, start)) report("env.start", cell_name(start), 0, "start outside grid");
    if (!inside(*this, goal)) report("env.goal", cell_name(goal), 0, "goal outside grid");
    if (start == goal) report("env.start", cell_name(start), 0, "start equals goal");
    for (std::size_t i = 0; i < pits.size(); ++i) {
        if (!inside(*this, pits[i])) report("env.pits", cell_name(pits[i]), static_cast<double>(i), "pit outside grid");
        if (pits[i] == start || pits[i] == goal) report("env.pits", cell_name(pits[i]), static_cast<double>(i), "pit on start or goal");
        for (std::size_t j = 0; j < i; ++j) {
            if (pits[i] == pits[j]) report("env.pits", cell_name(pits[i]), static_cast<double>(i), "duplicate pit");
        }
    }
    if (!(noise >= 0.0 && noise < 1.0)) report("env.noise", "noise", noise, "noise must lie in [0, 1)");
    if (pit_support.empty()) report("env.pit_support", "support", 0, "pit cost support is empty");
    for (std::size_t i = 0; i < pit_support.size(); ++i) {
        if (!(pit_support[i] >= 0.0)) report("env.pit_support", std::to_string(i), pit_support[i], "pit cost must be non-negative");
    }
    if (!pit_weights.empty()) {
        if (pit_weights.size() != pit_support.size()) {
            report("env.pit_weights", "size", static_cast<double>(pit_weights.size()), "one weight per support value required");
        } else {
            double sum = 0.0;
            for (double w : pit_weights) {
                if (!(w > 0.0)) report("env.pit_weights", "weight", w, "weights must be positive");
                sum += w;
            }
            if (std::abs(sum - 1.0) > 1e-12) report("env.pit_weights", "sum", sum, "weights must sum to 1");
        }
    }
    if (!(pit_uniform_lo >= 0.0 && pit_uniform_hi >= pit_uniform_lo)) {
        report("env.pit_uniform", "interval", pit_uniform_lo, "need 0 <= lo <= hi");
    }
    if (horizon < 1) report("env.horizon", "horizon", horizon, "horizon must be at least 1");
    if (!(discount > 0.0 && discount <= 1.0)) report("env.discount", "discount", discount, "discount must lie in (0, 1]");
    if (!(budget > 0.0)) report("env.budget", "budget", budget, "budget must be positive");
    return out;
}

GridConfig desk_grid() {
    GridConfig cfg;
    cfg.width = 5;
    cfg.height = 5;
    cfg.start = {4, 4};
    cfg.goal = {0, 4};
    cfg.pits = {{1, 4}, {2, 4}, {3, 4}, {2, 3}};
    cfg.horizon = 50;
    cfg.budget = 2.0;
    return cfg;
}

GridConfig large_grid() {
    GridConfig cfg;
    cfg.width = 8;
    cfg.height = 8;
    cfg.start = {7, 7};
    cfg.goal = {0, 7};
    cfg.pits = {{2, 7}, {3, 7}, {4, 7}, {5, 7},                  //
                {1, 6}, {2, 6}, {3, 6}, {4, 6}, {5, 6}, {6, 6},  //
                {2, 5}, {3, 5}, {4, 5}, {5, 5},                  //
                {3, 4}, {4, 4},                                  //
                {2, 3}, {5, 3}};
    cfg.horizon = 200;
    cfg.budget = 2.0;
    return cfg;
}

GridConfig small_grid(double noise) {
    GridConfig cfg;
    cfg.width = 3;
    cfg.height = 3;
    cfg.start = {2, 2};
    cfg.goal = {0, 2};
    cfg.pits = {{1, 2}};
    cfg.noise = noise;
    cfg.horizon = 6;
    cfg.budget = 1.0;
    return cfg;
}

Cell grid_state_cell(const GridConfig& cfg, StateId s) {
    const int cells = cfg.num_cells();
    if (s < cells) return cfg.cell_at(s);
    const int extra = static_cast<int>(cfg.pit_support.size()) - 1;
    return cfg.pits.at(static_cast<std::size_t>((s - cells) / extra));
}

Cmdp make_gridworld(const GridConfig& cfg) {
    const auto problems = cfg.validate();
    if (!problems.empty()) throw Error("invalid grid config: " + describe(problems));

    const int cells = cfg.num_cells();
    const int variants = static_cast<int>(cfg.pit_support.size());
    const int pits = static_cast<int>(cfg.pits.size());
    const int S = cells + pits * (variants - 1);
    const auto weights = support_weights(cfg);

    // variant_state[cell][j]: state index of cost variant j.
    std::vector<std::vector<StateId>> variant_state(static_cast<std::size_t>(cells));
    for (int c = 0; c < cells; ++c) variant_state[static_cast<std::size_t>(c)] = {c};
    for (int i = 0; i < pits; ++i) {
        auto& vs = variant_state[static_cast<std::size_t>(cfg.cell_index(cfg.pits[static_cast<std::size_t>(i)]))];
        for (int j = 1; j < variants; ++j) vs.push_back(cells + i * (variants - 1) + (j - 1));
    }

    Cmdp m = Cmdp::with_shape(S, kGridActions, 1);
    m.initial_state = cfg.cell_index(cfg.start);
    m.horizon = cfg.horizon;
    m.discount = cfg.discount;
    m.budgets = {cfg.budget};
    m.absorbing.assign(static_cast<std::size_t>(S), 0);
    const int goal = cfg.cell_index(cfg.goal);
    m.absorbing[static_cast<std::size_t>(goal)] = 1;

    for (int c = 0; c < cells; ++c) {
        const Cell cell = cfg.cell_at(c);
        if (cfg.is_pit(cell)) {
            const auto& vs = variant_state[static_cast<std::size_t>(c)];
            for (int j = 0; j < variants; ++j) m.costs[0][static_cast<std::size_t>(vs[static_cast<std::size_t>(j)])] = cfg.pit_support[static_cast<std::size_t>(j)];
        }
    }

    for (StateId s = 0; s < S; ++s) {
        const Cell cell = grid_state_cell(cfg, s);
        for (int a = 0; a < kGridActions; ++a) {
            auto& out = m.transitions[m.index(s, a)];
            if (s == goal) {
                out = {{goal, 1.0}};
                continue;
            }
            std::map<StateId, double> merged;
            double reward = 0.0;
            for (int b = 0; b < kGridActions; ++b) {
                const double pb = (b == a ? 1.0 - cfg.noise : 0.0) + cfg.noise / kGridActions;
                if (pb == 0.0) continue;
                const Cell next = move(cfg, cell, b);
                const int nc = cfg.cell_index(next);
                reward += pb * (nc == goal ? cfg.goal_reward : cfg.step_reward);
                const auto& vs = variant_state[static_cast<std::size_t>(nc)];
                if (vs.size() == 1) {
                    merged[vs[0]] += pb;
                } else {
                    for (std::size_t j = 0; j < vs.size(); ++j) merged[vs[j]] += pb * weights[j];
                }
            }
            for (const auto& [next, p] : merged) out.push_back({next, p});
            m.rewards[m.index(s, a)] = reward;
        }
    }
    require_valid(m);
    return m;
}

std::string ascii_map(const GridConfig& cfg) {
    std::ostringstream os;
    for (int y = 0; y < cfg.height; ++y) {
        for (int x = 0; x < cfg.width; ++x) {
            const Cell c{x, y};
            os << (c == cfg.start ? 'S' : c == cfg.goal ? 'G' : cfg.is_pit(c) ? 'X' : '.');
        }
        os << '\n';
    }
    return os.str();
}

// ------------------------------------------------------------- Environments

CmdpEnvironment::CmdpEnvironment(Cmdp m) : m_(std::move(m)) { require_valid(m_); }

Observation CmdpEnvironment::observe(StateId s) const {
    Observation o;
    o.state = s;
    o.absorbing = m_.is_absorbing(s);
    for (int k = 0; k < m_.num_constraints(); ++k) o.costs.push_back(m_.cost(k, s));
    return o;
}

Observation CmdpEnvironment::reset(std::mt19937_64&) const { return observe(m_.initial_state); }

StepResult CmdpEnvironment::step(StateId s, ActionId a, std::mt19937_64& rng) const {
    if (!m_.is_available(s, a)) throw Error("action " + std::to_string(a) + " unavailable in state " + std::to_string(s));
    const auto& outs = m_.outcomes(s, a);
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    StateId next = outs.back().next;
    for (const Outcome& o : outs) {
        if (u < o.probability) {
            next = o.next;
            break;
        }
        u -= o.probability;
    }
    return {observe(next), m_.reward(s, a)};
}

GridWorldEnvironment::GridWorldEnvironment(GridConfig cfg) : cfg_(std::move(cfg)) {
    const auto problems = cfg_.validate();
    if (!problems.empty()) throw Error("invalid grid config: " + describe(problems));
    pit_.assign(static_cast<std::size_t>(cfg_.num_cells()), 0);
    for (const Cell& c : cfg_.pits) pit_[static_cast<std::size_t>(cfg_.cell_index(c))] = 1;
    budgets_ = {cfg_.budget};
}

Observation GridWorldEnvironment::observe(int cell, std::mt19937_64& rng) const {
    Observation o;
    o.state = cell;
    o.absorbing = cell == cfg_.cell_index(cfg_.goal);
    double d = 0.0;
    if (pit_[static_cast<std::size_t>(cell)]) {
        d = std::uniform_real_distribution<double>(cfg_.pit_uniform_lo, cfg_.pit_uniform_hi)(rng);
    }
    o.costs = {d};
    return o;
}

Observation GridWorldEnvironment::reset(std::mt19937_64& rng) const {
    return observe(cfg_.cell_index(cfg_.start), rng);
}

StepResult GridWorldEnvironment::step(StateId s, ActionId a, std::mt19937_64& rng) const {
    if (a < 0 || a >= kGridActions) throw Error("grid action out of range: " + std::to_string(a));
    const int goal = cfg_.cell_index(cfg_.goal);
    if (s == goal) return {observe(goal, rng), 0.0};
    int b = a;
    if (cfg_.noise > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg_.noise) {
        b = std::uniform_int_distribution<int>(0, kGridActions - 1)(rng);
    }
    const int next = cfg_.cell_index(move(cfg_, cfg_.cell_at(s), b));
    return {observe(next, rng), next == goal ? cfg_.goal_reward : cfg_.step_reward};
}

// -------------------------------------------------------------------- Chains

Cmdp make_chain(const ChainSpec& spec) {
    if (spec.branches.empty()) throw Error("chain spec needs at least one branch");
    if (spec.horizon < 1) throw Error("chain horizon must be at least 1");
    const auto K = spec.budgets.size();
    int leaves = 0;
    for (const auto& b : spec.branches) {
        if (b.outcomes.empty()) throw Error("chain branch without outcomes");
        for (const auto& o : b.outcomes) {
            if (o.costs.size() != K) throw Error("chain outcome cost vector must have one entry per budget");
        }
        leaves += static_cast<int>(b.outcomes.size());
    }
    const bool sink = spec.horizon > 1;
    const int S = 1 + leaves + (sink ? 1 : 0);
    const int A = static_cast<int>(spec.branches.size());
    Cmdp m = Cmdp::with_shape(S, A, static_cast<int>(K));
    m.horizon = spec.horizon;
    m.discount = spec.discount;
    m.budgets = spec.budgets;
    m.absorbing.assign(static_cast<std::size_t>(S), 0);
    const StateId sink_state = S - 1;
    int leaf = 1;
    for (int a = 0; a < A; ++a) {
        const auto& b = spec.branches[static_cast<std::size_t>(a)];
        m.rewards[m.index(0, a)] = b.reward;
        for (const auto& o : b.outcomes) {
            m.transitions[m.index(0, a)].push_back({leaf, o.probability});
            for (std::size_t k = 0; k < K; ++k) m.costs[k][static_cast<std::size_t>(leaf)] = o.costs[k];
            ++leaf;
        }
    }
    for (StateId s = 1; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            m.transitions[m.index(s, a)] = {{sink ? sink_state : s, 1.0}};
            if (a > 0) {
                if (m.available.empty()) m.available.assign(static_cast<std::size_t>(S * A), 1);
                m.available[m.index(s, a)] = 0;
            }
        }
    }
    if (sink) m.absorbing[static_cast<std::size_t>(sink_state)] = 1;
    require_valid(m);
    return m;
}

Cmdp two_action_chain() {
    ChainSpec spec;
    spec.branches = {{1.0, {{1.0, {0.0}}}}, {2.0, {{1.0, {3.0}}}}};
    return make_chain(spec);
}

Cmdp three_action_chain() {
    ChainSpec spec;
    spec.branches = {{1.0, {{1.0, {0.0}}}}, {2.0, {{1.0, {3.0}}}}, {1.5, {{1.0, {2.0}}}}};
    return make_chain(spec);
}

Cmdp multi_chain() {
    ChainSpec spec;
    spec.budgets = {2.0, 2.0};
    spec.branches = {{2.0, {{1.0, {3.0, 0.0}}}},
                     {1.5, {{1.0, {0.0, 3.0}}}},
                     {1.0, {{1.0, {0.0, 0.0}}}},
                     {1.8, {{0.5, {1.5, 0.0}}, {0.5, {3.0, 0.0}}}}};
    return make_chain(spec);
}

Cmdp degenerate_chain() {
    ChainSpec spec;
    spec.branches = {{1.0, {{1.0, {0.0}}}}};
    return make_chain(spec);
}

Cmdp lottery_chain() {
    // s0 -a0-> S (r 0.9) | -a1-> A (d 1.5) or B (d 0.5), r 1.5, each w.p. 0.5.
    // From S, A, B: a0 stop -> E0 (d 0, r 0), a1 push -> E1 (d 1, r 1).
    enum : StateId { s0 = 0, sS = 1, sA = 2, sB = 3, e0 = 4, e1 = 5 };
    Cmdp m = Cmdp::with_shape(6, 2, 1);
    m.horizon = 2;
    m.budgets = {2.0};
    m.costs[0] = {0.0, 0.0, 1.5, 0.5, 0.0, 1.0};
    m.transitions[m.index(s0, 0)] = {{sS, 1.0}};
    m.rewards[m.index(s0, 0)] = 0.9;
    m.transitions[m.index(s0, 1)] = {{sA, 0.5}, {sB, 0.5}};
    m.rewards[m.index(s0, 1)] = 1.5;
    for (StateId s : {sS, sA, sB}) {
        m.transitions[m.index(s, 0)] = {{e0, 1.0}};
        m.transitions[m.index(s, 1)] = {{e1, 1.0}};
        m.rewards[m.index(s, 1)] = 1.0;
    }
    for (StateId s : {e0, e1}) {
        m.transitions[m.index(s, 0)] = {{s, 1.0}};
        m.transitions[m.index(s, 1)] = {{s, 1.0}};
    }
    require_valid(m);
    return m;
}

Cmdp layered_random(std::uint64_t seed, int layers, int width, int actions) {
    if (layers < 1 || width < 1 || actions < 1) throw Error("layered_random: sizes must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, width - 1);
    std::uniform_int_distribution<int> grid(0, 4);
    // Layer l occupies states 1 + (l-1)*width .. l*width; state 0 is the root.
    const int S = 1 + layers * width;
    Cmdp m = Cmdp::with_shape(S, actions, 1);
    m.horizon = layers;
    m.budgets = {1.5};
    auto first = [&](int l) { return l == 0 ? 0 : 1 + (l - 1) * width; };
    auto count = [&](int l) { return l == 0 ? 1 : width; };
    for (int l = 1; l <= layers; ++l) {
        for (int i = 0; i < width; ++i) {
            m.costs[0][static_cast<std::size_t>(first(l) + i)] = i == 0 ? 0.0 : 0.25 * grid(rng);
        }
    }
    for (int l = 0; l <= layers; ++l) {
        for (int i = 0; i < count(l); ++i) {
            const StateId s = first(l) + i;
            for (int a = 0; a < actions; ++a) {
                auto& out = m.transitions[m.index(s, a)];
                if (l == layers) {
                    out = {{s, 1.0}};
                    continue;
                }
                m.rewards[m.index(s, a)] = std::round(unit(rng) * 100.0) / 100.0;
                if (a == 0) {
                    // Action 0 keeps the zero-cost column reachable.
                    out = {{first(l + 1) + (i == 0 ? 0 : pick(rng)), 1.0}};
                    continue;
                }
                const int u = pick(rng);
                int v = pick(rng);
                if (v == u) v = (u + 1) % width;
                if (u == v) {
                    out = {{first(l + 1) + u, 1.0}};
                } else {
                    const double p = 0.25 + 0.5 * std::round(unit(rng) * 4.0) / 4.0;
                    out = {{first(l + 1) + std::min(u, v), p}, {first(l + 1) + std::max(u, v), 1.0 - p}};
                }
            }
        }
    }
    require_valid(m);
    return m;
}

std::vector<Fixture> fixture_pack() {
    std::vector<Fixture> out;
    out.push_back({"two_action_chain", two_action_chain(), true});
    out.push_back({"three_action_chain", three_action_chain(), true});
    out.push_back({"lottery_chain", lottery_chain(), true});
    out.push_back({"degenerate_chain", degenerate_chain(), true});
    out.push_back({"layered_random", layered_random(20260101), true});
    out.push_back({"grid3x3", make_gridworld(small_grid(0.0)), true});
    out.push_back({"grid3x3_noisy", make_gridworld([] {
                       GridConfig g = small_grid(0.05);
                       g.budget = 2.0;
                       return g;
                   }()),
                   false});
    out.push_back({"multi_chain", multi_chain(), true});
    return out;
}

Fixture fixture_by_name(const std::string& name) {
    for (auto& f : fixture_pack()) {
        if (f.name == name) return f;
    }
    throw Error("unknown fixture: " + name);
}

} // namespace cmdp
