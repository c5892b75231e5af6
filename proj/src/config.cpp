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

#include "cmdp/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <regex>

#include "cmdp/cmdp_io.hpp"
#include "cmdp/numeric.hpp"

namespace cmdp {

namespace {

[[noreturn]] void fail(const std::string& key, int line, const std::string& message) {
    throw ConfigError("config line " + std::to_string(line) + " (" + key + "): " + message);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (ch == ',' || ch == ' ' || ch == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

double as_double(const ConfigEntry& e, const std::string& key) {
    auto v = parse_double(trim(e.value));
    if (!v) fail(key, e.line, "expected a number, got '" + e.value + "'");
    return *v;
}

long long as_int(const ConfigEntry& e, const std::string& key) {
    auto v = parse_int(trim(e.value));
    if (!v) fail(key, e.line, "expected an integer, got '" + e.value + "'");
    return *v;
}

bool as_bool(const ConfigEntry& e, const std::string& key) {
    const auto v = trim(e.value);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, e.line, "expected true or false, got '" + e.value + "'");
}

Cell as_cell(const std::string& token, const std::string& key, int line) {
    const auto colon = token.find(':');
    if (colon == std::string::npos) fail(key, line, "expected a cell x:y, got '" + token + "'");
    auto x = parse_int(token.substr(0, colon));
    auto y = parse_int(token.substr(colon + 1));
    if (!x || !y) fail(key, line, "expected a cell x:y, got '" + token + "'");
    return {static_cast<int>(*x), static_cast<int>(*y)};
}

void require(bool ok, const std::string& key, int line, const std::string& message) {
    if (!ok) fail(key, line, message);
}

} // namespace

std::map<std::string, ConfigEntry> parse_key_values(std::istream& in) {
    std::map<std::string, ConfigEntry> out;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
        const auto text = trim(raw);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) throw ConfigError("config line " + std::to_string(line) + ": expected key = value");
        const std::string key(trim(text.substr(0, eq)));
        const std::string value(trim(text.substr(eq + 1)));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line) + ": empty key");
        if (out.count(key)) throw ConfigError("config line " + std::to_string(line) + ": duplicate key " + key);
        out[key] = {value, line};
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    for (const auto& tok : split_list(text)) {
        auto v = parse_double(tok);
        if (!v) throw ConfigError(key + ": bad number '" + tok + "'");
        out.push_back(*v);
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text, const std::string& key) {
    std::vector<std::uint64_t> out;
    for (const auto& tok : split_list(text)) {
        auto v = parse_int(tok);
        if (!v || *v < 0) throw ConfigError(key + ": bad seed '" + tok + "'");
        out.push_back(static_cast<std::uint64_t>(*v));
    }
    if (out.empty()) throw ConfigError(key + ": empty seed list");
    return out;
}

std::string_view learner_name(LearnerKind kind) noexcept {
    return kind == LearnerKind::SafeQ ? "safe_q" : "safe_ac";
}

// ------------------------------------------------------------------ EnvSpec

namespace {

Cmdp named_chain(const std::string& name) {
    if (name == "two_action") return two_action_chain();
    if (name == "three_action") return three_action_chain();
    if (name == "lottery") return lottery_chain();
    if (name == "multi") return multi_chain();
    if (name == "degenerate") return degenerate_chain();
    throw ConfigError("unknown chain '" + name + "' (two_action, three_action, lottery, multi, degenerate)");
}

void apply_gamma(Cmdp& m, std::optional<double> gamma) {
    if (gamma) m.discount = *gamma;
}

} // namespace

Cmdp EnvSpec::model() const {
    Cmdp m;
    switch (kind) {
    case EnvKind::Grid: {
        GridConfig g = grid;
        if (gamma) g.discount = *gamma;
        return make_gridworld(g);
    }
    case EnvKind::Chain:
        m = named_chain(name);
        break;
    case EnvKind::Fixture:
        if (name == "all") throw ConfigError("env.fixture = all names several models; pick one");
        m = fixture_by_name(name).model;
        break;
    case EnvKind::File:
        m = load_cmdp(name);
        break;
    }
    apply_gamma(m, gamma);
    require_valid(m);
    return m;
}

std::unique_ptr<Environment> EnvSpec::environment() const {
    if (kind == EnvKind::Grid && sampled) {
        GridConfig g = grid;
        if (gamma) g.discount = *gamma;
        return std::make_unique<GridWorldEnvironment>(g);
    }
    return std::make_unique<CmdpEnvironment>(model());
}

std::vector<Fixture> EnvSpec::fixtures() const {
    if (kind == EnvKind::Fixture && name == "all") {
        auto pack = fixture_pack();
        for (auto& f : pack) apply_gamma(f.model, gamma);
        return pack;
    }
    if (kind == EnvKind::Fixture) {
        Fixture f = fixture_by_name(name);
        apply_gamma(f.model, gamma);
        return {f};
    }
    const std::string label = kind == EnvKind::Grid ? "grid" : name;
    return {{label, model(), true}};
}

// ----------------------------------------------------------- ExperimentConfig

VerifyOptions ExperimentConfig::verify_options() const {
    VerifyOptions o = verify;
    if (lambda_grid) {
        o.truncated_grid = *lambda_grid;
        o.equivalence_grid = *lambda_grid;
        o.rn_extra = *lambda_grid;
    }
    return o;
}

ExperimentConfig parse_config(std::istream& in) {
    auto kv = parse_key_values(in);
    ExperimentConfig cfg;
    LearnerConfig& L = cfg.learning;
    std::map<int, std::pair<PenaltyScheme, int>> schemes;
    std::map<int, std::pair<double, int>> lambdas;

    auto take = [&](const std::string& key) -> std::optional<ConfigEntry> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        ConfigEntry e = it->second;
        kv.erase(it);
        return e;
    };

    // Environment: kind and preset first, individual keys afterwards.
    if (auto e = take("env.kind")) {
        const auto& v = e->value;
        if (v == "grid") cfg.env.kind = EnvKind::Grid;
        else if (v == "chain") cfg.env.kind = EnvKind::Chain;
        else if (v == "fixture") cfg.env.kind = EnvKind::Fixture;
        else if (v == "file") cfg.env.kind = EnvKind::File;
        else fail("env.kind", e->line, "expected grid, chain, fixture or file");
    }
    if (cfg.env.kind == EnvKind::Fixture) cfg.env.name = "all";
    if (auto e = take("env.preset")) {
        require(cfg.env.kind == EnvKind::Grid, "env.preset", e->line, "only valid for env.kind = grid");
        if (e->value == "desk") cfg.env.grid = desk_grid();
        else if (e->value == "large") cfg.env.grid = large_grid();
        else if (e->value == "small") cfg.env.grid = small_grid(0.0);
        else fail("env.preset", e->line, "expected desk, large or small");
        cfg.env.name = e->value;
    }
    for (const char* key : {"env.chain", "env.fixture", "env.file"}) {
        if (auto e = take(key)) {
            const EnvKind want = std::string(key) == "env.chain" ? EnvKind::Chain
                                 : std::string(key) == "env.fixture" ? EnvKind::Fixture
                                                                     : EnvKind::File;
            require(cfg.env.kind == want, key, e->line, "does not match env.kind");
            cfg.env.name = e->value;
        }
    }
    if (cfg.env.kind == EnvKind::Chain && cfg.env.name == "desk") cfg.env.name = "two_action";

    GridConfig& g = cfg.env.grid;
    using Handler = std::function<void(const ConfigEntry&, const std::string&)>;
    const std::map<std::string, Handler> handlers = {
        {"env.mode", [&](const ConfigEntry& e, const std::string& k) {
             if (e.value == "sampled") cfg.env.sampled = true;
             else if (e.value == "exact") cfg.env.sampled = false;
             else fail(k, e.line, "expected sampled or exact");
         }},
        {"env.width", [&](const ConfigEntry& e, const std::string& k) { g.width = static_cast<int>(as_int(e, k)); }},
        {"env.height", [&](const ConfigEntry& e, const std::string& k) { g.height = static_cast<int>(as_int(e, k)); }},
        {"env.start", [&](const ConfigEntry& e, const std::string& k) { g.start = as_cell(e.value, k, e.line); }},
        {"env.goal", [&](const ConfigEntry& e, const std::string& k) { g.goal = as_cell(e.value, k, e.line); }},
        {"env.pits", [&](const ConfigEntry& e, const std::string& k) {
             g.pits.clear();
             for (const auto& tok : split_list(e.value)) g.pits.push_back(as_cell(tok, k, e.line));
         }},
        {"env.noise", [&](const ConfigEntry& e, const std::string& k) { g.noise = as_double(e, k); }},
        {"env.step_reward", [&](const ConfigEntry& e, const std::string& k) { g.step_reward = as_double(e, k); }},
        {"env.goal_reward", [&](const ConfigEntry& e, const std::string& k) { g.goal_reward = as_double(e, k); }},
        {"env.horizon", [&](const ConfigEntry& e, const std::string& k) { g.horizon = static_cast<int>(as_int(e, k)); }},
        {"env.budget", [&](const ConfigEntry& e, const std::string& k) { g.budget = as_double(e, k); }},
        {"env.discount", [&](const ConfigEntry& e, const std::string& k) { g.discount = as_double(e, k); }},
        {"env.pit_support", [&](const ConfigEntry& e, const std::string& k) { g.pit_support = parse_double_list(e.value, k); }},
        {"env.pit_weights", [&](const ConfigEntry& e, const std::string& k) { g.pit_weights = parse_double_list(e.value, k); }},
        {"env.pit_uniform", [&](const ConfigEntry& e, const std::string& k) {
             const auto v = parse_double_list(e.value, k);
             require(v.size() == 2, k, e.line, "expected lo, hi");
             g.pit_uniform_lo = v[0];
             g.pit_uniform_hi = v[1];
         }},
        {"learner", [&](const ConfigEntry& e, const std::string& k) {
             if (e.value == "safe_q") cfg.learner = LearnerKind::SafeQ;
             else if (e.value == "safe_ac") cfg.learner = LearnerKind::SafeActorCritic;
             else fail(k, e.line, "expected safe_q or safe_ac");
         }},
        {"gamma", [&](const ConfigEntry& e, const std::string& k) {
             const double v = as_double(e, k);
             require(v > 0.0 && v <= 1.0, k, e.line, "must lie in (0, 1]");
             cfg.env.gamma = v;
         }},
        {"Lambda_floor", [&](const ConfigEntry& e, const std::string& k) { L.lambda_floor = as_double(e, k); }},
        {"M", [&](const ConfigEntry& e, const std::string& k) { L.window = static_cast<int>(as_int(e, k)); }},
        {"C", [&](const ConfigEntry& e, const std::string& k) { L.target_period = static_cast<int>(as_int(e, k)); }},
        {"N", [&](const ConfigEntry& e, const std::string& k) {
             const auto v = as_int(e, k);
             require(v >= 1, k, e.line, "must be at least 1");
             L.replay_capacity = static_cast<std::size_t>(v);
         }},
        {"n", [&](const ConfigEntry& e, const std::string& k) { L.n_step = static_cast<int>(as_int(e, k)); }},
        {"rho", [&](const ConfigEntry& e, const std::string& k) { L.rho = as_double(e, k); }},
        {"alpha_ent", [&](const ConfigEntry& e, const std::string& k) { L.alpha_ent = as_double(e, k); }},
        {"episodes", [&](const ConfigEntry& e, const std::string& k) { L.episodes = static_cast<int>(as_int(e, k)); }},
        {"decay", [&](const ConfigEntry& e, const std::string& k) { L.decay = as_double(e, k); }},
        {"quantum", [&](const ConfigEntry& e, const std::string& k) { L.quantum = as_double(e, k); }},
        {"lr", [&](const ConfigEntry& e, const std::string& k) { L.lr = as_double(e, k); }},
        {"lr_critic", [&](const ConfigEntry& e, const std::string& k) { L.lr_critic = as_double(e, k); }},
        {"lr_actor", [&](const ConfigEntry& e, const std::string& k) { L.lr_actor = as_double(e, k); }},
        {"w", [&](const ConfigEntry& e, const std::string& k) { L.w = as_double(e, k); }},
        {"eps_start", [&](const ConfigEntry& e, const std::string& k) { L.eps_start = as_double(e, k); }},
        {"eps_end", [&](const ConfigEntry& e, const std::string& k) { L.eps_end = as_double(e, k); }},
        {"eps_fraction", [&](const ConfigEntry& e, const std::string& k) { L.eps_fraction = as_double(e, k); }},
        {"batch_size", [&](const ConfigEntry& e, const std::string& k) { L.batch_size = static_cast<int>(as_int(e, k)); }},
        {"update_every", [&](const ConfigEntry& e, const std::string& k) { L.update_every = static_cast<int>(as_int(e, k)); }},
        {"log.wall_ms", [&](const ConfigEntry& e, const std::string& k) { L.log_wall_ms = as_bool(e, k); }},
        {"seeds", [&](const ConfigEntry& e, const std::string& k) { cfg.seeds = parse_seed_list(e.value, k); }},
        {"eval_episodes", [&](const ConfigEntry& e, const std::string& k) {
             const auto v = as_int(e, k);
             require(v >= 1, k, e.line, "must be at least 1");
             cfg.eval_episodes = static_cast<int>(v);
         }},
        {"alpha", [&](const ConfigEntry& e, const std::string& k) {
             cfg.alpha = as_double(e, k);
             require(cfg.alpha > 0.0 && cfg.alpha <= 1.0, k, e.line, "must lie in (0, 1]");
         }},
        {"lambda_grid", [&](const ConfigEntry& e, const std::string& k) {
             auto v = parse_double_list(e.value, k);
             for (double l : v) require(l >= 0.0 && std::isfinite(l), k, e.line, "lambdas must be finite and non-negative");
             cfg.lambda_grid = std::move(v);
         }},
        {"checkpoint", [&](const ConfigEntry& e, const std::string&) { cfg.checkpoint = e.value; }},
        {"verify.kinds", [&](const ConfigEntry& e, const std::string& k) {
             cfg.verify_kinds.clear();
             for (const auto& tok : split_list(e.value)) {
                 try {
                     cfg.verify_kinds.push_back(parse_kind(tok));
                 } catch (const Error& err) {
                     fail(k, e.line, err.what());
                 }
             }
         }},
        {"verify.alphas", [&](const ConfigEntry& e, const std::string& k) {
             cfg.verify.alphas = parse_double_list(e.value, k);
             for (double a : cfg.verify.alphas) require(a > 0.0 && a <= 1.0, k, e.line, "levels must lie in (0, 1]");
         }},
        {"verify.assert_below_bound", [&](const ConfigEntry& e, const std::string& k) { cfg.verify.assert_below_bound = as_bool(e, k); }},
        {"verify.policy_cap", [&](const ConfigEntry& e, const std::string& k) {
             cfg.verify.policy_enumeration_cap = static_cast<std::size_t>(std::max(0LL, as_int(e, k)));
         }},
        {"verify.oracle_cap", [&](const ConfigEntry& e, const std::string& k) {
             const auto v = as_int(e, k);
             require(v >= 1, k, e.line, "must be at least 1");
             cfg.verify.oracle.cap = static_cast<std::size_t>(v);
         }},
        {"verify.state_cap", [&](const ConfigEntry& e, const std::string& k) {
             const auto v = as_int(e, k);
             require(v >= 1, k, e.line, "must be at least 1");
             cfg.verify.extended.state_cap = static_cast<std::size_t>(v);
         }},
        {"verify.quantum", [&](const ConfigEntry& e, const std::string& k) {
             cfg.verify.extended.quantum = as_double(e, k);
             require(cfg.verify.extended.quantum > 0.0, k, e.line, "must be positive");
         }},
    };

    static const std::regex indexed_key(R"((scheme|lambda)\.(\d+))");
    for (const auto& [key, entry] : kv) {
        std::smatch match;
        if (std::regex_match(key, match, indexed_key)) {
            const int k = std::stoi(match[2].str());
            if (match[1] == "scheme") {
                try {
                    schemes[k] = {parse_scheme(entry.value), entry.line};
                } catch (const Error& err) {
                    fail(key, entry.line, err.what());
                }
            } else {
                lambdas[k] = {as_double(entry, key), entry.line};
            }
            continue;
        }
        auto h = handlers.find(key);
        if (h == handlers.end()) fail(key, entry.line, "unknown key");
        h->second(entry, key);
    }

    // Cross-field checks need the constraint count of the configured model.
    int K = 1;
    try {
        if (cfg.env.kind == EnvKind::Grid) {
            if (auto problems = g.validate(); !problems.empty()) throw ConfigError("invalid grid: " + describe(problems));
        } else if (!(cfg.env.kind == EnvKind::Fixture && cfg.env.name == "all")) {
            K = cfg.env.model().num_constraints();
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& err) {
        throw ConfigError(std::string("env: ") + err.what());
    }
    L.schemes.assign(static_cast<std::size_t>(K), PenaltyScheme::RiskNeutral);
    L.lambda0.assign(static_cast<std::size_t>(K), 1.0);
    for (const auto& [k, v] : schemes) {
        require(k < K, "scheme." + std::to_string(k), v.second, "constraint index out of range");
        L.schemes[static_cast<std::size_t>(k)] = v.first;
    }
    for (const auto& [k, v] : lambdas) {
        require(k < K, "lambda." + std::to_string(k), v.second, "constraint index out of range");
        L.lambda0[static_cast<std::size_t>(k)] = v.first;
    }
    if (auto problems = L.validate(K); !problems.empty()) throw ConfigError("learner settings: " + problems.front());
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    return parse_config(in);
}

} // namespace cmdp
