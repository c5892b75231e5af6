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

#include "cmdp/cmdp_io.hpp"

#include <algorithm>

#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "cmdp/numeric.hpp"

namespace cmdp {

ParseError::ParseError(int line, const std::string& message)
    : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == ',')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != ',') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

struct RawDocument {
    std::map<std::string, std::pair<double, int>> scalars;
    long long num_states = -1;
    long long num_actions = -1;
    std::vector<long long> absorbing;
    std::vector<std::pair<long long, long long>> unavailable;
    struct Tr { long long s, a, next; double p; int line; };
    std::vector<Tr> transitions;
    struct Rw { long long s, a; double r; int line; };
    std::vector<Rw> rewards;
    std::map<long long, std::vector<std::pair<long long, double>>> costs;
};

long long need_int(std::string_view tok, int line) {
    auto v = parse_int(tok);
    if (!v) throw ParseError(line, "expected integer, got '" + std::string(tok) + "'");
    return *v;
}

double need_double(std::string_view tok, int line) {
    auto v = parse_double(tok);
    if (!v) throw ParseError(line, "expected number, got '" + std::string(tok) + "'");
    return *v;
}

} // namespace

Cmdp read_cmdp(std::string_view text) {
    RawDocument doc;
    std::string section;
    long long cost_index = -1;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section.rfind("cost.", 0) == 0) {
                cost_index = need_int(std::string_view(section).substr(5), line_no);
                if (cost_index < 0) throw ParseError(line_no, "negative cost index");
                doc.costs[cost_index];
            } else if (section != "states" && section != "actions" && section != "transition" && section != "reward") {
                throw ParseError(line_no, "unknown section [" + section + "]");
            }
            continue;
        }

        if (auto eq = line.find('='); eq != std::string_view::npos) {
            const std::string key(trim(line.substr(0, eq)));
            const std::string_view value = trim(line.substr(eq + 1));
            if (section == "states" && key == "count") {
                doc.num_states = need_int(value, line_no);
            } else if (section == "states" && key == "absorbing") {
                for (auto tok : split_ws(value)) doc.absorbing.push_back(need_int(tok, line_no));
            } else if (section == "actions" && key == "count") {
                doc.num_actions = need_int(value, line_no);
            } else if (section == "actions" && key == "unavailable") {
                for (auto tok : split_ws(value)) {
                    const auto colon = tok.find(':');
                    if (colon == std::string_view::npos) throw ParseError(line_no, "expected s:a pair");
                    doc.unavailable.emplace_back(need_int(tok.substr(0, colon), line_no),
                                                 need_int(tok.substr(colon + 1), line_no));
                }
            } else if (key == "s0" || key == "horizon" || key == "discount" || key.rfind("budget.", 0) == 0) {
                if (doc.scalars.count(key)) throw ParseError(line_no, "duplicate key " + key);
                doc.scalars[key] = {need_double(value, line_no), line_no};
            } else {
                throw ParseError(line_no, "unknown key '" + key + "'");
            }
            continue;
        }

        const auto toks = split_ws(line);
        if (section == "transition") {
            if (toks.size() != 4) throw ParseError(line_no, "transition rows are: s a next probability");
            doc.transitions.push_back({need_int(toks[0], line_no), need_int(toks[1], line_no),
                                       need_int(toks[2], line_no), need_double(toks[3], line_no), line_no});
        } else if (section == "reward") {
            if (toks.size() != 3) throw ParseError(line_no, "reward rows are: s a reward");
            doc.rewards.push_back({need_int(toks[0], line_no), need_int(toks[1], line_no),
                                   need_double(toks[2], line_no), line_no});
        } else if (section.rfind("cost.", 0) == 0) {
            if (toks.size() != 2) throw ParseError(line_no, "cost rows are: s cost");
            doc.costs[cost_index].emplace_back(need_int(toks[0], line_no), need_double(toks[1], line_no));
        } else {
            throw ParseError(line_no, "unexpected data row");
        }
    }

    if (doc.num_states < 1) throw ParseError(line_no, "[states] count missing or < 1");
    if (doc.num_actions < 1) throw ParseError(line_no, "[actions] count missing or < 1");
    const long long K = doc.costs.empty() ? 0 : doc.costs.rbegin()->first + 1;
    Cmdp m = Cmdp::with_shape(static_cast<int>(doc.num_states), static_cast<int>(doc.num_actions), static_cast<int>(K));

    auto state_ok = [&](long long s) { return s >= 0 && s < doc.num_states; };
    auto action_ok = [&](long long a) { return a >= 0 && a < doc.num_actions; };

    for (auto& [key, entry] : doc.scalars) {
        const auto [value, line] = entry;
        if (key == "s0") m.initial_state = static_cast<StateId>(value);
        else if (key == "horizon") m.horizon = static_cast<int>(value);
        else if (key == "discount") m.discount = value;
        else {
            const auto k = need_int(std::string_view(key).substr(7), line);
            if (k < 0 || k >= K) throw ParseError(line, key + " has no matching [cost." + std::to_string(k) + "] section");
            m.budgets[static_cast<std::size_t>(k)] = value;
        }
    }
    for (long long k = 0; k < K; ++k) {
        if (!doc.scalars.count("budget." + std::to_string(k))) {
            throw ParseError(line_no, "missing budget." + std::to_string(k));
        }
    }
    if (!doc.absorbing.empty()) m.absorbing.assign(static_cast<std::size_t>(doc.num_states), 0);
    for (long long s : doc.absorbing) {
        if (!state_ok(s)) throw ParseError(line_no, "absorbing state out of range");
        m.absorbing[static_cast<std::size_t>(s)] = 1;
    }
    if (!doc.unavailable.empty()) m.available.assign(m.rewards.size(), 1);
    for (auto [s, a] : doc.unavailable) {
        if (!state_ok(s) || !action_ok(a)) throw ParseError(line_no, "unavailable pair out of range");
        m.available[m.index(static_cast<StateId>(s), static_cast<ActionId>(a))] = 0;
    }
    for (const auto& t : doc.transitions) {
        if (!state_ok(t.s) || !action_ok(t.a) || !state_ok(t.next)) throw ParseError(t.line, "transition index out of range");
        m.transitions[m.index(static_cast<StateId>(t.s), static_cast<ActionId>(t.a))].push_back(
            {static_cast<StateId>(t.next), t.p});
    }
    for (const auto& r : doc.rewards) {
        if (!state_ok(r.s) || !action_ok(r.a)) throw ParseError(r.line, "reward index out of range");
        m.rewards[m.index(static_cast<StateId>(r.s), static_cast<ActionId>(r.a))] = r.r;
    }
    for (auto& [k, rows] : doc.costs) {
        for (auto [s, d] : rows) {
            if (!state_ok(s)) throw ParseError(line_no, "cost state out of range");
            m.costs[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)] = d;
        }
    }
    return m;
}

std::string write_cmdp(const Cmdp& m) {
    std::ostringstream os;
    os << "# cmdp document\n";
    os << "s0 = " << m.initial_state << "\n";
    os << "horizon = " << m.horizon << "\n";
    os << "discount = " << format_double(m.discount) << "\n";
    for (std::size_t k = 0; k < m.budgets.size(); ++k) {
        os << "budget." << k << " = " << format_double(m.budgets[k]) << "\n";
    }
    os << "\n[states]\ncount = " << m.num_states << "\n";
    if (std::find(m.absorbing.begin(), m.absorbing.end(), char{1}) != m.absorbing.end()) {
        os << "absorbing =";
        for (StateId s = 0; s < m.num_states; ++s) {
            if (m.is_absorbing(s)) os << " " << s;
        }
        os << "\n";
    }
    os << "\n[actions]\ncount = " << m.num_actions << "\n";
    if (!m.available.empty()) {
        os << "unavailable =";
        for (StateId s = 0; s < m.num_states; ++s) {
            for (ActionId a = 0; a < m.num_actions; ++a) {
                if (!m.is_available(s, a)) os << " " << s << ":" << a;
            }
        }
        os << "\n";
    }
    os << "\n[transition]\n";
    for (StateId s = 0; s < m.num_states; ++s) {
        for (ActionId a = 0; a < m.num_actions; ++a) {
            for (const Outcome& o : m.outcomes(s, a)) {
                os << s << " " << a << " " << o.next << " " << format_double(o.probability) << "\n";
            }
        }
    }
    os << "\n[reward]\n";
    for (StateId s = 0; s < m.num_states; ++s) {
        for (ActionId a = 0; a < m.num_actions; ++a) {
            os << s << " " << a << " " << format_double(m.reward(s, a)) << "\n";
        }
    }
    for (int k = 0; k < m.num_constraints(); ++k) {
        os << "\n[cost." << k << "]\n";
        for (StateId s = 0; s < m.num_states; ++s) {
            os << s << " " << format_double(m.cost(k, s)) << "\n";
        }
    }
    return os.str();
}

Cmdp load_cmdp(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open CMDP file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return read_cmdp(buffer.str());
}

void save_cmdp(const std::filesystem::path& path, const Cmdp& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write CMDP file " + path.string());
    out << write_cmdp(m);
}

} // namespace cmdp
