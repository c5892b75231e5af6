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

#include "cmdp/tables.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cmdp/numeric.hpp"

namespace cmdp {

namespace {
constexpr double kBinTolerance = 1e-9;
}

LedgerBins::LedgerBins(std::vector<double> budgets, double quantum) : budgets_(std::move(budgets)), quantum_(quantum) {
    if (!(quantum > 0.0)) throw Error("ledger quantum must be positive");
    count_ = 1;
    for (double b : budgets_) {
        if (!(b > 0.0)) throw Error("ledger budget must be positive");
        const int u = static_cast<int>(std::floor(b / quantum + kBinTolerance));
        sizes_.push_back(u + 2);
        count_ *= u + 2;
    }
}

int LedgerBins::bin(int k, double accumulated) const {
    const auto ku = static_cast<std::size_t>(k);
    const int over = sizes_.at(ku) - 1;
    if (accumulated > budgets_[ku]) return over;
    const auto b = static_cast<int>(std::llround(accumulated / quantum_));
    return std::min(std::max(b, 0), over - 1);
}

int LedgerBins::index(std::span<const double> accumulated) const {
    if (accumulated.size() != budgets_.size()) throw Error("ledger size does not match the number of budgets");
    int idx = 0;
    for (std::size_t k = 0; k < budgets_.size(); ++k) idx = idx * sizes_[k] + bin(static_cast<int>(k), accumulated[k]);
    return idx;
}

QTable::QTable(int num_states, int num_bins, int num_actions, double init)
    : states_(num_states), bins_(num_bins), actions_(num_actions),
      data_(static_cast<std::size_t>(num_states) * static_cast<std::size_t>(num_bins) * static_cast<std::size_t>(num_actions), init) {}

std::size_t QTable::offset(int s, int bin) const {
    if (s < 0 || s >= states_ || bin < 0 || bin >= bins_) {
        throw Error("table index out of range: state " + std::to_string(s) + ", bin " + std::to_string(bin));
    }
    return (static_cast<std::size_t>(s) * static_cast<std::size_t>(bins_) + static_cast<std::size_t>(bin)) *
           static_cast<std::size_t>(actions_);
}

std::span<const double> QTable::row(int s, int bin) const {
    return {data_.data() + offset(s, bin), static_cast<std::size_t>(actions_)};
}

std::span<double> QTable::mutable_row(int s, int bin) {
    return {data_.data() + offset(s, bin), static_cast<std::size_t>(actions_)};
}

PolyakTarget::PolyakTarget(const QTable& online, double rho)
    : rho_(rho), target_(online), stamp_(online.data().size(), 0) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw Error("polyak rho must lie in [0, 1]");
}

void PolyakTarget::sync(const QTable& online, int s, int bin, ActionId a) {
    const std::size_t i = online.flat(s, bin, a);
    const long long gap = now_ - stamp_[i];
    if (gap > 0) {
        const double o = online.data()[i];
        target_.data()[i] = o + (target_.data()[i] - o) * std::pow(rho_, static_cast<double>(gap));
        stamp_[i] = now_;
    }
}

double PolyakTarget::value(const QTable& online, int s, int bin, ActionId a) {
    sync(online, s, bin, a);
    return target_.at(s, bin, a);
}

const QTable& Checkpoint::table(const std::string& name) const {
    for (const auto& t : tables) {
        if (t.name == name) return t.table;
    }
    throw Error("checkpoint has no table '" + name + "'");
}

void write_checkpoint(std::ostream& out, const Checkpoint& cp) {
    out << "cmdp-forge-checkpoint 1\n";
    out << "learner " << cp.learner << "\n";
    out << "states " << cp.num_states << "\n";
    out << "actions " << cp.num_actions << "\n";
    out << "quantum " << format_double(cp.quantum) << "\n";
    out << "budgets";
    for (double b : cp.budgets) out << ' ' << format_double(b);
    out << "\nlambdas";
    for (double l : cp.lambdas) out << ' ' << format_double(l);
    out << "\nalpha_ent " << format_double(cp.alpha_ent) << "\n";
    for (const auto& nt : cp.tables) {
        const QTable& t = nt.table;
        std::vector<std::pair<int, int>> rows;
        for (int s = 0; s < t.num_states(); ++s) {
            for (int b = 0; b < t.num_bins(); ++b) {
                for (double v : t.row(s, b)) {
                    if (v != 0.0) {
                        rows.emplace_back(s, b);
                        break;
                    }
                }
            }
        }
        out << "table " << nt.name << ' ' << t.num_bins() << ' ' << rows.size() << "\n";
        for (auto [s, b] : rows) {
            out << s << ' ' << b;
            for (double v : t.row(s, b)) out << ' ' << format_double(v);
            out << "\n";
        }
    }
    out << "end\n";
}

namespace {

std::vector<std::string> split_words(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

double to_double(const std::string& w, int line) {
    auto v = parse_double(w);
    if (!v) throw Error("checkpoint line " + std::to_string(line) + ": bad number '" + w + "'");
    return *v;
}

int to_int(const std::string& w, int line) {
    auto v = parse_int(w);
    if (!v) throw Error("checkpoint line " + std::to_string(line) + ": bad integer '" + w + "'");
    return static_cast<int>(*v);
}

} // namespace

Checkpoint read_checkpoint(std::istream& in) {
    Checkpoint cp;
    std::string line;
    int lineno = 0;
    bool header = false;
    bool ended = false;
    auto next_words = [&]() -> std::vector<std::string> {
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            auto w = split_words(line);
            if (!w.empty()) return w;
        }
        return {};
    };
    for (auto w = next_words(); !w.empty(); w = next_words()) {
        const std::string& key = w[0];
        if (!header) {
            if (key != "cmdp-forge-checkpoint" || w.size() != 2 || w[1] != "1") {
                throw Error("not a cmdp-forge checkpoint (line " + std::to_string(lineno) + ")");
            }
            header = true;
        } else if (key == "learner" && w.size() == 2) {
            cp.learner = w[1];
        } else if (key == "states" && w.size() == 2) {
            cp.num_states = to_int(w[1], lineno);
        } else if (key == "actions" && w.size() == 2) {
            cp.num_actions = to_int(w[1], lineno);
        } else if (key == "quantum" && w.size() == 2) {
            cp.quantum = to_double(w[1], lineno);
        } else if (key == "budgets") {
            for (std::size_t i = 1; i < w.size(); ++i) cp.budgets.push_back(to_double(w[i], lineno));
        } else if (key == "lambdas") {
            for (std::size_t i = 1; i < w.size(); ++i) cp.lambdas.push_back(to_double(w[i], lineno));
        } else if (key == "alpha_ent" && w.size() == 2) {
            cp.alpha_ent = to_double(w[1], lineno);
        } else if (key == "table" && w.size() == 4) {
            if (cp.num_states <= 0 || cp.num_actions <= 0) throw Error("checkpoint table before states/actions");
            const int bins = to_int(w[2], lineno);
            const int rows = to_int(w[3], lineno);
            NamedTable nt{w[1], QTable(cp.num_states, bins, cp.num_actions)};
            for (int r = 0; r < rows; ++r) {
                auto row = next_words();
                if (row.size() != static_cast<std::size_t>(cp.num_actions) + 2) {
                    throw Error("checkpoint line " + std::to_string(lineno) + ": malformed table row");
                }
                const int s = to_int(row[0], lineno);
                const int b = to_int(row[1], lineno);
                auto dst = nt.table.mutable_row(s, b);
                for (int a = 0; a < cp.num_actions; ++a) dst[static_cast<std::size_t>(a)] = to_double(row[static_cast<std::size_t>(a) + 2], lineno);
            }
            cp.tables.push_back(std::move(nt));
        } else if (key == "end") {
            ended = true;
            break;
        } else {
            throw Error("checkpoint line " + std::to_string(lineno) + ": unexpected '" + key + "'");
        }
    }
    if (!header || !ended) throw Error("truncated checkpoint");
    return cp;
}

void save_checkpoint(const std::string& path, const Checkpoint& cp) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint " + path);
    write_checkpoint(out, cp);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read checkpoint " + path);
    return read_checkpoint(in);
}

} // namespace cmdp
