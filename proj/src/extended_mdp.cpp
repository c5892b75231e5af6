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

#include "cmdp/extended_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmdp/numeric.hpp"

namespace cmdp {

struct ExtendedMdp::Structure {
    Cmdp base;
    ExtendedOptions options;
    std::shared_ptr<AugmentedSpace> space;
    std::vector<std::vector<int>> cost_units;      // [k][s]
    std::vector<std::vector<int>> layers;          // t = 0..T+1
    std::vector<std::vector<char>> layer_member;   // [t][x]
    std::vector<std::size_t> row_begin;            // [x*A + a], size X*A + 1
    std::vector<AugmentedTransition> transitions;
    std::vector<char> expanded;                    // [x]
};

const Cmdp& ExtendedMdp::base() const {
    if (!structure_) throw Error("extended MDP has not been built");
    return structure_->base;
}

const AugmentedSpace& ExtendedMdp::space() const {
    if (!structure_) throw Error("extended MDP has not been built");
    return *structure_->space;
}

std::shared_ptr<const AugmentedSpace> ExtendedMdp::space_ptr() const {
    if (!structure_) throw Error("extended MDP has not been built");
    return structure_->space;
}

const ExtendedOptions& ExtendedMdp::options() const {
    if (!structure_) throw Error("extended MDP has not been built");
    return structure_->options;
}

const std::vector<int>& ExtendedMdp::layer(int t) const {
    return structure_->layers.at(static_cast<std::size_t>(t));
}

bool ExtendedMdp::in_layer(int t, int x) const {
    return structure_->layer_member.at(static_cast<std::size_t>(t))[static_cast<std::size_t>(x)] != 0;
}

bool ExtendedMdp::expanded(int x) const { return structure_->expanded[static_cast<std::size_t>(x)] != 0; }

std::span<const AugmentedTransition> ExtendedMdp::successors(int x, ActionId a) const {
    const auto& st = *structure_;
    const std::size_t row = static_cast<std::size_t>(x) * static_cast<std::size_t>(st.base.num_actions) +
                            static_cast<std::size_t>(a);
    return {st.transitions.data() + st.row_begin[row], st.row_begin[row + 1] - st.row_begin[row]};
}

ExtendedMdp ExtendedMdp::with_penalties(std::vector<double> lambdas, std::vector<PenaltyScheme> schemes) const {
    const auto K = static_cast<std::size_t>(base().num_constraints());
    if (lambdas.size() != K || schemes.size() != K) {
        throw Error("extended MDP: expected " + std::to_string(K) + " lambdas and schemes, got " +
                    std::to_string(lambdas.size()) + " and " + std::to_string(schemes.size()));
    }
    for (double l : lambdas) {
        if (!(l >= 0.0) || std::isnan(l)) throw Error("extended MDP: lambda must be >= 0, got " + format_double(l));
    }
    ExtendedMdp out;
    out.structure_ = structure_;
    out.lambdas_ = std::move(lambdas);
    out.schemes_ = std::move(schemes);
    return out;
}

LedgerCase ExtendedMdp::ledger_case(int x, int k) const {
    const auto& st = *structure_;
    const auto& spec = st.space->ledger();
    const AugmentedState& a = st.space->at(x);
    const int entry = a.ledger[static_cast<std::size_t>(k)];
    if (!spec.under(k, entry)) return LedgerCase::Violated;
    const int d = st.cost_units[static_cast<std::size_t>(k)][static_cast<std::size_t>(a.state)];
    return spec.under(k, entry + d) ? LedgerCase::Safe : LedgerCase::Crossing;
}

double ExtendedMdp::accumulated(int x, int k) const {
    const int entry = space().at(x).ledger[static_cast<std::size_t>(k)];
    return entry == kViolated ? kViolatedLedger : space().ledger().accumulated(entry);
}

double ExtendedMdp::step_penalty(int x, int t) const {
    const auto& st = *structure_;
    const StateId s = st.space->at(x).state;
    double total = 0.0;
    for (int k = 0; k < st.base.num_constraints(); ++k) {
        const auto kk = static_cast<std::size_t>(k);
        if (lambdas_[kk] == 0.0) continue;
        total += penalty_for_case(schemes_[kk], ledger_case(x, k), lambdas_[kk], st.base.cost(k, s), accumulated(x, k),
                                  t, st.base.budgets[kk]);
    }
    return total;
}

double ExtendedMdp::penalized_reward(int x, ActionId a, int t) const {
    const StateId s = space().at(x).state;
    const double r = base().reward(s, a);
    const double amount = step_penalty(x, t);
    if (amount == 0.0) return r;
    const double result = r - amount / std::pow(base().discount, t);
    if (!std::isfinite(result)) {
        throw Error("penalized reward overflowed at t=" + std::to_string(t) + "; use step_penalty in return space");
    }
    return result;
}

ExtendedMdp build_extended(const Cmdp& m, std::vector<double> lambdas, std::vector<PenaltyScheme> schemes,
                           const ExtendedOptions& options) {
    const auto K = static_cast<std::size_t>(m.num_constraints());
    if (lambdas.size() != K || schemes.size() != K) {
        throw Error("build_extended: expected " + std::to_string(K) + " lambdas and schemes, got " +
                    std::to_string(lambdas.size()) + " and " + std::to_string(schemes.size()));
    }
    require_valid(m);

    auto st = std::make_shared<ExtendedMdp::Structure>();
    st->base = m;
    st->options = options;
    st->space = std::make_shared<AugmentedSpace>(LedgerSpec::for_model(m, options.quantum, options.collapse));
    const LedgerSpec& spec = st->space->ledger();
    AugmentedSpace& space = *st->space;

    st->cost_units.assign(K, std::vector<int>(static_cast<std::size_t>(m.num_states)));
    for (std::size_t k = 0; k < K; ++k) {
        for (StateId s = 0; s < m.num_states; ++s) {
            st->cost_units[k][static_cast<std::size_t>(s)] = spec.to_units(m.cost(static_cast<int>(k), s));
        }
    }

    const int T = m.horizon;
    st->layers.assign(static_cast<std::size_t>(T) + 2, {});
    std::vector<int> ledger(K, 0);
    space.intern(m.initial_state, ledger);

    auto check_cap = [&] {
        if (space.size() > options.state_cap) {
            throw Error("build_extended: reachable augmented states exceed the cap of " +
                        std::to_string(options.state_cap));
        }
    };
    auto advanced = [&](int x) {
        const AugmentedState& cur = space.at(x);
        std::vector<int> next(K);
        for (std::size_t k = 0; k < K; ++k) {
            next[k] = spec.advance(static_cast<int>(k), cur.ledger[k], st->cost_units[k][static_cast<std::size_t>(cur.state)]);
        }
        return next;
    };

    std::vector<int> seen_at;  // last layer index a state was added to
    auto add_to_layer = [&](std::size_t t, int x) {
        if (seen_at.size() <= static_cast<std::size_t>(x)) seen_at.resize(static_cast<std::size_t>(x) + 1, -1);
        if (seen_at[static_cast<std::size_t>(x)] != static_cast<int>(t)) {
            seen_at[static_cast<std::size_t>(x)] = static_cast<int>(t);
            st->layers[t].push_back(x);
        }
    };
    add_to_layer(0, 0);

    // Expanded transitions are collected per state first, then flattened.
    std::vector<std::vector<std::vector<AugmentedTransition>>> rows;
    for (int t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < st->layers[static_cast<std::size_t>(t)].size(); ++i) {
            const int x = st->layers[static_cast<std::size_t>(t)][i];
            if (rows.size() <= static_cast<std::size_t>(x)) rows.resize(static_cast<std::size_t>(x) + 1);
            auto& xrows = rows[static_cast<std::size_t>(x)];
            if (xrows.empty()) {
                const StateId s = space.at(x).state;
                const auto next_ledger = advanced(x);
                xrows.assign(static_cast<std::size_t>(m.num_actions), {});
                for (ActionId a = 0; a < m.num_actions; ++a) {
                    if (!m.is_available(s, a)) continue;
                    for (const Outcome& o : m.outcomes(s, a)) {
                        if (o.probability <= 0.0) continue;
                        const int y = space.intern(o.next, next_ledger);
                        xrows[static_cast<std::size_t>(a)].push_back({y, o.probability});
                    }
                }
                check_cap();
            }
            for (const auto& arow : xrows) {
                for (const auto& tr : arow) add_to_layer(static_cast<std::size_t>(t) + 1, tr.next);
            }
        }
    }
    for (int x : st->layers[static_cast<std::size_t>(T)]) {
        const int y = space.intern(space.at(x).state, advanced(x));
        add_to_layer(static_cast<std::size_t>(T) + 1, y);
    }
    check_cap();

    const std::size_t X = space.size();
    const auto A = static_cast<std::size_t>(m.num_actions);
    st->expanded.assign(X, 0);
    st->row_begin.assign(X * A + 1, 0);
    for (std::size_t x = 0; x < X; ++x) {
        for (std::size_t a = 0; a < A; ++a) {
            st->row_begin[x * A + a] = st->transitions.size();
            if (x < rows.size() && !rows[x].empty()) {
                st->expanded[x] = 1;
                st->transitions.insert(st->transitions.end(), rows[x][a].begin(), rows[x][a].end());
            }
        }
    }
    st->row_begin[X * A] = st->transitions.size();
    st->layer_member.assign(static_cast<std::size_t>(T) + 2, std::vector<char>(X, 0));
    for (std::size_t t = 0; t < st->layers.size(); ++t) {
        for (int x : st->layers[t]) st->layer_member[t][static_cast<std::size_t>(x)] = 1;
    }

    ExtendedMdp out;
    out.structure_ = std::move(st);
    return out.with_penalties(std::move(lambdas), std::move(schemes));
}

ExtendedMdp build_extended(const Cmdp& m, double lambda, PenaltyScheme scheme, const ExtendedOptions& options) {
    const auto K = static_cast<std::size_t>(m.num_constraints());
    return build_extended(m, std::vector<double>(K, lambda), std::vector<PenaltyScheme>(K, scheme), options);
}

} // namespace cmdp
