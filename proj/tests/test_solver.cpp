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

#include "cmdp/environments.hpp"
#include "cmdp/oracle.hpp"
#include "cmdp/solver.hpp"
#include "support.hpp"

using namespace cmdp;

TEST_CASE("lambda = 0 reproduces the unconstrained values at every state") {
    for (const auto& f : fixture_pack()) {
        const Cmdp& m = f.model;
        const auto base = unconstrained_values(m);
        const std::vector<double> zero(static_cast<std::size_t>(m.num_constraints()), 0.0);
        const std::vector<PenaltyScheme> rn(zero.size(), PenaltyScheme::RiskNeutral);
        const ExtendedMdp e = build_extended(m, zero, rn);
        const ValueTable v = backward_induction(e);
        for (int t = 0; t <= m.horizon; ++t) {
            for (int x : e.layer(t)) {
                const StateId s = e.space().at(x).state;
                CHECK(std::abs(v.value[static_cast<std::size_t>(t)][static_cast<std::size_t>(x)] -
                               base[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)]) <= 1e-12);
            }
        }
    }
}

TEST_CASE("two-action chain: greedy choice flips between lambda 0.2 and 0.5") {
    const Cmdp m = two_action_chain();
    // hand enumeration: risky yields 2 - 3 lambda, safe yields 1
    const ValueTable lo = backward_induction(build_extended(m, 0.2, PenaltyScheme::RiskNeutral));
    CHECK(lo.initial_value() == doctest::Approx(1.4).epsilon(1e-12));
    CHECK(lo.greedy[0][0] == 1);
    const ValueTable hi = backward_induction(build_extended(m, 0.5, PenaltyScheme::RiskNeutral));
    CHECK(hi.initial_value() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hi.greedy[0][0] == 0);
}

TEST_CASE("worst-case values") {
    CHECK(worst_case_value(two_action_chain()) == 1.0);
    CHECK(worst_case_value(three_action_chain()) == 1.5);
    CHECK(worst_case_value(degenerate_chain()) == unconstrained_value(degenerate_chain()));
    ChainSpec both_bad{{{1.0, {{1.0, {3.0}}}}, {2.0, {{1.0, {4.0}}}}}, {2.0}, 1, 1.0};
    CHECK_THROWS_AS((void)worst_case_value(make_chain(both_bad)), WorstCaseInfeasible);
    CHECK_THROWS_AS((void)worst_case_value(fixture_by_name("grid3x3_noisy").model), WorstCaseInfeasible);
}

TEST_CASE("phi star and lambda bounds on the chains") {
    CHECK(max_truncated_cost(two_action_chain()) == 0.0);
    CHECK(phi_star(two_action_chain()) == 2.0);
    CHECK(max_truncated_cost(three_action_chain()) == 2.0);
    CHECK(phi_star(three_action_chain()) == 0.0);

    const BoundsReport b = lambda_bounds(two_action_chain(), 0.25);
    CHECK(b.psi_star == 2.0);
    CHECK(b.psi_bar == 1.0);
    CHECK(b.phi_star[0] == 2.0);
    CHECK(b.lambda_rn[0] == 0.5);
    CHECK(b.lambda_var[0] == 2.0);

    const BoundsReport inf = lambda_bounds(three_action_chain(), 0.25);
    CHECK(std::isinf(inf.lambda_rn[0]));

    const BoundsReport deg = lambda_bounds(degenerate_chain(), 0.5);
    CHECK(deg.lambda_rn[0] == 0.0);
    CHECK(deg.lambda_var[0] == 0.0);
}

TEST_CASE("all-zero-cost model: psi_bar = psi_star and phi_star = budget") {
    Cmdp m = two_action_chain();
    m.costs[0] = {0.0, 0.0, 0.0};
    CHECK(worst_case_value(m) == unconstrained_value(m));
    CHECK(phi_star(m) == m.budgets[0]);
}

TEST_CASE("frozen bounds for the remaining fixtures") {
    // values from the trajectory oracle enumerating every deterministic policy
    struct Expect {
        const char* name;
        double psi_star, psi_bar, lambda_rn;
    };
    for (const Expect x : {Expect{"lottery_chain", 2.5, 2.0, 1.0}, Expect{"grid3x3", 99.0, 97.0, 3.0},
                           Expect{"layered_random", 3.04875, 2.68375, 1.1922169059011156}}) {
        const BoundsReport b = bounds_report(fixture_by_name(x.name).model, 0.25);
        CHECK_MESSAGE(b.psi_star == doctest::Approx(x.psi_star).epsilon(1e-12), x.name);
        CHECK_MESSAGE(b.psi_bar == doctest::Approx(x.psi_bar).epsilon(1e-12), x.name);
        CHECK_MESSAGE(b.lambda_rn[0] == doctest::Approx(x.lambda_rn).epsilon(1e-9), x.name);
    }
    const BoundsReport g = bounds_report(fixture_by_name("grid3x3").model, 0.25);
    CHECK(g.phi_star[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(g.lambda_var[0] == doctest::Approx(8.0).epsilon(1e-9));
}

TEST_CASE("unconstrained value matches an independent path expectation") {
    // grid3x3 is deterministic, so the optimum is the best of a handful of
    // Markov policies; the 2-move route through the pit scores 99
    const Cmdp m = fixture_by_name("grid3x3").model;
    const GridConfig g = small_grid(0.0);
    const int left = 3;  // action 3 moves left
    const double value = testing_support::expect_markov(
        m, [&](int, int) { return left; }, [](const std::vector<int>&, double ret) { return ret; });
    CHECK(value == doctest::Approx(unconstrained_value(m)).epsilon(1e-12));
    const double cost = testing_support::expect_markov(
        m, [&](int, int) { return left; },
        [&](const std::vector<int>& path, double) { return testing_support::path_cost(m, path); });
    CHECK(cost == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(g.budget == 1.0);
}

TEST_CASE("solver and oracle agree on the greedy policy") {
    for (const auto& f : fixture_pack()) {
        const Cmdp& m = f.model;
        for (PenaltyScheme s :
             {PenaltyScheme::RiskNeutral, PenaltyScheme::ValueAtRisk, PenaltyScheme::ConditionalValueAtRisk}) {
            for (double lambda : {0.0, 0.5, 3.0}) {
                const std::vector<double> l(static_cast<std::size_t>(m.num_constraints()), lambda);
                const std::vector<PenaltyScheme> sc(l.size(), s);
                const ExtendedMdp e = build_extended(m, l, sc);
                const ValueTable v = backward_induction(e);
                const OracleStats st = oracle_stats(m, v.policy(m), {l, sc});
                CHECK_MESSAGE(std::abs(st.stepwise_objective - v.initial_value()) <= 1e-9, f.name);
                CHECK(std::abs(st.mass - 1.0) <= 1e-9);
            }
        }
    }
}

TEST_CASE("policy evaluation matches backward induction for the greedy policy") {
    const Cmdp m = fixture_by_name("lottery_chain").model;
    const ExtendedMdp e = build_extended(m, 0.7, PenaltyScheme::ConditionalValueAtRisk);
    const ValueTable v = backward_induction(e);
    CHECK(std::abs(evaluate_policy(e, v.policy(m)) - v.initial_value()) <= 1e-12);
}

TEST_CASE("bounds CSV shape") {
    const std::string rows = bounds_csv_rows("multi", bounds_report(multi_chain(), 0.25));
    CHECK(std::count(rows.begin(), rows.end(), '\n') == 2);
    CHECK(bounds_csv_header().rfind("instance,k,alpha", 0) == 0);
}
