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

// Finite-horizon backward induction over the extended MDP.
//
// Values live in trajectory-return space: V(t, x) is the expected value of
//   sum_{u >= t} gamma^u r(s_u, a_u) - sum_{u >= t} penalty_u
// so penalties are never divided by gamma^t. This is algebraically the same
// objective as summing gamma^t times the per-step penalized reward.

#pragma once

#include <limits>
#include <string>
#include <vector>

#include "cmdp/cmdp.hpp"
#include "cmdp/extended_mdp.hpp"
#include "cmdp/policy.hpp"

namespace cmdp {

/// Two candidate values closer than this are treated as a tie (lowest action wins).
inline constexpr double kTieTolerance = 1e-12;

struct ValueTable {
    int horizon = 0;
    std::vector<std::vector<double>> value;  // [t][x], t = 0..T+1
    std::vector<std::vector<int>> greedy;    // [t][x], t = 0..T-1; -1 outside layer t
    std::shared_ptr<const AugmentedSpace> space;

    double initial_value() const { return value.at(0).at(0); }
    /// Deterministic policy with one layer per decision epoch.
    TabularPolicy policy(const Cmdp& m) const;
};

class WorstCaseInfeasible : public Error {
public:
    WorstCaseInfeasible(const std::string& state_name);
};

/// Unconstrained optimum on the base model: [t][s] values, t = 0..T.
std::vector<std::vector<double>> unconstrained_values(const Cmdp& m);
double unconstrained_value(const Cmdp& m);

ValueTable backward_induction(const ExtendedMdp& e);

/// Expected penalized return of a fixed policy (per-step penalty route).
double evaluate_policy(const ExtendedMdp& e, const TabularPolicy& policy);

struct WorstCaseSolution {
    double value = 0.0;
    ValueTable table;
};

/// Best expected reward over policies that keep every positive-probability
/// trajectory within every budget. Actions that can reach an over-budget
/// state are masked out.
WorstCaseSolution worst_case_solution(const Cmdp& m, const ExtendedOptions& options = {});
double worst_case_value(const Cmdp& m, const ExtendedOptions& options = {});

/// max over policies of sum_{D^k <= c_max^k} P(tau) D^k(tau).
double max_truncated_cost(const Cmdp& m, int k = 0, const ExtendedOptions& options = {});
/// c_max^k minus max_truncated_cost.
double phi_star(const Cmdp& m, int k = 0, const ExtendedOptions& options = {});

struct BoundsReport {
    double alpha = 1.0;
    double psi_star = 0.0;
    double psi_bar = -std::numeric_limits<double>::infinity();
    bool feasible_worst_case = false;
    std::vector<double> phi_star;   // per constraint
    std::vector<double> lambda_rn;  // (psi* - psi_bar) / phi*_k, +inf when phi*_k = 0
    std::vector<double> lambda_var; // (psi* - psi_bar) / (alpha c_max^k)
};

/// Propagates WorstCaseInfeasible.
BoundsReport lambda_bounds(const Cmdp& m, double alpha, const ExtendedOptions& options = {});
/// Same, but reports infeasibility in the result instead of throwing.
BoundsReport bounds_report(const Cmdp& m, double alpha, const ExtendedOptions& options = {});

/// CSV columns: instance,k,alpha,psi_star,psi_bar,feasible,phi_star,lambda_rn,lambda_var
std::string bounds_csv_header();
/// One row per constraint, each terminated by '\n'.
std::string bounds_csv_rows(const std::string& name, const BoundsReport& report);

} // namespace cmdp
