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

// Batch commands behind the command-line tool. Each returns a process exit
// code: 0 success, 1 check or run failure, 2 configuration error.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cmdp/config.hpp"

namespace cmdp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

struct RunOptions {
    std::string out_dir = ".";
    int jobs = 1;
};

/// One job per (seed, lambda) pair. Writes train_<tag>.csv and
/// checkpoint_<tag>.txt per job, train_aggregate[_lambda<i>].csv and
/// train_summary.csv.
int cmd_train(const ExperimentConfig& cfg, const RunOptions& run, std::ostream& out);

/// Monte-Carlo evaluation of one checkpoint file or every checkpoint_*.txt
/// in a directory; writes eval_report.csv.
int cmd_evaluate(const ExperimentConfig& cfg, const RunOptions& run, const std::string& checkpoint, std::ostream& out);

/// Runs the configured verification kinds; writes verify.csv.
int cmd_verify(const ExperimentConfig& cfg, const RunOptions& run, std::ostream& out);

/// Bounds report for the configured model(s); writes bounds.csv.
int cmd_bounds(const ExperimentConfig& cfg, const RunOptions& run, std::ostream& out);

/// Training log CSV (episode, return, final_cost, lambda, epsilon_or_entropy, wall_ms);
/// extra constraints append final_cost_<k>, lambda_<k>.
std::string training_log_csv(const std::vector<EpisodeLog>& log);

/// First episode whose trailing window of `window` final costs has mean <= budget
/// for every constraint, or -1.
int episodes_to_satisfaction(const std::vector<EpisodeLog>& log, int window, const std::vector<double>& budgets);

/// Mean and sample standard deviation (0 for a single value).
std::pair<double, double> mean_std(const std::vector<double>& values);

} // namespace cmdp
