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

// Experiment configuration: line-oriented `key = value` text with `#`
// comments and dotted keys. Every key is typed and range-checked before any
// run starts; unknown keys are errors.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cmdp/environments.hpp"
#include "cmdp/learners.hpp"
#include "cmdp/verify.hpp"

namespace cmdp {

class ConfigError : public Error {
public:
    using Error::Error;
};

struct ConfigEntry {
    std::string value;
    int line = 0;
};

/// Raw key/value pairs; a repeated key is an error.
std::map<std::string, ConfigEntry> parse_key_values(std::istream& in);

enum class EnvKind { Grid, Chain, Fixture, File };

struct EnvSpec {
    EnvKind kind = EnvKind::Grid;
    GridConfig grid = desk_grid();
    bool sampled = true;          // grid only: sampled (learners) or exact kernel
    std::string name = "desk";    // grid preset, chain name, fixture name ("all" = pack) or file path
    std::optional<double> gamma;  // overrides the model discount

    /// Exact model (grid kernel, chain, fixture or file).
    Cmdp model() const;
    /// Sampling environment for learners and evaluation.
    std::unique_ptr<Environment> environment() const;
    /// Instances for the verification suites.
    std::vector<Fixture> fixtures() const;
};

enum class LearnerKind { SafeQ, SafeActorCritic };

struct ExperimentConfig {
    EnvSpec env;
    LearnerKind learner = LearnerKind::SafeActorCritic;
    LearnerConfig learning;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    int eval_episodes = 1000;
    double alpha = 0.25;
    std::optional<std::vector<double>> lambda_grid;
    std::vector<VerifyKind> verify_kinds{std::begin(kAllVerifyKinds), std::end(kAllVerifyKinds)};
    VerifyOptions verify;
    std::string checkpoint;

    VerifyOptions verify_options() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Comma-separated lists, used for both config values and CLI overrides.
std::vector<double> parse_double_list(const std::string& text, const std::string& key);
std::vector<std::uint64_t> parse_seed_list(const std::string& text, const std::string& key);

std::string_view learner_name(LearnerKind kind) noexcept;

} // namespace cmdp
