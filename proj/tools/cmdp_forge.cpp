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

#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cmdp/config.hpp"
#include "cmdp/experiment.hpp"

namespace {

struct Args {
    std::string config;
    std::string out;
    std::string seeds;
    int jobs = 1;
    std::string checkpoint;
    std::string cmdp_file;
    double alpha = -1.0;
};

cmdp::ExperimentConfig make_config(const Args& a, bool fixture_default) {
    cmdp::ExperimentConfig cfg;
    if (!a.config.empty()) {
        cfg = cmdp::load_config(a.config);
    } else if (fixture_default) {
        std::istringstream in("env.kind = fixture\nenv.fixture = all\n");
        cfg = cmdp::parse_config(in);
    }
    if (!a.seeds.empty()) cfg.seeds = cmdp::parse_seed_list(a.seeds, "--seeds");
    if (!a.cmdp_file.empty()) {
        std::ostringstream text;
        text << "env.kind = file\nenv.file = " << a.cmdp_file << '\n';
        std::istringstream in(text.str());
        cfg.env = cmdp::parse_config(in).env;
    }
    if (a.alpha >= 0.0) {
        if (!(a.alpha > 0.0 && a.alpha <= 1.0)) throw cmdp::ConfigError("--alpha must lie in (0, 1]");
        cfg.alpha = a.alpha;
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained MDP toolkit: extended-MDP solving, safe RL training and bound verification"};
    app.require_subcommand(1);
    Args a;
    if (const char* env_out = std::getenv("CMDP_FORGE_OUT")) a.out = env_out;
    if (a.out.empty()) a.out = ".";

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", a.config, "Experiment config file")->check(CLI::ExistingFile);
        sub->add_option("--out", a.out, "Output directory (default: $CMDP_FORGE_OUT or .)");
        sub->add_option("--seeds", a.seeds, "Comma-separated seed list, overrides the config");
        sub->add_option("--jobs", a.jobs, "Parallel jobs")->check(CLI::PositiveNumber);
    };
    auto* train = app.add_subcommand("train", "Train the configured learner for every seed (and lambda grid point)");
    common(train);
    auto* evaluate = app.add_subcommand("evaluate", "Monte-Carlo evaluation of checkpoints");
    common(evaluate);
    evaluate->add_option("--checkpoint", a.checkpoint, "Checkpoint file or directory of checkpoint_*.txt");
    auto* verify = app.add_subcommand("verify", "Run the verification suites against the trajectory oracle");
    common(verify);
    auto* bounds = app.add_subcommand("bounds", "Print value bounds and penalty thresholds");
    common(bounds);
    bounds->add_option("--cmdp", a.cmdp_file, "CMDP model file")->check(CLI::ExistingFile);
    bounds->add_option("--alpha", a.alpha, "VaR level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cmdp::kExitOk : cmdp::kExitConfig;
    }

    cmdp::ExperimentConfig cfg;
    try {
        const bool fixtures = verify->parsed() || bounds->parsed();
        cfg = make_config(a, fixtures);
        if (evaluate->parsed() && a.checkpoint.empty() && cfg.checkpoint.empty()) {
            throw cmdp::ConfigError("evaluate needs --checkpoint or a checkpoint key");
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cmdp::kExitConfig;
    }

    const cmdp::RunOptions run{a.out, a.jobs};
    try {
        if (train->parsed()) return cmdp::cmd_train(cfg, run, std::cout);
        if (evaluate->parsed()) return cmdp::cmd_evaluate(cfg, run, a.checkpoint, std::cout);
        if (verify->parsed()) return cmdp::cmd_verify(cfg, run, std::cout);
        return cmdp::cmd_bounds(cfg, run, std::cout);
    } catch (const cmdp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cmdp::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cmdp::kExitFailure;
    }
}
