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

#include "cmdp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "cmdp/numeric.hpp"
#include "cmdp/rollout.hpp"
#include "cmdp/solver.hpp"

namespace cmdp {

namespace fs = std::filesystem;

namespace {

void run_jobs(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
    const auto workers = static_cast<std::size_t>(std::max(1, jobs));
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

fs::path prepare_dir(const std::string& dir) {
    fs::path p(dir.empty() ? "." : dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (!fs::is_directory(p)) throw Error("cannot create output directory " + p.string());
    return p;
}

std::string d2s(double v) { return format_double(v); }

} // namespace

std::pair<double, double> mean_std(const std::vector<double>& values) {
    if (values.empty()) return {0.0, 0.0};
    CompensatedSum s;
    for (double v : values) s.add(v);
    const double mean = s.value() / static_cast<double>(values.size());
    if (values.size() < 2) return {mean, 0.0};
    CompensatedSum sq;
    for (double v : values) sq.add((v - mean) * (v - mean));
    return {mean, std::sqrt(sq.value() / static_cast<double>(values.size() - 1))};
}

std::string training_log_csv(const std::vector<EpisodeLog>& log) {
    const std::size_t K = log.empty() ? 1 : log.front().final_cost.size();
    std::ostringstream os;
    os << "episode,return,final_cost,lambda,epsilon_or_entropy,wall_ms";
    for (std::size_t k = 1; k < K; ++k) os << ",final_cost_" << k << ",lambda_" << k;
    os << '\n';
    for (const auto& e : log) {
        os << e.episode << ',' << d2s(e.ret) << ',' << d2s(e.final_cost[0]) << ',' << d2s(e.lambda[0]) << ','
           << d2s(e.explore) << ',' << d2s(e.wall_ms);
        for (std::size_t k = 1; k < K; ++k) os << ',' << d2s(e.final_cost[k]) << ',' << d2s(e.lambda[k]);
        os << '\n';
    }
    return os.str();
}

int episodes_to_satisfaction(const std::vector<EpisodeLog>& log, int window, const std::vector<double>& budgets) {
    if (window < 1) return -1;
    const auto w = static_cast<std::size_t>(window);
    std::vector<double> sum(budgets.size(), 0.0);
    for (std::size_t i = 0; i < log.size(); ++i) {
        for (std::size_t k = 0; k < budgets.size(); ++k) {
            sum[k] += log[i].final_cost[k];
            if (i >= w) sum[k] -= log[i - w].final_cost[k];
        }
        if (i + 1 < w) continue;
        bool ok = true;
        for (std::size_t k = 0; k < budgets.size(); ++k) ok = ok && sum[k] / static_cast<double>(w) <= budgets[k] + 1e-12;
        if (ok) return static_cast<int>(i);
    }
    return -1;
}

// -------------------------------------------------------------------- train

namespace {

struct TrainJob {
    std::uint64_t seed = 0;
    int lambda_index = -1;
    std::string tag;
    LearnerConfig learning;
};

struct TrainOutcome {
    bool ok = false;
    std::string message;
    std::vector<EpisodeLog> log;
};

std::string aggregate_csv(const std::vector<const std::vector<EpisodeLog>*>& logs) {
    std::ostringstream os;
    const std::size_t K = logs.front()->empty() ? 1 : logs.front()->front().final_cost.size();
    os << "episode,return_mean,return_std,final_cost_mean,final_cost_std,lambda_mean,lambda_std,"
          "epsilon_or_entropy_mean,epsilon_or_entropy_std";
    for (std::size_t k = 1; k < K; ++k) {
        os << ",final_cost_" << k << "_mean,final_cost_" << k << "_std,lambda_" << k << "_mean,lambda_" << k << "_std";
    }
    os << ",runs\n";
    std::size_t episodes = 0;
    for (const auto* l : logs) episodes = std::max(episodes, l->size());
    for (std::size_t e = 0; e < episodes; ++e) {
        std::vector<double> ret, explore;
        std::vector<std::vector<double>> cost(K), lam(K);
        for (const auto* l : logs) {
            if (e >= l->size()) continue;
            const EpisodeLog& x = (*l)[e];
            ret.push_back(x.ret);
            explore.push_back(x.explore);
            for (std::size_t k = 0; k < K; ++k) {
                cost[k].push_back(x.final_cost[k]);
                lam[k].push_back(x.lambda[k]);
            }
        }
        auto put = [&](const std::vector<double>& v) {
            const auto [m, s] = mean_std(v);
            os << ',' << d2s(m) << ',' << d2s(s);
        };
        os << e;
        put(ret);
        put(cost[0]);
        put(lam[0]);
        put(explore);
        for (std::size_t k = 1; k < K; ++k) {
            put(cost[k]);
            put(lam[k]);
        }
        os << ',' << ret.size() << '\n';
    }
    return os.str();
}

} // namespace

int cmd_train(const ExperimentConfig& cfg, const RunOptions& run, std::ostream& out) {
    const fs::path dir = prepare_dir(run.out_dir);
    std::vector<TrainJob> jobs;
    const std::size_t grid_size = cfg.lambda_grid ? cfg.lambda_grid->size() : 0;
    for (std::uint64_t seed : cfg.seeds) {
        if (grid_size == 0) {
            jobs.push_back({seed, -1, "seed" + std::to_string(seed), cfg.learning});
            continue;
        }
        for (std::size_t i = 0; i < grid_size; ++i) {
            TrainJob job{seed, static_cast<int>(i), "seed" + std::to_string(seed) + "_lambda" + std::to_string(i), cfg.learning};
            std::fill(job.learning.lambda0.begin(), job.learning.lambda0.end(), (*cfg.lambda_grid)[i]);
            jobs.push_back(std::move(job));
        }
    }

    const auto probe = cfg.env.environment();
    const std::vector<double> budgets = probe->budgets();
    std::vector<TrainOutcome> results(jobs.size());
    run_jobs(jobs.size(), run.jobs, [&](std::size_t i) {
        const TrainJob& job = jobs[i];
        TrainOutcome& res = results[i];
        try {
            const auto env = cfg.env.environment();
            TrainResult r = cfg.learner == LearnerKind::SafeQ ? safe_q_learning(*env, job.learning, job.seed)
                                                              : safe_actor_critic(*env, job.learning, job.seed);
            write_file(dir / ("train_" + job.tag + ".csv"), training_log_csv(r.log));
            save_checkpoint((dir / ("checkpoint_" + job.tag + ".txt")).string(), r.checkpoint);
            res.log = std::move(r.log);
            res.ok = true;
        } catch (const std::exception& e) {
            res.message = e.what();
        }
    });

    std::ostringstream summary;
    summary << "tag,seed,lambda0,status,tail_episodes,tail_return_mean,tail_cost_mean,episodes_to_satisfaction,message\n";
    bool failed = false;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& job = jobs[i];
        const auto& res = results[i];
        summary << job.tag << ',' << job.seed << ',' << d2s(job.learning.lambda0[0]) << ',' << (res.ok ? "ok" : "failed");
        if (res.ok) {
            const std::size_t tail = std::min<std::size_t>(1000, res.log.size());
            std::vector<double> r, c;
            for (std::size_t e = res.log.size() - tail; e < res.log.size(); ++e) {
                r.push_back(res.log[e].ret);
                c.push_back(res.log[e].final_cost[0]);
            }
            summary << ',' << tail << ',' << d2s(mean_std(r).first) << ',' << d2s(mean_std(c).first) << ','
                    << episodes_to_satisfaction(res.log, job.learning.window, budgets) << ",\n";
        } else {
            failed = true;
            std::string msg = res.message;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            summary << ",0,0,0,-1," << msg << '\n';
            out << "job " << job.tag << " failed: " << res.message << '\n';
        }
    }
    write_file(dir / "train_summary.csv", summary.str());

    const int groups = grid_size == 0 ? 1 : static_cast<int>(grid_size);
    for (int g = 0; g < groups; ++g) {
        std::vector<const std::vector<EpisodeLog>*> logs;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (results[i].ok && (grid_size == 0 || jobs[i].lambda_index == g)) logs.push_back(&results[i].log);
        }
        if (logs.empty()) continue;
        const std::string name = grid_size == 0 ? "train_aggregate.csv" : "train_aggregate_lambda" + std::to_string(g) + ".csv";
        write_file(dir / name, aggregate_csv(logs));
    }
    out << "trained " << jobs.size() << " run(s) with " << learner_name(cfg.learner) << " into " << dir.string() << '\n';
    return failed ? kExitFailure : kExitOk;
}

// ----------------------------------------------------------------- evaluate

namespace {

std::vector<fs::path> checkpoint_files(const std::string& path) {
    std::vector<fs::path> out;
    const fs::path p(path);
    if (fs::is_directory(p)) {
        for (const auto& entry : fs::directory_iterator(p)) {
            const std::string name = entry.path().filename().string();
            if (entry.is_regular_file() && name.rfind("checkpoint_", 0) == 0 && entry.path().extension() == ".txt") {
                out.push_back(entry.path());
            }
        }
        std::sort(out.begin(), out.end());
    } else {
        out.push_back(p);
    }
    return out;
}

std::uint64_t seed_from_tag(const std::string& tag, std::uint64_t fallback) {
    if (tag.rfind("seed", 0) != 0) return fallback;
    const auto end = tag.find('_');
    auto v = parse_int(tag.substr(4, end == std::string::npos ? std::string::npos : end - 4));
    return v && *v >= 0 ? static_cast<std::uint64_t>(*v) : fallback;
}

// Reads the final-cost columns back from a training log written by cmd_train.
std::vector<EpisodeLog> read_training_log(const fs::path& path) {
    std::vector<EpisodeLog> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    if (!std::getline(in, line)) return out;
    std::vector<int> cost_cols;
    {
        std::istringstream hs(line);
        std::string col;
        int i = 0;
        while (std::getline(hs, col, ',')) {
            if (col == "final_cost" || col.rfind("final_cost_", 0) == 0) cost_cols.push_back(i);
            ++i;
        }
    }
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        EpisodeLog e;
        for (int c : cost_cols) {
            if (static_cast<std::size_t>(c) >= cells.size()) return {};
            auto v = parse_double(cells[static_cast<std::size_t>(c)]);
            if (!v) return {};
            e.final_cost.push_back(*v);
        }
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace

int cmd_evaluate(const ExperimentConfig& cfg, const RunOptions& run, const std::string& checkpoint, std::ostream& out) {
    const std::string source = checkpoint.empty() ? cfg.checkpoint : checkpoint;
    if (source.empty()) throw ConfigError("evaluate needs a checkpoint (--checkpoint or checkpoint = ...)");
    const fs::path dir = prepare_dir(run.out_dir);
    const auto files = checkpoint_files(source);
    if (files.empty()) throw Error("no checkpoint_*.txt files in " + source);

    struct EvalRow {
        std::string tag;
        std::uint64_t seed = 0;
        RolloutStats stats;
        int to_satisfaction = -1;
        std::string error;
    };
    std::vector<EvalRow> rows(files.size());
    run_jobs(files.size(), run.jobs, [&](std::size_t i) {
        EvalRow& row = rows[i];
        std::string tag = files[i].stem().string();
        if (tag.rfind("checkpoint_", 0) == 0) tag = tag.substr(11);
        row.tag = tag;
        row.seed = seed_from_tag(tag, i);
        try {
            const auto env = cfg.env.environment();
            CheckpointPolicy policy(load_checkpoint(files[i].string()));
            if (policy.checkpoint().num_states != env->num_states() || policy.checkpoint().num_actions != env->num_actions()) {
                throw Error("checkpoint shape does not match the configured environment");
            }
            row.stats = rollout(*env, checkpoint_action_fn(policy), cfg.eval_episodes, row.seed ^ 0x9E3779B97F4A7C15ULL);
            const auto log = read_training_log(files[i].parent_path() / ("train_" + tag + ".csv"));
            if (!log.empty() && log.front().final_cost.size() == env->budgets().size()) {
                row.to_satisfaction = episodes_to_satisfaction(log, cfg.learning.window, env->budgets());
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });

    std::ostringstream os;
    os << "checkpoint,seed,episodes,return_mean,return_se,cost_mean,cost_se,violation_prob,violation_se,cvar_excess,"
          "cvar_excess_se,episodes_to_satisfaction\n";
    bool failed = false;
    std::vector<double> ret, cost, viol, excess;
    for (const auto& r : rows) {
        if (!r.error.empty()) {
            failed = true;
            out << "checkpoint " << r.tag << " failed: " << r.error << '\n';
            continue;
        }
        const auto& s = r.stats;
        os << r.tag << ',' << r.seed << ',' << s.episodes << ',' << d2s(s.ret.mean) << ',' << d2s(s.ret.se) << ','
           << d2s(s.cost[0].mean) << ',' << d2s(s.cost[0].se) << ',' << d2s(s.violation[0].mean) << ','
           << d2s(s.violation[0].se) << ',' << d2s(s.excess[0].mean) << ',' << d2s(s.excess[0].se) << ','
           << r.to_satisfaction << '\n';
        ret.push_back(s.ret.mean);
        cost.push_back(s.cost[0].mean);
        viol.push_back(s.violation[0].mean);
        excess.push_back(s.excess[0].mean);
    }
    if (!ret.empty()) {
        // Aggregate rows: mean over checkpoints in the *_mean columns,
        // standard deviation over checkpoints in the *_se columns.
        const auto [rm, rs] = mean_std(ret);
        const auto [cm, cs] = mean_std(cost);
        const auto [vm, vs] = mean_std(viol);
        const auto [em, es] = mean_std(excess);
        os << "aggregate,-," << ret.size() << ',' << d2s(rm) << ',' << d2s(rs) << ',' << d2s(cm) << ',' << d2s(cs) << ','
           << d2s(vm) << ',' << d2s(vs) << ',' << d2s(em) << ',' << d2s(es) << ",-1\n";
        out << "evaluated " << ret.size() << " checkpoint(s): return " << d2s(rm) << " +- " << d2s(rs) << ", cost "
            << d2s(cm) << " +- " << d2s(cs) << ", P(D>c) " << d2s(vm) << '\n';
    }
    write_file(dir / "eval_report.csv", os.str());
    return failed ? kExitFailure : kExitOk;
}

// ------------------------------------------------------------------- verify

int cmd_verify(const ExperimentConfig& cfg, const RunOptions& run, std::ostream& out) {
    const fs::path dir = prepare_dir(run.out_dir);
    const auto fixtures = cfg.env.fixtures();
    const VerifyOptions options = cfg.verify_options();
    std::vector<std::pair<VerifyKind, std::size_t>> tasks;
    for (VerifyKind kind : cfg.verify_kinds) {
        for (std::size_t f = 0; f < fixtures.size(); ++f) tasks.emplace_back(kind, f);
    }
    std::vector<std::vector<VerifyRow>> parts(tasks.size());
    run_jobs(tasks.size(), run.jobs, [&](std::size_t i) {
        const auto [kind, f] = tasks[i];
        try {
            parts[i] = verify(kind, fixtures[f], options);
        } catch (const std::exception& e) {
            parts[i] = {{kind, fixtures[f].name, "-", 0.0, 0.0, 0.0, RowStatus::Fail, e.what()}};
        }
    });
    std::vector<VerifyRow> rows;
    for (auto& p : parts) rows.insert(rows.end(), p.begin(), p.end());

    std::string csv = verify_csv_header();
    for (const auto& r : rows) csv += verify_csv_row(r);
    write_file(dir / "verify.csv", csv);
    out << verify_summary(rows);
    for (const auto& r : rows) {
        if (r.status == RowStatus::Fail) out << "FAIL " << verify_csv_row(r);
    }
    const bool failed = any_failed(rows);
    out << (failed ? "verification failed" : "verification passed") << " (" << rows.size() << " rows, "
        << (dir / "verify.csv").string() << ")\n";
    return failed ? kExitFailure : kExitOk;
}

// ------------------------------------------------------------------- bounds

int cmd_bounds(const ExperimentConfig& cfg, const RunOptions& run, std::ostream& out) {
    const fs::path dir = prepare_dir(run.out_dir);
    std::string csv = bounds_csv_header();
    for (const auto& f : cfg.env.fixtures()) csv += bounds_csv_rows(f.name, bounds_report(f.model, cfg.alpha, cfg.verify.extended));
    write_file(dir / "bounds.csv", csv);
    out << csv;
    return kExitOk;
}

} // namespace cmdp
