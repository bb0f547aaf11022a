// SPDX-License-Identifier: Apache-2.0
//
// chanbench: wireless channel simulation and ML transfer-evaluation toolkit
// Copyright (C) 2026 The chanbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <CLI11.hpp>

#include <chanbench/cli/experiment.hpp>
#include <chanbench/core/hash.hpp>
#include <chanbench/eval/runner.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace chanbench::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,   ///< malformed command line
    exit_config = 2,  ///< invalid experiment configuration
    exit_runtime = 3, ///< generation, training or I/O failure
    exit_partial = 4  ///< finished, but some cells failed
};

inline constexpr const char *cache_env_var = "CHANBENCH_CACHE_DIR";
inline constexpr const char *tool_version = "1.0.0";

struct Options
{
    std::string command;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    int jobs = 0;
    std::string cache_dir;
    std::string inspect_path;
    bool quiet = false;
};

/// Resolves the cache root: the flag, then the environment, then a default
/// under the working directory.
inline fs::path resolve_cache_dir(const Options &o)
{
    if (!o.cache_dir.empty())
        return o.cache_dir;
    if (const char *env = std::getenv(cache_env_var); env && *env)
        return env;
    return ".chanbench-cache";
}

inline std::string file_sha256(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

class Session
{
public:
    Session(ExperimentConfig cfg, const Options &o, std::ostream &out, std::ostream &err)
        : cfg_(std::move(cfg)), out_(out), err_(err), quiet_(o.quiet)
    {
        if (o.seed)
            cfg_.seed = *o.seed;
        out_dir_ = o.out.empty() ? fs::path(cfg_.output_dir) : fs::path(o.out);
        jobs_ = o.jobs > 0 ? o.jobs : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
        cache_root_ = resolve_cache_dir(o);
        datasets_ = eval::DatasetCache(cache_root_);
        models_ = eval::ModelCache(cache_root_);
        fs::create_directories(out_dir_);
    }

    void log(const std::string &msg)
    {
        if (quiet_)
            return;
        std::lock_guard<std::mutex> lock(log_mutex_);
        err_ << "[chanbench] " << msg << std::endl;
    }

    eval::LogFn logger()
    {
        return [this](const std::string &m) { log(m); };
    }

    /// Datasets of every domain, generated on a cache miss.
    const std::vector<eval::TaskDataset> &datasets()
    {
        if (!loaded_.empty())
            return loaded_;
        json summary = json::array();
        for (const auto &d : cfg_.domains)
        {
            const auto req = cfg_.request_for(d);
            bool hit = false;
            const auto t0 = std::chrono::steady_clock::now();
            loaded_.push_back(datasets_.get(req, jobs_, &hit));
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const auto &ds = loaded_.back();
            log(std::string(hit ? "cache hit: " : "generated: ") + d.name + " (" + ds.hash + ", " +
                std::to_string(ds.size()) + " samples)");
            json entry = {{"domain", d.name},
                          {"hash", ds.hash},
                          {"dir", fs::absolute(datasets_.dir_for(req)).string()},
                          {"samples", ds.size()},
                          {"normalization", ds.manifest.at("normalization")},
                          {"cache_hit", hit}};
            if (ds.manifest.contains("retained_energy"))
                entry["retained_energy"] = ds.manifest.at("retained_energy");
            summary.push_back(entry);
            timings_["generate:" + d.name] = secs;
        }
        dataset_summary_ = summary;
        return loaded_;
    }

    const eval::TaskDataset &dataset(const std::string &name)
    {
        for (const auto &ds : datasets())
            if (ds.domain == name)
                return ds;
        throw std::out_of_range("no dataset for domain '" + name + "'");
    }

    std::vector<const eval::TaskDataset *> dataset_ptrs()
    {
        std::vector<const eval::TaskDataset *> p;
        for (const auto &ds : datasets())
            p.push_back(&ds);
        return p;
    }

    void write_artifact(const std::string &stage, const std::string &file, const std::string &text)
    {
        eval::write_text(out_dir_ / file, text);
        artifacts_[stage].push_back(file);
    }

    /// Records the run in `manifest.json`: the experiment, seed, datasets,
    /// and a digest of every artifact. Stages from earlier invocations with
    /// the same configuration are kept.
    void write_manifest(const std::string &command, const std::string &status)
    {
        const auto file = out_dir_ / "manifest.json";
        const std::string cfg_hash = short_hash(cfg_.source.dump());
        json m;
        if (fs::exists(file))
        {
            try
            {
                m = preprocess::read_json(file);
            }
            catch (const std::exception &)
            {
                m = json();
            }
            if (!m.is_object() || m.value("config_hash", "") != cfg_hash || m.value("seed", json()) != json(cfg_.seed))
                m = json();
        }
        if (m.is_null())
            m = {{"format", "chanbench-run"}, {"version", 1}, {"stages", json::object()}};
        m["tool_version"] = tool_version;
        m["experiment"] = cfg_.name;
        m["config"] = cfg_.source;
        m["config_hash"] = cfg_hash;
        m["seed"] = cfg_.seed;
        m["cache_dir"] = fs::absolute(cache_root_).string();
        if (!dataset_summary_.is_null())
            m["datasets"] = dataset_summary_;
        for (const auto &[stage, files] : artifacts_)
        {
            json a = json::object();
            for (const auto &f : files)
                a[f] = file_sha256(out_dir_ / f);
            m["stages"][stage] = {{"artifacts", a}};
        }
        json t = json::object();
        for (const auto &[k, v] : timings_)
            t[k] = v;
        m["last_command"] = {{"command", command}, {"status", status}, {"seconds", t}};
        preprocess::write_json(file, m);
    }

    const ExperimentConfig &config() const { return cfg_; }
    int jobs() const { return jobs_; }
    const eval::ModelCache &models() const { return models_; }
    std::ostream &out() { return out_; }
    void time(const std::string &k, double s) { timings_[k] = s; }

private:
    ExperimentConfig cfg_;
    std::ostream &out_;
    std::ostream &err_;
    bool quiet_;
    fs::path out_dir_;
    fs::path cache_root_;
    int jobs_ = 1;
    eval::DatasetCache datasets_;
    eval::ModelCache models_;
    std::vector<eval::TaskDataset> loaded_;
    json dataset_summary_;
    std::map<std::string, std::vector<std::string>> artifacts_;
    std::map<std::string, double> timings_;
    std::mutex log_mutex_;
};

namespace detail {

inline std::string db(double v)
{
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << v;
    return s.str();
}

inline int stage_generate(Session &s)
{
    const auto &all = s.datasets();
    json list = json::array();
    for (const auto &ds : all)
        list.push_back({{"domain", ds.domain}, {"hash", ds.hash}, {"manifest", ds.manifest}});
    s.write_artifact("generate", "datasets.json", json{{"datasets", list}}.dump(2) + "\n");
    for (const auto &ds : all)
        s.out() << ds.domain << ": " << ds.size() << " samples, " << ds.inputs.shape_string() << ", "
                << ds.manifest.at("normalization").at("scheme").get<std::string>() << "\n";
    return exit_ok;
}

inline int stage_train(Session &s)
{
    const auto &cfg = s.config();
    auto sets = s.dataset_ptrs();
    const auto n = sets.size(), reps = static_cast<std::size_t>(cfg.repeats);
    std::vector<json> rows(n * reps);
    std::vector<std::string> errors(n * reps);
    eval::parallel_for(n * reps, s.jobs(), [&](std::size_t k) {
        const auto &ds = *sets[k / reps];
        const int r = static_cast<int>(k % reps);
        try
        {
            const auto tm = eval::in_domain(ds, cfg.model, cfg.train, cfg.horizon_ms, eval::repeat_seed(cfg.seed, r),
                                            s.models(), s.logger());
            rows[k] = {{"domain", ds.domain},
                       {"repeat", r},
                       {"seed", tm.seed},
                       {"in_domain_db", tm.in_domain_db},
                       {"epochs_run", tm.epochs_run},
                       {"best_epoch", tm.best_epoch}};
        }
        catch (const std::exception &e)
        {
            errors[k] = e.what();
            rows[k] = {{"domain", ds.domain}, {"repeat", r}, {"failed", true}, {"error", e.what()}};
            s.log("training " + ds.domain + " repeat " + std::to_string(r) + " failed: " + e.what());
        }
    });
    json doc = {{"type", "training_summary"}, {"version", 1}, {"runs", rows}};
    s.write_artifact("train", "training.json", doc.dump(2) + "\n");
    bool failed = false;
    for (std::size_t k = 0; k < rows.size(); ++k)
    {
        failed = failed || !errors[k].empty();
        s.out() << rows[k]["domain"].get<std::string>() << " repeat " << rows[k]["repeat"].get<int>() << ": "
                << (errors[k].empty() ? db(rows[k]["in_domain_db"].get<double>()) + " dB" : "FAILED " + errors[k])
                << "\n";
    }
    return failed ? exit_partial : exit_ok;
}

inline void print_matrix(std::ostream &out, const eval::EvalReport &r, const eval::Matrix &m, const std::string &title)
{
    out << title << " (rows: training domain, columns: test domain, dB)\n";
    out << std::setw(14) << "";
    for (const auto &d : r.domains)
        out << std::setw(14) << d;
    out << "\n";
    for (std::size_t i = 0; i < r.domains.size(); ++i)
    {
        out << std::setw(14) << r.domains[i];
        for (std::size_t j = 0; j < r.domains.size(); ++j)
        {
            const auto &c = m[i][j];
            std::string cell = c.failed ? "failed" : db(c.mean());
            if (!c.failed && c.stddev())
                cell += "+-" + db(*c.stddev());
            out << std::setw(14) << cell;
        }
        out << "\n";
    }
}

inline int stage_evaluate(Session &s)
{
    const auto &cfg = s.config();
    eval::MatrixPlan plan;
    plan.datasets = s.dataset_ptrs();
    plan.model = cfg.model;
    plan.train = cfg.train;
    plan.horizon_ms = cfg.horizon_ms;
    plan.repeats = cfg.repeats;
    plan.seed = cfg.seed;
    plan.fine_tune = cfg.fine_tune;
    plan.jobs = s.jobs();
    plan.cache = s.models();
    plan.log = s.logger();
    const auto report = eval::run_matrix(plan);
    s.write_artifact("evaluate", "report.json", to_json(report).dump(2) + "\n");
    s.write_artifact("evaluate", "report.csv", eval::to_csv(report));
    s.write_artifact("evaluate", "report_plot.csv", eval::to_plot_csv(report));
    print_matrix(s.out(), report, report.cross, "cross-test");
    if (report.fine_tune)
        print_matrix(s.out(), report, *report.fine_tune, "fine-tuned");
    return report.any_failed() ? exit_partial : exit_ok;
}

inline int stage_curve(Session &s)
{
    const auto &cfg = s.config();
    const auto &cs = *cfg.curve;
    const auto &src = s.dataset(cs.source);
    const auto &tgt = s.dataset(cs.target);
    const auto tm = eval::in_domain(src, cfg.model, cfg.train, cfg.horizon_ms, eval::repeat_seed(cfg.seed, 0), s.models(),
                                    s.logger());
    const auto curve = eval::pretrain_curve(tm, cfg.model, tgt, cs.config, derive_seed(cfg.seed, 0xcc), s.logger());
    s.write_artifact("curve", "curve.json", to_json(curve).dump(2) + "\n");
    s.write_artifact("curve", "curve.csv", eval::to_csv(curve));
    s.out() << "pretrain curve " << curve.source << " -> " << curve.target << " (held-out " << curve.holdout
            << " samples, source only " << db(curve.source_only_db) << " dB)\n";
    for (const auto &p : curve.points)
        s.out() << "  " << p.count << " samples: scratch " << db(p.scratch_db) << " dB, pretrained "
                << db(p.pretrained_db) << " dB\n";
    return exit_ok;
}

inline int stage_sweep(Session &s)
{
    const auto &cfg = s.config();
    const auto entries = eval::horizon_sweep(s.dataset_ptrs(), cfg.model, cfg.train, cfg.sweep_horizons_ms,
                                             eval::repeat_seed(cfg.seed, 0), s.jobs(), s.models(), s.logger());
    s.write_artifact("sweep", "sweep.json", eval::sweep_to_json(entries).dump(2) + "\n");
    s.write_artifact("sweep", "sweep.csv", eval::sweep_to_csv(entries));
    for (const auto &e : entries)
        s.out() << e.domain << " @ " << e.horizon_ms << " ms: learned " << db(e.learned_db) << " dB, sample-and-hold "
                << db(e.sample_and_hold_db) << " dB\n";
    return exit_ok;
}

inline int run_stage(Session &s, const std::string &stage)
{
    if (stage == "generate")
        return stage_generate(s);
    if (stage == "train")
        return stage_train(s);
    if (stage == "evaluate")
        return stage_evaluate(s);
    if (stage == "curve")
    {
        if (!s.config().curve)
            throw ConfigError("/curve", "the curve command needs a curve section");
        return stage_curve(s);
    }
    if (stage == "sweep")
    {
        if (s.config().sweep_horizons_ms.empty())
            throw ConfigError("/sweep", "the sweep command needs a sweep section");
        return stage_sweep(s);
    }
    throw std::logic_error("unknown stage " + stage);
}

// ---- inspect ---------------------------------------------------------------

inline void inspect_dataset(std::ostream &out, const fs::path &dir)
{
    const auto ds = eval::load_dataset(dir);
    const auto &m = ds.manifest;
    out << "dataset " << ds.hash << " (" << ds.domain << ", " << to_string(ds.task) << ")\n";
    out << "  inputs: " << ds.inputs.shape_string() << "\n";
    for (const auto &[h, t] : ds.targets)
        out << "  target " << h << " ms: " << t.shape_string() << "\n";
    out << "  normalization: " << m.at("normalization").at("scheme").get<std::string>();
    if (m.at("normalization").contains("scale"))
        out << " (scale " << m.at("normalization").at("scale").get<double>() << ")";
    out << "\n";
    if (m.contains("retained_energy"))
        out << "  energy after delay trim: mean " << m["retained_energy"]["mean"].get<double>() << ", min "
            << m["retained_energy"]["min"].get<double>() << "\n";
    out << "  seed: " << m.at("seed") << ", generator: " << m.at("generator").at("type").get<std::string>() << "\n";
}

inline void inspect_report(std::ostream &out, const eval::EvalReport &r)
{
    out << "report: " << to_string(r.task) << ", " << r.domains.size() << " domains, " << r.repeats << " repeat(s)";
    if (r.task == eval::Task::prediction)
        out << ", horizon " << r.horizon_ms << " ms";
    out << "\n";
    auto summary = [&](const eval::Matrix &m, const std::string &title) {
        print_matrix(out, r, m, title);
        out << "  diagonal / mean off-diagonal per training domain:\n";
        for (std::size_t i = 0; i < r.domains.size(); ++i)
        {
            double s = 0.0;
            int k = 0;
            for (std::size_t j = 0; j < r.domains.size(); ++j)
                if (j != i && !m[i][j].failed)
                {
                    s += m[i][j].mean();
                    ++k;
                }
            out << "    " << r.domains[i] << ": " << (m[i][i].failed ? "failed" : db(m[i][i].mean())) << " / "
                << (k ? db(s / k) : "n/a") << "\n";
        }
    };
    summary(r.cross, "cross-test");
    if (r.fine_tune)
        summary(*r.fine_tune, "fine-tuned");
    if (r.any_failed())
        out << "  some cells failed; see report.json for the errors\n";
}

/// Prints whatever chanbench artifacts live at `path`. Returns false when
/// nothing recognizable was found.
inline bool inspect_path(std::ostream &out, const fs::path &path)
{
    if (!fs::exists(path))
        return false;
    bool found = false;
    auto inspect_json_file = [&](const fs::path &f) {
        const json j = preprocess::read_json(f);
        const std::string type = j.is_object() ? j.value("type", j.value("format", "")) : "";
        if (type == "eval_report")
            inspect_report(out, eval::eval_report_from_json(j, f.string()));
        else if (type == "curve_report")
        {
            const auto c = eval::curve_from_json(j, f.string());
            out << "curve " << c.source << " -> " << c.target << ", held-out " << c.holdout << "\n";
            for (const auto &p : c.points)
                out << "  " << p.count << " samples: scratch " << db(p.scratch_db) << " dB, pretrained "
                    << db(p.pretrained_db) << " dB\n";
        }
        else if (type == "sweep_report")
            for (const auto &e : eval::sweep_from_json(j, f.string()))
                out << e.domain << " @ " << e.horizon_ms << " ms: learned " << db(e.learned_db)
                    << " dB, sample-and-hold " << db(e.sample_and_hold_db) << " dB\n";
        else if (type == "chanbench-checkpoint")
        {
            const auto info = nn::read_checkpoint_info(f.parent_path());
            out << "checkpoint " << info.config_hash << ": " << info.arch << " " << info.config.dump() << ", epoch "
                << info.epoch << ", validation " << db(info.val_nmse_db) << " dB\n";
        }
        else
            return false;
        return true;
    };

    if (fs::is_regular_file(path))
        return inspect_json_file(path);

    if (fs::exists(path / "manifest.json") &&
        preprocess::read_json(path / "manifest.json").value("format", "") == "chanbench-dataset")
    {
        inspect_dataset(out, path);
        return true;
    }
    for (const char *f : {"report.json", "curve.json", "sweep.json"})
        if (fs::exists(path / f))
            found = inspect_json_file(path / f) || found;
    if (fs::exists(path / "manifest.json") && !found)
        found = inspect_json_file(path / "manifest.json");
    if (fs::exists(path / "datasets.json"))
    {
        const auto list = preprocess::read_json(path / "datasets.json");
        for (const auto &d : list.at("datasets"))
        {
            out << d.at("domain").get<std::string>() << ": dataset " << d.at("hash").get<std::string>() << ", "
                << d.at("manifest").at("shapes").at("inputs").dump() << ", "
                << d.at("manifest").at("normalization").at("scheme").get<std::string>() << "\n";
        }
        found = true;
    }
    if (fs::is_directory(path / "datasets"))
        for (const auto &e : fs::directory_iterator(path / "datasets"))
            if (e.is_directory() && fs::exists(e.path() / "manifest.json"))
            {
                inspect_dataset(out, e.path());
                found = true;
            }
    return found;
}

} // namespace detail

/// Entry point shared by the executable and the tests.
inline int run_cli(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr)
{
    CLI::App app{"Channel-model transfer benchmark: dataset generation, training and cross-domain evaluation"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config,-c", o.config, "Experiment configuration (JSON)")->required();
        sub->add_option("--seed", o.seed, "Override the experiment seed");
        sub->add_option("--out,-o", o.out, "Output directory (default: the config's output_dir)");
        sub->add_option("--jobs,-j", o.jobs, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
        sub->add_option("--cache-dir", o.cache_dir,
                        std::string("Dataset and model cache (default: $") + cache_env_var + " or .chanbench-cache)");
        sub->add_flag("--quiet,-q", o.quiet, "Suppress progress messages");
    };
    const std::vector<std::pair<std::string, std::string>> commands{
        {"generate", "Generate (or load cached) datasets for every domain"},
        {"train", "Train one model per domain and repeat; report in-domain NMSE"},
        {"evaluate", "Cross-test matrix, plus fine-tuning when configured"},
        {"curve", "Scratch versus pretrained learning curve on the target domain"},
        {"sweep", "Learned versus sample-and-hold NMSE across horizons"},
        {"run", "Run the stages listed in the configuration"}};
    for (const auto &[name, help] : commands)
    {
        auto *sub = app.add_subcommand(name, help);
        add_common(sub);
        sub->callback([&o, n = name] { o.command = n; });
    }
    auto *insp = app.add_subcommand("inspect", "Summarize a dataset, report, run directory or cache");
    insp->add_option("path", o.inspect_path, "Path to inspect")->required();
    insp->callback([&o] { o.command = "inspect"; });

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try
    {
        if (o.command == "inspect")
        {
            if (!detail::inspect_path(out, o.inspect_path))
            {
                err << "error: no chanbench dataset, report or run found at '" << o.inspect_path << "'\n";
                return exit_runtime;
            }
            return exit_ok;
        }

        auto cfg = load_experiment(o.config);
        Session s(std::move(cfg), o, out, err);
        const auto stages = o.command == "run" ? s.config().stages : std::vector<std::string>{o.command};
        int code = exit_ok;
        for (const auto &stage : stages)
        {
            const auto t0 = std::chrono::steady_clock::now();
            int rc = exit_ok;
            try
            {
                rc = detail::run_stage(s, stage);
            }
            catch (...)
            {
                s.write_manifest(o.command, "failed in " + stage);
                throw;
            }
            s.time(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            code = std::max(code, rc);
        }
        s.write_manifest(o.command, code == exit_ok ? "ok" : "partial");
        return code;
    }
    catch (const ConfigError &e)
    {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    }
    catch (const std::exception &e)
    {
        err << "error: " << e.what() << "\n";
        return exit_runtime;
    }
}

} // namespace chanbench::cli
