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

#include <chanbench/eval/dataset.hpp>
#include <chanbench/nn/checkpoint.hpp>
#include <chanbench/nn/train.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace chanbench::eval {

using LogFn = std::function<void(const std::string &)>;

/// Row indices of a random train/validation/test partition.
struct Split
{
    std::vector<std::size_t> train, val, test;
};

/// Throws std::logic_error when any two index sets share an element.
inline void assert_disjoint(std::initializer_list<std::span<const std::size_t>> sets, const std::string &what)
{
    std::set<std::size_t> seen;
    for (const auto &s : sets)
        for (std::size_t i : s)
            if (!seen.insert(i).second)
                throw std::logic_error(what + ": sample " + std::to_string(i) + " appears in two disjoint sets");
}

inline std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed)
{
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

inline Split make_split(std::size_t n, double train_fraction, double val_fraction, std::uint64_t seed)
{
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 1e-9));
    const auto n_val = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(n) + 1e-9));
    if (n_train == 0 || n_val == 0 || n_train + n_val > n)
        throw std::invalid_argument("make_split: " + std::to_string(n) + " samples are too few for the split");
    const auto p = permutation(n, seed);
    Split s;
    s.train.assign(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val.assign(p.begin() + static_cast<std::ptrdiff_t>(n_train), p.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(p.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), p.end());
    assert_disjoint({s.train, s.val, s.test}, "make_split");
    return s;
}

inline Split make_split(std::size_t n, const nn::TrainConfig &cfg, std::uint64_t seed)
{
    return make_split(n, cfg.train_fraction, cfg.val_fraction, seed);
}

/// Architecture plus options; input shapes come from the dataset.
struct ModelSpec
{
    std::string arch = nn::csinet_arch;
    json options = json::object();
};

inline json model_config_for(const ModelSpec &spec, const TaskDataset &ds)
{
    json c = spec.options.is_null() ? json::object() : spec.options;
    if (spec.arch == nn::csinet_arch)
    {
        if (ds.task != Task::compression)
            throw std::invalid_argument("model '" + spec.arch + "' needs a compression dataset");
        c["n_delay"] = ds.inputs.dim(2);
        c["n_angle"] = ds.inputs.dim(3);
    }
    else if (spec.arch == nn::gru_arch)
    {
        if (ds.task != Task::prediction)
            throw std::invalid_argument("model '" + spec.arch + "' needs a prediction dataset");
        c["n_features"] = ds.inputs.dim(2);
        c["window_length"] = ds.inputs.dim(1);
    }
    else
        throw std::invalid_argument("unknown model architecture '" + spec.arch + "'");
    return c;
}

inline nn::Model<float> build_for(const ModelSpec &spec, const TaskDataset &ds, std::uint64_t seed)
{
    return nn::build_model<float>(spec.arch, model_config_for(spec, ds), seed);
}

inline nn::Model<float> clone_model(nn::Model<float> &m)
{
    auto c = nn::build_model<float>(m.arch(), m.config(), m.seed());
    c.load_state(m.state());
    return c;
}

inline double nmse_db_on(nn::Model<float> &model, const TaskDataset &ds, int horizon_ms,
                         std::span<const std::size_t> rows)
{
    if (rows.empty())
        throw std::invalid_argument("evaluation on an empty set of samples");
    return nn::evaluate_nmse_db(model, ds.supervised(horizon_ms, rows));
}

inline std::vector<std::size_t> all_rows(const TaskDataset &ds)
{
    std::vector<std::size_t> r(ds.size());
    std::iota(r.begin(), r.end(), std::size_t{0});
    return r;
}

/// A model trained on one domain together with its split.
struct TrainedModel
{
    std::string domain;
    std::string dataset_hash;
    int horizon_ms = 0;
    std::uint64_t seed = 0;
    std::shared_ptr<nn::Model<float>> model;
    Split split;
    double in_domain_db = 0.0;
    int best_epoch = 0;
    int epochs_run = 0;
    bool from_cache = false;
};

/// Checkpoints of trained models keyed by a hash of everything that
/// determines them: `root/models/<hash>`.
class ModelCache
{
public:
    ModelCache() = default;
    explicit ModelCache(std::filesystem::path root) : root_(std::move(root)) {}

    bool enabled() const { return !root_.empty(); }
    std::filesystem::path dir_for(const std::string &key) const { return root_ / "models" / key; }

    std::optional<json> find(const std::string &key) const
    {
        if (!enabled())
            return std::nullopt;
        const auto f = dir_for(key) / "result.json";
        if (!std::filesystem::exists(f))
            return std::nullopt;
        return preprocess::read_json(f);
    }

    void store(const std::string &key, nn::Model<float> &model, const nn::CheckpointInfo &info, const json &result) const
    {
        if (!enabled())
            return;
        const auto dir = dir_for(key);
        const std::filesystem::path tmp = dir.string() + ".partial";
        std::filesystem::remove_all(tmp);
        nn::save_checkpoint(tmp, model, info);
        preprocess::write_json(tmp / "result.json", result);
        std::filesystem::remove_all(dir);
        std::filesystem::rename(tmp, dir);
    }

private:
    std::filesystem::path root_;
};

/// Trains on the 80/10/10 split of `ds` and reports NMSE on its test part.
inline TrainedModel in_domain(const TaskDataset &ds, const ModelSpec &spec, nn::TrainConfig cfg, int horizon_ms,
                              std::uint64_t seed, const ModelCache &cache = {}, const LogFn &log = {})
{
    cfg.seed = seed;
    cfg.validate();
    TrainedModel out;
    out.domain = ds.domain;
    out.dataset_hash = ds.hash;
    out.horizon_ms = ds.task == Task::compression ? 0 : horizon_ms;
    out.seed = seed;
    out.split = make_split(ds.size(), cfg, derive_seed(seed, 0x5b17));
    if (out.split.test.empty())
        throw std::invalid_argument("in_domain: the split leaves no test samples");

    const json model_config = model_config_for(spec, ds);
    const json key_json = {{"dataset", ds.hash},   {"arch", spec.arch}, {"config", model_config},
                           {"train", to_json(cfg)}, {"horizon_ms", out.horizon_ms}};
    const std::string key = short_hash(key_json.dump());

    if (const auto hit = cache.find(key))
    {
        out.model = std::make_shared<nn::Model<float>>(nn::load_checkpoint(cache.dir_for(key)));
        out.in_domain_db = hit->at("in_domain_db").get<double>();
        out.best_epoch = hit->at("best_epoch").get<int>();
        out.epochs_run = hit->at("epochs_run").get<int>();
        out.from_cache = true;
        if (log)
            log("model cache hit for " + ds.domain + " (seed " + std::to_string(seed) + ")");
        return out;
    }

    out.model = std::make_shared<nn::Model<float>>(nn::build_model<float>(spec.arch, model_config, seed));
    const auto train_set = ds.supervised(out.horizon_ms, out.split.train);
    const auto val_set = ds.supervised(out.horizon_ms, out.split.val);
    const auto hist = nn::train(*out.model, train_set, val_set, cfg);
    out.in_domain_db = nmse_db_on(*out.model, ds, out.horizon_ms, out.split.test);
    out.best_epoch = hist.best_epoch;
    out.epochs_run = static_cast<int>(hist.epochs.size());
    if (log)
        log("trained " + ds.domain + " (seed " + std::to_string(seed) + "): " + std::to_string(out.epochs_run) +
            " epochs, in-domain " + std::to_string(out.in_domain_db) + " dB");

    nn::CheckpointInfo info{spec.arch, model_config, seed, key, hist.best_epoch, hist.best_val_nmse_db};
    cache.store(key, *out.model, info,
                {{"key", key_json},
                 {"in_domain_db", out.in_domain_db},
                 {"best_epoch", out.best_epoch},
                 {"epochs_run", out.epochs_run}});
    return out;
}

/// NMSE of a trained model on all of `target`, normalized by the target's
/// own preprocessing.
inline double cross_test(const TrainedModel &tm, const TaskDataset &target)
{
    if (target.task == Task::prediction && !target.targets.count(tm.horizon_ms))
        throw std::invalid_argument("cross_test: target lacks the " + std::to_string(tm.horizon_ms) + " ms horizon");
    auto m = clone_model(*tm.model);
    return nmse_db_on(m, target, tm.horizon_ms, all_rows(target));
}

struct FineTuneConfig
{
    nn::TrainConfig train;
    double budget_fraction = 0.01; ///< share of the target used for adaptation
    int budget_count = 0;          ///< when > 0, overrides the fraction
    double adapt_train_fraction = 0.8;

    std::size_t budget_for(std::size_t n) const
    {
        if (budget_count > 0)
            return static_cast<std::size_t>(budget_count);
        return static_cast<std::size_t>(std::llround(budget_fraction * static_cast<double>(n)));
    }

    void validate() const
    {
        train.validate();
        if (budget_count < 0 || !(budget_fraction > 0.0 && budget_fraction < 1.0))
            throw std::invalid_argument("fine-tune budget must be a fraction in (0, 1) or a positive count");
        if (!(adapt_train_fraction > 0.0 && adapt_train_fraction < 1.0))
            throw std::invalid_argument("fine-tune adaptation split must lie in (0, 1)");
    }
};

inline json to_json(const FineTuneConfig &c)
{
    return {{"train", to_json(c.train)},
            {"budget_fraction", c.budget_fraction},
            {"budget_count", c.budget_count},
            {"adapt_train_fraction", c.adapt_train_fraction}};
}

struct FineTuneResult
{
    std::size_t budget = 0;
    double before_db = 0.0; ///< the source model on the evaluation rows
    double after_db = 0.0;
    int best_epoch = 0;
    std::vector<std::size_t> adapt_train, adapt_val, eval_rows;
};

namespace detail {

inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
adaptation_split(const std::vector<std::size_t> &budget_rows, double train_fraction, int batch)
{
    const auto n = budget_rows.size();
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::min(n_train, n - std::min<std::size_t>(n, 1));
    if (n_train < static_cast<std::size_t>(batch))
        throw std::invalid_argument("fine-tune budget of " + std::to_string(n) + " samples leaves " +
                                    std::to_string(n_train) + " for adaptation, less than one batch of " +
                                    std::to_string(batch));
    return {{budget_rows.begin(), budget_rows.begin() + static_cast<std::ptrdiff_t>(n_train)},
            {budget_rows.begin() + static_cast<std::ptrdiff_t>(n_train), budget_rows.end()}};
}

} // namespace detail

/// Adapts a copy of `tm` (all layers trainable) on `budget_rows` and
/// evaluates it on `eval_rows`. Validation starts from the unadapted model,
/// so adaptation never ends worse on the validation part than no adaptation.
inline FineTuneResult adapt(const TrainedModel &tm, const TaskDataset &target, const std::vector<std::size_t> &budget_rows,
                            const std::vector<std::size_t> &eval_rows, const FineTuneConfig &cfg, std::uint64_t seed)
{
    cfg.validate();
    FineTuneResult r;
    r.budget = budget_rows.size();
    std::tie(r.adapt_train, r.adapt_val) = detail::adaptation_split(budget_rows, cfg.adapt_train_fraction, cfg.train.batch);
    r.eval_rows = eval_rows;
    assert_disjoint({r.adapt_train, r.adapt_val, r.eval_rows}, "fine_tune");

    auto m = clone_model(*tm.model);
    r.before_db = nmse_db_on(m, target, tm.horizon_ms, r.eval_rows);
    auto tc = cfg.train;
    tc.seed = seed;
    const auto hist = nn::train(m, target.supervised(tm.horizon_ms, r.adapt_train),
                                target.supervised(tm.horizon_ms, r.adapt_val), tc, true);
    r.best_epoch = hist.best_epoch;
    r.after_db = nmse_db_on(m, target, tm.horizon_ms, r.eval_rows);
    return r;
}

/// Fine-tunes on a random budget of `target` and evaluates on the rest.
inline FineTuneResult fine_tune(const TrainedModel &tm, const TaskDataset &target, const FineTuneConfig &cfg,
                                std::uint64_t seed)
{
    cfg.validate();
    const auto n = target.size();
    const auto k = cfg.budget_for(n);
    if (k >= n)
        throw std::invalid_argument("fine_tune: budget of " + std::to_string(k) + " leaves no evaluation samples out of " +
                                    std::to_string(n));
    const auto p = permutation(n, derive_seed(seed, 0xf17e));
    const std::vector<std::size_t> budget(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(k));
    const std::vector<std::size_t> rest(p.begin() + static_cast<std::ptrdiff_t>(k), p.end());
    return adapt(tm, target, budget, rest, cfg, seed);
}

struct CurveConfig
{
    std::vector<double> fractions{0.01, 0.05, 0.1, 0.5, 1.0};
    double holdout_fraction = 0.1;
    FineTuneConfig adapt; ///< training settings shared by both arms

    void validate() const
    {
        if (fractions.empty())
            throw std::invalid_argument("curve: no budget fractions");
        for (std::size_t i = 0; i < fractions.size(); ++i)
        {
            if (!(fractions[i] > 0.0 && fractions[i] <= 1.0))
                throw std::invalid_argument("curve: fractions must lie in (0, 1]");
            if (i > 0 && !(fractions[i] > fractions[i - 1]))
                throw std::invalid_argument("curve: fractions must be strictly ascending");
        }
        if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
            throw std::invalid_argument("curve: holdout fraction must lie in (0, 1)");
        adapt.train.validate();
    }
};

struct CurvePoint
{
    double fraction = 0.0;
    std::size_t count = 0;
    double scratch_db = 0.0;
    double pretrained_db = 0.0;
};

struct CurveResult
{
    std::string source, target;
    std::size_t holdout = 0;
    double source_only_db = 0.0; ///< the pretrained model without adaptation
    std::vector<CurvePoint> points;
};

/// Learning curve on `target`: a model trained from scratch on each budget
/// against the pretrained model fine-tuned on the same budget. Budgets are
/// nested prefixes of one random order of the non-held-out pool; everything
/// is evaluated on the same held-out set.
inline CurveResult pretrain_curve(const TrainedModel &pretrained, const ModelSpec &spec, const TaskDataset &target,
                                  const CurveConfig &cfg, std::uint64_t seed, const LogFn &log = {})
{
    cfg.validate();
    const auto n = target.size();
    const auto n_hold = static_cast<std::size_t>(std::llround(cfg.holdout_fraction * static_cast<double>(n)));
    if (n_hold == 0 || n_hold >= n)
        throw std::invalid_argument("curve: target too small for the holdout");
    const auto p = permutation(n, derive_seed(seed, 0xc0de));
    const std::vector<std::size_t> holdout(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(n_hold));
    const std::vector<std::size_t> pool(p.begin() + static_cast<std::ptrdiff_t>(n_hold), p.end());

    CurveResult out;
    out.source = pretrained.domain;
    out.target = target.domain;
    out.holdout = n_hold;
    {
        auto m = clone_model(*pretrained.model);
        out.source_only_db = nmse_db_on(m, target, pretrained.horizon_ms, holdout);
    }
    for (std::size_t i = 0; i < cfg.fractions.size(); ++i)
    {
        const double f = cfg.fractions[i];
        const auto k = std::min(pool.size(), static_cast<std::size_t>(std::llround(f * static_cast<double>(pool.size()))));
        const std::vector<std::size_t> budget(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
        assert_disjoint({budget, holdout}, "pretrain_curve");
        const auto point_seed = derive_seed(seed, 0xc0de, i);

        const auto ft = adapt(pretrained, target, budget, holdout, cfg.adapt, point_seed);

        TrainedModel scratch;
        scratch.domain = target.domain;
        scratch.horizon_ms = pretrained.horizon_ms;
        scratch.model = std::make_shared<nn::Model<float>>(build_for(spec, target, derive_seed(point_seed, 1)));
        auto [tr, va] = detail::adaptation_split(budget, cfg.adapt.adapt_train_fraction, cfg.adapt.train.batch);
        auto tc = cfg.adapt.train;
        tc.seed = point_seed;
        nn::train(*scratch.model, target.supervised(scratch.horizon_ms, tr), target.supervised(scratch.horizon_ms, va), tc);
        const double scratch_db = nmse_db_on(*scratch.model, target, scratch.horizon_ms, holdout);

        out.points.push_back({f, k, scratch_db, ft.after_db});
        if (log)
            log("curve " + out.source + " -> " + out.target + " at " + std::to_string(k) + " samples: scratch " +
                std::to_string(scratch_db) + " dB, pretrained " + std::to_string(ft.after_db) + " dB");
    }
    return out;
}

/// Baseline that repeats the last observed sample: NMSE of `rows` (all when
/// empty) at the given horizon.
inline double sample_and_hold(const TaskDataset &ds, int horizon_ms, std::span<const std::size_t> rows = {})
{
    if (ds.task != Task::prediction)
        throw std::invalid_argument("sample_and_hold: needs a prediction dataset");
    const auto &target = ds.target(horizon_ms);
    const int l_in = ds.inputs.dim(1), f = ds.inputs.dim(2);
    const auto chosen = rows.empty() ? all_rows(ds) : std::vector<std::size_t>(rows.begin(), rows.end());
    Tensor<float> held({static_cast<int>(chosen.size()), f});
    for (std::size_t i = 0; i < chosen.size(); ++i)
        std::copy_n(ds.inputs.data() + (chosen[i] * l_in + (l_in - 1)) * f, f, held.data() + i * f);
    return nn::to_db(nn::mean_of(nn::nmse_ratios(target.gather(chosen), held)));
}

struct SweepEntry
{
    std::string domain;
    int horizon_ms = 0;
    double learned_db = 0.0;
    double sample_and_hold_db = 0.0;
};

/// One model per (domain, horizon); learned and sample-and-hold NMSE on the
/// same test split.
inline std::vector<SweepEntry> horizon_sweep(const std::vector<const TaskDataset *> &datasets, const ModelSpec &spec,
                                             const nn::TrainConfig &cfg, const std::vector<int> &horizons,
                                             std::uint64_t seed, int jobs = 1, const ModelCache &cache = {},
                                             const LogFn &log = {})
{
    std::vector<SweepEntry> out(datasets.size() * horizons.size());
    parallel_for(out.size(), jobs, [&](std::size_t i) {
        const auto &ds = *datasets[i / horizons.size()];
        const int h = horizons[i % horizons.size()];
        const auto tm = in_domain(ds, spec, cfg, h, seed, cache, log);
        out[i] = {ds.domain, h, tm.in_domain_db, sample_and_hold(ds, h, tm.split.test)};
    });
    return out;
}

} // namespace chanbench::eval
