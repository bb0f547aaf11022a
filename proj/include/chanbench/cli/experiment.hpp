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

#include <chanbench/core/json_reader.hpp>
#include <chanbench/eval/domain.hpp>
#include <chanbench/eval/protocols.hpp>
#include <chanbench/eval/setup.hpp>
#include <chanbench/preprocess/archive.hpp>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace chanbench::cli {

inline constexpr int experiment_version = 1;

inline const std::vector<std::string> &known_stages()
{
    static const std::vector<std::string> s{"generate", "train", "evaluate", "curve", "sweep"};
    return s;
}

struct CurveSettings
{
    std::string source;
    std::string target;
    eval::CurveConfig config;
};

/// Experiment document:
///   {"type":"experiment","version":1,"name":..,"task":"compression"|"prediction",
///    "seed":..,"repeats":..,"samples":..,"domains":[..],"setup":{..},
///    "model":{"arch":..,"options":{..}},"train":{..},"horizon_ms":..,
///    "fine_tune":{"budget_fraction"|"budget_count":..,"adapt_train_fraction":..,"train":{..}},
///    "curve":{"source":..,"target":..,"fractions":[..],"holdout_fraction":..,
///             "adapt_train_fraction":..,"train":{..}},
///    "sweep":{"horizons_ms":[..]},"output_dir":..,"stages":[..]}
/// Relative file references resolve against the document's directory.
struct ExperimentConfig
{
    std::string name;
    eval::Task task = eval::Task::compression;
    std::uint64_t seed = 1;
    int repeats = 1;
    int samples = 0;
    std::vector<eval::DomainConfig> domains;
    eval::CompressionSetup compression;
    eval::PredictionSetup prediction;
    eval::ModelSpec model;
    nn::TrainConfig train;
    int horizon_ms = 1;
    std::optional<eval::FineTuneConfig> fine_tune;
    std::optional<CurveSettings> curve;
    std::vector<int> sweep_horizons_ms;
    std::string output_dir;
    std::vector<std::string> stages;
    json source; ///< the document as read

    int samples_for(const eval::DomainConfig &d) const { return d.samples > 0 ? d.samples : samples; }

    const eval::DomainConfig &domain(const std::string &n) const
    {
        for (const auto &d : domains)
            if (d.name == n)
                return d;
        throw std::out_of_range("experiment has no domain '" + n + "'");
    }

    eval::DatasetRequest request_for(const eval::DomainConfig &d) const
    {
        eval::DatasetRequest r;
        r.task = task;
        r.domain = d;
        r.compression = compression;
        r.prediction = prediction;
        r.samples = samples_for(d);
        r.seed = derive_seed(seed, 0xda7a);
        return r;
    }

    bool has_stage(const std::string &s) const { return std::find(stages.begin(), stages.end(), s) != stages.end(); }
};

namespace detail {

template <typename F>
auto wrap_invalid(const std::string &path, F &&f) -> decltype(f())
{
    try
    {
        return f();
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(path, e.what());
    }
}

inline eval::FineTuneConfig fine_tune_from_json(const json &j, const std::string &path, const nn::TrainConfig &base)
{
    JsonReader r(j, path);
    eval::FineTuneConfig c;
    c.train = r.has("train") ? nn::train_config_from_json(r.raw("train"), r.field_path("train"), base) : base;
    c.budget_fraction = r.optional("budget_fraction", c.budget_fraction);
    c.budget_count = r.optional("budget_count", c.budget_count);
    c.adapt_train_fraction = r.optional("adapt_train_fraction", c.adapt_train_fraction);
    r.finish();
    wrap_invalid(path, [&] { c.validate(); });
    return c;
}

} // namespace detail

inline ExperimentConfig experiment_from_json(const json &j, const std::filesystem::path &base_dir,
                                             const std::string &path = "")
{
    JsonReader r(j, path);
    if (r.required<std::string>("type") != "experiment")
        throw ConfigError(r.field_path("type"), "expected 'experiment'");
    r.expect_version(experiment_version);

    ExperimentConfig c;
    c.source = j;
    c.name = r.required<std::string>("name");
    c.task = eval::task_from_string(r.required<std::string>("task"), r.field_path("task"));
    c.seed = r.optional<std::uint64_t>("seed", c.seed);
    c.repeats = r.optional("repeats", c.repeats);
    if (c.repeats < 1)
        throw ConfigError(r.field_path("repeats"), "must be >= 1");
    c.samples = r.optional("samples", c.task == eval::Task::compression ? 10000 : 5000);
    if (c.samples < 1)
        throw ConfigError(r.field_path("samples"), "must be >= 1");

    const auto domains = r.array_of_objects("domains");
    if (domains.empty())
        throw ConfigError(r.field_path("domains"), "at least one domain required");
    for (std::size_t i = 0; i < domains.size(); ++i)
        c.domains.push_back(eval::domain_from_json(r.raw("domains")[i], r.field_path("domains") + "/" + std::to_string(i),
                                                   base_dir));
    eval::check_unique_names(c.domains, r.field_path("domains"));

    if (c.task == eval::Task::compression)
    {
        if (r.has("setup"))
            c.compression = eval::compression_setup_from_json(r.raw("setup"), r.field_path("setup"));
        detail::wrap_invalid(r.field_path("setup"), [&] { c.compression.validate(); });
    }
    else
    {
        if (r.has("setup"))
            c.prediction = eval::prediction_setup_from_json(r.raw("setup"), r.field_path("setup"));
        detail::wrap_invalid(r.field_path("setup"), [&] { c.prediction.validate(); });
    }

    c.model.arch = c.task == eval::Task::compression ? nn::csinet_arch : nn::gru_arch;
    if (r.has("model"))
    {
        auto m = r.child("model");
        c.model.arch = m.optional<std::string>("arch", c.model.arch);
        c.model.options = m.optional<json>("options", json::object());
        if (!c.model.options.is_object())
            throw ConfigError(m.field_path("options"), "expected an object");
        m.finish();
    }
    const bool compression_arch = c.model.arch == nn::csinet_arch;
    if (c.model.arch != nn::csinet_arch && c.model.arch != nn::gru_arch)
        throw ConfigError(r.field_path("model") + "/arch", "unknown architecture '" + c.model.arch + "'");
    if (compression_arch != (c.task == eval::Task::compression))
        throw ConfigError(r.field_path("model") + "/arch", "architecture does not fit the task");

    nn::TrainConfig base;
    if (c.task == eval::Task::compression)
    {
        base.lr = 1e-2;
        base.batch = 128;
        base.epochs = 50;
        base.patience = 50;
    }
    else
    {
        base.lr = 4e-4;
        base.batch = 256;
        base.epochs = 300;
        base.patience = 60;
    }
    c.train = r.has("train") ? nn::train_config_from_json(r.raw("train"), r.field_path("train"), base) : base;

    if (c.task == eval::Task::prediction)
    {
        c.horizon_ms = r.optional("horizon_ms", c.prediction.horizons_ms.front());
        if (std::find(c.prediction.horizons_ms.begin(), c.prediction.horizons_ms.end(), c.horizon_ms) ==
            c.prediction.horizons_ms.end())
            throw ConfigError(r.field_path("horizon_ms"), "not among the generated horizons");
    }
    else if (r.has("horizon_ms"))
        throw ConfigError(r.field_path("horizon_ms"), "only meaningful for prediction");

    if (r.has("fine_tune"))
        c.fine_tune = detail::fine_tune_from_json(r.raw("fine_tune"), r.field_path("fine_tune"), c.train);

    if (r.has("curve"))
    {
        auto cr = r.child("curve");
        CurveSettings s;
        s.source = cr.required<std::string>("source");
        s.target = cr.required<std::string>("target");
        for (const auto *n : {&s.source, &s.target})
            if (std::none_of(c.domains.begin(), c.domains.end(), [&](const auto &d) { return d.name == *n; }))
                throw ConfigError(cr.path(), "unknown domain '" + *n + "'");
        if (s.source == s.target)
            throw ConfigError(cr.path(), "source and target must differ");
        s.config.fractions = cr.optional("fractions", s.config.fractions);
        s.config.holdout_fraction = cr.optional("holdout_fraction", s.config.holdout_fraction);
        s.config.adapt.adapt_train_fraction = cr.optional("adapt_train_fraction", s.config.adapt.adapt_train_fraction);
        s.config.adapt.train =
            cr.has("train") ? nn::train_config_from_json(cr.raw("train"), cr.field_path("train"), c.train) : c.train;
        cr.finish();
        detail::wrap_invalid(cr.path(), [&] { s.config.validate(); });
        c.curve = s;
    }

    if (r.has("sweep"))
    {
        auto sr = r.child("sweep");
        c.sweep_horizons_ms = sr.required<std::vector<int>>("horizons_ms");
        sr.finish();
        if (c.task != eval::Task::prediction)
            throw ConfigError(r.field_path("sweep"), "only meaningful for prediction");
        for (int h : c.sweep_horizons_ms)
            if (std::find(c.prediction.horizons_ms.begin(), c.prediction.horizons_ms.end(), h) ==
                c.prediction.horizons_ms.end())
                throw ConfigError(r.field_path("sweep") + "/horizons_ms", std::to_string(h) + " ms is not generated");
    }

    c.output_dir = r.optional<std::string>("output_dir", "runs/" + c.name);
    c.stages = r.optional<std::vector<std::string>>("stages", {"generate", "train", "evaluate"});
    for (const auto &s : c.stages)
        if (std::find(known_stages().begin(), known_stages().end(), s) == known_stages().end())
            throw ConfigError(r.field_path("stages"), "unknown stage '" + s + "'");
    if (c.has_stage("curve") && !c.curve)
        throw ConfigError(r.field_path("curve"), "required by the curve stage");
    if (c.has_stage("sweep") && c.sweep_horizons_ms.empty())
        throw ConfigError(r.field_path("sweep"), "required by the sweep stage");
    r.finish();
    return c;
}

inline ExperimentConfig load_experiment(const std::filesystem::path &file)
{
    if (!std::filesystem::exists(file))
        throw ConfigError(file.string(), "config file not found");
    json j;
    try
    {
        j = preprocess::read_json(file);
    }
    catch (const std::exception &e)
    {
        throw ConfigError(file.string(), e.what());
    }
    return experiment_from_json(j, file.parent_path());
}

} // namespace chanbench::cli
