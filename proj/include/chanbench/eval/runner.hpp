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

#include <chanbench/eval/report.hpp>

#include <optional>
#include <string>
#include <vector>

namespace chanbench::eval {

struct MatrixPlan
{
    std::vector<const TaskDataset *> datasets;
    ModelSpec model;
    nn::TrainConfig train;
    int horizon_ms = 0;
    int repeats = 1;
    std::uint64_t seed = 0;
    std::optional<FineTuneConfig> fine_tune;
    int jobs = 1;
    ModelCache cache;
    LogFn log;
};

inline std::uint64_t repeat_seed(std::uint64_t master, int repeat)
{
    return derive_seed(master, 1000 + static_cast<std::uint64_t>(repeat));
}

namespace detail {

struct CellOutcome
{
    std::optional<double> cross, tuned;
    std::string error;
};

/// Fine-tuning on the training domain itself draws its budget from the
/// held-out test split and evaluates on the rest of it.
inline FineTuneResult fine_tune_in_domain(const TrainedModel &tm, const TaskDataset &ds, const FineTuneConfig &cfg,
                                          std::uint64_t seed)
{
    const auto k = cfg.budget_for(ds.size());
    if (k >= tm.split.test.size())
        throw std::invalid_argument("fine-tune budget of " + std::to_string(k) + " exceeds the test split of '" +
                                    ds.domain + "'");
    auto rows = tm.split.test;
    Rng rng(derive_seed(seed, 0xf17e));
    std::shuffle(rows.begin(), rows.end(), rng);
    const std::vector<std::size_t> budget(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k));
    const std::vector<std::size_t> rest(rows.begin() + static_cast<std::ptrdiff_t>(k), rows.end());
    return adapt(tm, ds, budget, rest, cfg, seed);
}

} // namespace detail

/// Trains one model per (domain, repeat) and fills every (train, test) cell.
/// A failure is recorded in the affected cells and the rest still run.
inline EvalReport run_matrix(const MatrixPlan &plan)
{
    if (plan.datasets.empty())
        throw std::invalid_argument("run_matrix: no domains");
    if (plan.repeats < 1)
        throw std::invalid_argument("run_matrix: repeats must be >= 1");
    std::vector<std::string> names;
    for (const auto *d : plan.datasets)
    {
        if (d->task != plan.datasets.front()->task)
            throw std::invalid_argument("run_matrix: domains mix tasks");
        names.push_back(d->domain);
    }
    const auto n = plan.datasets.size();
    const auto reps = static_cast<std::size_t>(plan.repeats);
    const Task task = plan.datasets.front()->task;

    std::vector<std::optional<TrainedModel>> models(n * reps);
    std::vector<std::string> train_errors(n * reps);
    parallel_for(n * reps, plan.jobs, [&](std::size_t k) {
        const auto d = k / reps;
        const int r = static_cast<int>(k % reps);
        try
        {
            models[k] = in_domain(*plan.datasets[d], plan.model, plan.train, plan.horizon_ms,
                                  repeat_seed(plan.seed, r), plan.cache, plan.log);
        }
        catch (const std::exception &e)
        {
            train_errors[k] = "training on '" + names[d] + "' (repeat " + std::to_string(r) + ") failed: " + e.what();
            if (plan.log)
                plan.log(train_errors[k]);
        }
    });

    std::vector<detail::CellOutcome> outcomes(n * n * reps);
    parallel_for(outcomes.size(), plan.jobs, [&](std::size_t k) {
        const auto i = k / (n * reps), j = (k / reps) % n, r = k % reps;
        auto &out = outcomes[k];
        const auto &tm = models[i * reps + r];
        if (!tm)
        {
            out.error = train_errors[i * reps + r];
            return;
        }
        const auto &target = *plan.datasets[j];
        try
        {
            out.cross = i == j ? tm->in_domain_db : cross_test(*tm, target);
            if (plan.fine_tune)
            {
                const auto seed = derive_seed(tm->seed, 0xf7, j);
                out.tuned = (i == j ? detail::fine_tune_in_domain(*tm, target, *plan.fine_tune, seed)
                                    : fine_tune(*tm, target, *plan.fine_tune, seed))
                                .after_db;
            }
        }
        catch (const std::exception &e)
        {
            out.error = "cell (" + names[i] + ", " + names[j] + ", repeat " + std::to_string(r) + ") failed: " + e.what();
            if (plan.log)
                plan.log(out.error);
        }
    });

    auto report = EvalReport::empty(task, names, plan.repeats, plan.fine_tune.has_value());
    report.horizon_ms = task == Task::compression ? 0 : plan.horizon_ms;
    for (std::size_t k = 0; k < outcomes.size(); ++k)
    {
        const auto i = k / (n * reps), j = (k / reps) % n;
        const auto &o = outcomes[k];
        auto &cc = report.cross[i][j];
        if (o.cross)
            cc.values.push_back(*o.cross);
        else
            cc.fail(o.error);
        if (plan.fine_tune)
        {
            auto &fc = (*report.fine_tune)[i][j];
            if (o.tuned)
                fc.values.push_back(*o.tuned);
            else
                fc.fail(o.error);
        }
    }
    json in_domain_meta = json::object();
    for (std::size_t d = 0; d < n; ++d)
    {
        json reps_meta = json::array();
        for (std::size_t r = 0; r < reps; ++r)
            if (const auto &tm = models[d * reps + r])
                reps_meta.push_back({{"seed", tm->seed},
                                     {"epochs_run", tm->epochs_run},
                                     {"best_epoch", tm->best_epoch},
                                     {"test_samples", tm->split.test.size()}});
        in_domain_meta[names[d]] = reps_meta;
    }
    report.meta = {{"seed", plan.seed},
                   {"model", {{"arch", plan.model.arch}, {"options", plan.model.options}}},
                   {"train", to_json(plan.train)},
                   {"training_runs", in_domain_meta}};
    if (plan.fine_tune)
        report.meta["fine_tune"] = to_json(*plan.fine_tune);
    report.validate();
    return report;
}

} // namespace chanbench::eval
