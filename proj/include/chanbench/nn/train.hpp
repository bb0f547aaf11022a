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

#include <chanbench/core/rng.hpp>
#include <chanbench/core/tensor.hpp>
#include <chanbench/nn/loss.hpp>
#include <chanbench/nn/models.hpp>
#include <chanbench/nn/optim.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chanbench::nn {

/// Supervised pairs stacked along the leading axis. For autoencoding the
/// targets are the inputs themselves.
template <typename T>
struct Dataset
{
    Tensor<T> inputs;
    Tensor<T> targets;

    std::size_t size() const { return inputs.rank() == 0 ? 0 : static_cast<std::size_t>(inputs.dim(0)); }

    void validate() const
    {
        if (inputs.rank() == 0 || targets.rank() == 0 || inputs.dim(0) != targets.dim(0))
            throw std::invalid_argument("Dataset: inputs and targets must share the leading dimension");
    }

    Dataset subset(std::span<const std::size_t> rows) const { return {inputs.gather(rows), targets.gather(rows)}; }
};

struct TrainConfig
{
    double lr = 1e-3;
    int batch = 128;
    int epochs = 50;
    int patience = 60;
    std::uint64_t seed = 1;
    double train_fraction = 0.8;
    double val_fraction = 0.1;
    double test_fraction = 0.1;

    void validate() const
    {
        if (!(lr >= 0.0) || !std::isfinite(lr))
            throw std::invalid_argument("TrainConfig: lr must be finite and >= 0");
        if (batch < 2)
            throw std::invalid_argument("TrainConfig: batch must be >= 2");
        if (epochs < 1 || patience < 1)
            throw std::invalid_argument("TrainConfig: epochs and patience must be >= 1");
        if (patience > epochs)
            throw std::invalid_argument("TrainConfig: patience must not exceed epochs");
        if (train_fraction <= 0.0 || val_fraction <= 0.0 || test_fraction < 0.0 ||
            std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9)
            throw std::invalid_argument("TrainConfig: split fractions must be positive and sum to 1");
    }
};

inline json to_json(const TrainConfig &c)
{
    return {{"lr", c.lr},
            {"batch", c.batch},
            {"epochs", c.epochs},
            {"patience", c.patience},
            {"seed", c.seed},
            {"split", {c.train_fraction, c.val_fraction, c.test_fraction}}};
}

inline TrainConfig train_config_from_json(const json &j, const std::string &path = "", TrainConfig base = {})
{
    JsonReader r(j, path);
    base.lr = r.optional<double>("lr", base.lr);
    base.batch = r.optional<int>("batch", base.batch);
    base.epochs = r.optional<int>("epochs", base.epochs);
    base.patience = r.optional<int>("patience", base.patience);
    base.seed = r.optional<std::uint64_t>("seed", base.seed);
    if (r.has("split"))
    {
        const auto s = r.required<std::vector<double>>("split");
        if (s.size() != 3)
            throw ConfigError(r.field_path("split"), "expected [train, val, test]");
        base.train_fraction = s[0];
        base.val_fraction = s[1];
        base.test_fraction = s[2];
    }
    r.finish();
    try
    {
        base.validate();
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(path.empty() ? "/" : path, e.what());
    }
    return base;
}

struct EpochRecord
{
    int epoch = 0;
    double train_nmse_db = 0.0;
    double val_nmse_db = 0.0;
};

struct History
{
    std::vector<EpochRecord> epochs;
    int best_epoch = 0; ///< 0 means the initial parameters were never beaten
    double best_val_nmse_db = std::numeric_limits<double>::infinity();
    bool stopped_early = false;
};

class TrainingError : public std::runtime_error
{
public:
    TrainingError(int epoch, int batch, const std::string &msg)
        : std::runtime_error("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ": " + msg),
          epoch_(epoch), batch_(batch)
    {
    }

    int epoch() const { return epoch_; }
    int batch() const { return batch_; }

private:
    int epoch_, batch_;
};

/// Early-stopping bookkeeping: stop once `patience` epochs have passed
/// without a strict improvement.
class EarlyStopping
{
public:
    explicit EarlyStopping(int patience) : patience_(patience) {}

    /// Returns true when `value` is a new best.
    bool update(int epoch, double value)
    {
        if (value < best_)
        {
            best_ = value;
            best_epoch_ = epoch;
            return true;
        }
        return false;
    }

    bool should_stop(int epoch) const { return epoch - best_epoch_ >= patience_; }
    int best_epoch() const { return best_epoch_; }
    double best() const { return best_; }

private:
    int patience_;
    int best_epoch_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
};

/// Forward pass in eval mode over `data` in chunks; returns per-sample NMSE ratios.
template <typename T>
std::vector<double> evaluate_ratios(Model<T> &model, const Dataset<T> &data, int chunk = 256)
{
    data.validate();
    std::vector<double> out;
    out.reserve(data.size());
    std::vector<std::size_t> rows;
    for (std::size_t start = 0; start < data.size(); start += static_cast<std::size_t>(chunk))
    {
        const std::size_t end = std::min(data.size(), start + static_cast<std::size_t>(chunk));
        rows.resize(end - start);
        std::iota(rows.begin(), rows.end(), start);
        const auto batch = data.subset(rows);
        const auto pred = model.forward(batch.inputs, Mode::eval);
        for (double r : nmse_ratios(batch.targets, pred))
            out.push_back(r);
    }
    return out;
}

template <typename T>
double evaluate_nmse_db(Model<T> &model, const Dataset<T> &data, int chunk = 256)
{
    return to_db(mean_of(evaluate_ratios(model, data, chunk)));
}

/// One optimization step on a batch; returns the mean NMSE ratio.
template <typename T>
double train_step(Model<T> &model, Adam<T> &opt, const Dataset<T> &batch, int epoch = 0, int batch_index = 0)
{
    opt.zero_grad();
    const auto pred = model.forward(batch.inputs, Mode::train);
    Tensor<T> grad;
    const double loss = nmse_loss(batch.targets, pred, grad);
    if (!std::isfinite(loss))
        throw TrainingError(epoch, batch_index, "non-finite loss");
    model.backward(grad);
    opt.step();
    return loss;
}

using EpochCallback = std::function<void(const EpochRecord &)>;

/// Mini-batch training with validation-based early stopping. The model is
/// left holding the parameters of the best validation epoch (or its
/// initial state if no epoch improved on it, when `include_initial` is set).
template <typename T>
History train(Model<T> &model, const Dataset<T> &train_set, const Dataset<T> &val_set, const TrainConfig &cfg,
              bool include_initial = false, const EpochCallback &on_epoch = {})
{
    cfg.validate();
    train_set.validate();
    val_set.validate();
    if (train_set.size() == 0 || val_set.size() == 0)
        throw std::invalid_argument("train: empty train or validation split");
    if (train_set.size() < static_cast<std::size_t>(cfg.batch))
        throw std::invalid_argument("train: training split (" + std::to_string(train_set.size()) +
                                    " samples) is smaller than one batch (" + std::to_string(cfg.batch) + ")");

    model.reseed(derive_seed(cfg.seed, 0xd80f));
    // A zero learning rate must leave the model untouched, including its
    // running statistics.
    model.freeze_running_stats(cfg.lr == 0.0);

    Adam<T> opt(model.params(), {cfg.lr});
    EarlyStopping stopper(cfg.patience);
    History hist;
    auto best_state = model.state();
    if (include_initial)
        stopper.update(0, evaluate_nmse_db(model, val_set));

    const std::size_t n = train_set.size();
    std::vector<std::size_t> order(n);
    std::vector<std::size_t> rows;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch)
    {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(cfg.seed, 0xe90c, static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        std::size_t seen = 0;
        int batch_index = 0;
        for (std::size_t start = 0; start + 1 < n; start += static_cast<std::size_t>(cfg.batch), ++batch_index)
        {
            const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch));
            if (end - start < 2)
                break;
            rows.assign(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
            const auto batch = train_set.subset(rows);
            loss_sum += train_step(model, opt, batch, epoch, batch_index) * static_cast<double>(end - start);
            seen += end - start;
        }
        EpochRecord rec{epoch, to_db(loss_sum / static_cast<double>(seen)), evaluate_nmse_db(model, val_set)};
        if (!std::isfinite(rec.val_nmse_db))
            throw TrainingError(epoch, -1, "non-finite validation NMSE");
        hist.epochs.push_back(rec);
        if (on_epoch)
            on_epoch(rec);
        if (stopper.update(epoch, rec.val_nmse_db))
            best_state = model.state();
        if (stopper.should_stop(epoch))
        {
            hist.stopped_early = epoch < cfg.epochs;
            break;
        }
    }
    model.freeze_running_stats(false);
    model.load_state(best_state);
    hist.best_epoch = stopper.best_epoch();
    hist.best_val_nmse_db = stopper.best();
    return hist;
}

} // namespace chanbench::nn
