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
#include <chanbench/core/synthesis.hpp>
#include <chanbench/preprocess/windows.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace chanbench::eval {

enum class Task { compression, prediction };

inline std::string to_string(Task t) { return t == Task::compression ? "compression" : "prediction"; }

inline Task task_from_string(const std::string &s, const std::string &field)
{
    if (s == "compression")
        return Task::compression;
    if (s == "prediction")
        return Task::prediction;
    throw ConfigError(field, "expected 'compression' or 'prediction', got '" + s + "'");
}

/// Physical settings shared by every domain of a compression experiment.
struct CompressionSetup
{
    double carrier_hz = 3.5e9;
    double subcarrier_spacing_hz = 15e3;
    int tones_per_prb = 12;
    int n_prb = 32;
    int n_tx = 32;
    int n_rx = 1;
    int n_delay_keep = 16;

    void validate() const
    {
        if (!(carrier_hz > 0.0) || !(subcarrier_spacing_hz > 0.0))
            throw std::invalid_argument("compression setup: carrier and spacing must be > 0");
        if (tones_per_prb < 1 || n_prb < 1 || n_tx < 1)
            throw std::invalid_argument("compression setup: counts must be >= 1");
        if (n_rx != 1)
            throw std::invalid_argument("compression setup: the angle-delay map needs exactly one receive antenna");
        if (n_delay_keep < 1 || n_delay_keep > n_prb)
            throw std::invalid_argument("compression setup: n_delay_keep must lie in [1, n_prb]");
    }

    /// Fine tone grid: PRB k covers tones [k * tones_per_prb, (k+1) * tones_per_prb).
    std::vector<double> fine_tones() const
    {
        return tone_grid(tones_per_prb * n_prb, subcarrier_spacing_hz);
    }

    /// Spacing between PRB-averaged tones.
    double prb_spacing_hz() const { return subcarrier_spacing_hz * tones_per_prb; }

    std::vector<int> sample_shape() const { return {2, n_delay_keep, n_tx}; }
};

/// Settings of a prediction experiment: short sequences sampled every
/// `period_s` on a single tone.
struct PredictionSetup
{
    double carrier_hz = 3.5e9;
    int n_tx = 2;
    int n_rx = 1;
    int length = 60;
    double period_s = 1e-3;
    double speed_mps = 8.333;
    int l_in = 20;
    std::vector<int> horizons_ms = preprocess::default_horizons_ms;

    void validate() const
    {
        if (!(carrier_hz > 0.0) || !(period_s > 0.0) || !(speed_mps >= 0.0))
            throw std::invalid_argument("prediction setup: invalid carrier, period or speed");
        if (n_tx < 1 || n_rx < 1 || l_in < 1)
            throw std::invalid_argument("prediction setup: counts must be >= 1");
        if (horizons_ms.empty())
            throw std::invalid_argument("prediction setup: no horizons");
        for (int h : horizons_ms)
            if (l_in + preprocess::horizon_steps(h, period_s) > length)
                throw std::invalid_argument("prediction setup: horizon " + std::to_string(h) +
                                            " ms does not fit in the sequence");
    }

    int n_features() const { return 2 * n_tx * n_rx; }
};

inline json to_json(const CompressionSetup &s)
{
    return {{"carrier_hz", s.carrier_hz}, {"subcarrier_spacing_hz", s.subcarrier_spacing_hz},
            {"tones_per_prb", s.tones_per_prb}, {"n_prb", s.n_prb},
            {"n_tx", s.n_tx}, {"n_rx", s.n_rx},
            {"n_delay_keep", s.n_delay_keep}};
}

inline json to_json(const PredictionSetup &s)
{
    return {{"carrier_hz", s.carrier_hz}, {"n_tx", s.n_tx}, {"n_rx", s.n_rx},
            {"length", s.length}, {"period_s", s.period_s}, {"speed_mps", s.speed_mps},
            {"l_in", s.l_in}, {"horizons_ms", s.horizons_ms}};
}

inline CompressionSetup compression_setup_from_json(const json &j, const std::string &path)
{
    JsonReader r(j, path);
    CompressionSetup s;
    s.carrier_hz = r.optional("carrier_hz", s.carrier_hz);
    s.subcarrier_spacing_hz = r.optional("subcarrier_spacing_hz", s.subcarrier_spacing_hz);
    s.tones_per_prb = r.optional("tones_per_prb", s.tones_per_prb);
    s.n_prb = r.optional("n_prb", s.n_prb);
    s.n_tx = r.optional("n_tx", s.n_tx);
    s.n_rx = r.optional("n_rx", s.n_rx);
    s.n_delay_keep = r.optional("n_delay_keep", s.n_delay_keep);
    r.finish();
    try
    {
        s.validate();
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(path, e.what());
    }
    return s;
}

inline PredictionSetup prediction_setup_from_json(const json &j, const std::string &path)
{
    JsonReader r(j, path);
    PredictionSetup s;
    s.carrier_hz = r.optional("carrier_hz", s.carrier_hz);
    s.n_tx = r.optional("n_tx", s.n_tx);
    s.n_rx = r.optional("n_rx", s.n_rx);
    s.length = r.optional("length", s.length);
    s.period_s = r.optional("period_s", s.period_s);
    s.speed_mps = r.optional("speed_mps", s.speed_mps);
    s.l_in = r.optional("l_in", s.l_in);
    s.horizons_ms = r.optional("horizons_ms", s.horizons_ms);
    r.finish();
    try
    {
        s.validate();
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(path, e.what());
    }
    return s;
}

} // namespace chanbench::eval
