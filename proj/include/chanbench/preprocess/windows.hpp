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

#include <chanbench/core/types.hpp>

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace chanbench::preprocess {

inline const std::vector<int> default_horizons_ms{1, 3, 5, 10, 20, 40};

/// Feature vector of one grid: antenna-major over (rx, tx, subcarrier),
/// each entry contributing [real, imag].
inline std::vector<double> flatten_grid(const ChannelGrid &g)
{
    std::vector<double> f;
    f.reserve(2 * g.data().size());
    for (const auto &v : g.data())
    {
        f.push_back(v.real());
        f.push_back(v.imag());
    }
    return f;
}

inline void unflatten_grid(const std::vector<double> &f, ChannelGrid &g)
{
    if (f.size() != 2 * g.data().size())
        throw std::invalid_argument("unflatten_grid: size mismatch");
    for (std::size_t i = 0; i < g.data().size(); ++i)
        g.data()[i] = {f[2 * i], f[2 * i + 1]};
}

struct PredictionWindow
{
    int l_in = 0;
    int n_features = 0;
    std::vector<double> inputs;                 // l_in x n_features
    std::map<int, std::vector<double>> targets; // horizon_ms -> n_features
    double scale = 1.0;                         // dataset max |H| used for scaling

    std::vector<double> last_input() const
    {
        return {inputs.end() - n_features, inputs.end()};
    }
};

/// Number of samples a horizon spans at the given sampling period.
inline int horizon_steps(int horizon_ms, double period_s)
{
    const double steps = horizon_ms * 1e-3 / period_s;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-6 || rounded < 1.0)
        throw std::invalid_argument("make_windows: horizon " + std::to_string(horizon_ms) +
                                    " ms is not a positive multiple of the sampling period");
    return static_cast<int>(rounded);
}

/// One window per sequence: the first `l_in` grids are inputs and each
/// target sits `horizon` after the last input sample.
inline PredictionWindow make_windows(const ChannelSequence &seq, int l_in = 20,
                                     const std::vector<int> &horizons_ms = default_horizons_ms, double scale = 1.0)
{
    seq.validate();
    if (l_in < 1)
        throw std::invalid_argument("make_windows: l_in must be >= 1");
    if (horizons_ms.empty())
        throw std::invalid_argument("make_windows: no horizons");
    int max_steps = 0;
    for (int h : horizons_ms)
        max_steps = std::max(max_steps, horizon_steps(h, seq.sampling_period_s));
    if (static_cast<int>(seq.length()) < l_in + max_steps)
        throw std::invalid_argument("make_windows: sequence too short (" + std::to_string(seq.length()) +
                                    " samples, need " + std::to_string(l_in + max_steps) + ")");

    PredictionWindow w;
    w.l_in = l_in;
    w.n_features = static_cast<int>(2 * seq.grids.front().data().size());
    w.scale = scale;
    w.inputs.reserve(static_cast<std::size_t>(l_in) * w.n_features);
    for (int k = 0; k < l_in; ++k)
    {
        const auto f = flatten_grid(seq.grids[static_cast<std::size_t>(k)]);
        w.inputs.insert(w.inputs.end(), f.begin(), f.end());
    }
    for (int h : horizons_ms)
        w.targets[h] = flatten_grid(seq.grids[static_cast<std::size_t>(l_in - 1 + horizon_steps(h, seq.sampling_period_s))]);
    return w;
}

} // namespace chanbench::preprocess
