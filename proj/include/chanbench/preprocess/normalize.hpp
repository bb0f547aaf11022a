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
#include <chanbench/preprocess/angle_delay.hpp>

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace chanbench::preprocess {

class DegenerateInputError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Real angle-delay snapshot laid out as (plane, delay, angle) with plane 0
/// the real part and plane 1 the imaginary part, after per-snapshot ZMUV.
struct CompressionSample
{
    int n_delay = 0;
    int n_angle = 0;
    std::vector<double> values;
    double mean = 0.0;
    double stddev = 1.0;

    std::vector<int> shape() const { return {2, n_delay, n_angle}; }
};

inline std::vector<double> split_real_imag(const AngleDelay &ad)
{
    const std::size_t n = ad.data.size();
    std::vector<double> v(2 * n);
    for (std::size_t i = 0; i < n; ++i)
    {
        v[i] = ad.data[i].real();
        v[n + i] = ad.data[i].imag();
    }
    return v;
}

inline AngleDelay merge_real_imag(std::span<const double> values, int n_delay, int n_angle)
{
    const std::size_t n = static_cast<std::size_t>(n_delay) * n_angle;
    if (values.size() != 2 * n)
        throw std::invalid_argument("merge_real_imag: size mismatch");
    AngleDelay ad{n_delay, n_angle, std::vector<cplx>(n)};
    for (std::size_t i = 0; i < n; ++i)
        ad.data[i] = {values[i], values[n + i]};
    return ad;
}

/// Zero-mean / unit-variance over all real entries of one snapshot.
inline CompressionSample zmuv(const AngleDelay &ad)
{
    CompressionSample s;
    s.n_delay = ad.n_delay;
    s.n_angle = ad.n_angle;
    s.values = split_real_imag(ad);
    const double n = static_cast<double>(s.values.size());
    double mean = 0.0;
    for (double v : s.values)
        mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : s.values)
        var += (v - mean) * (v - mean);
    var /= n;
    if (!(var > 1e-20 * mean * mean) || !std::isfinite(var))
        throw DegenerateInputError("zmuv: snapshot has zero variance");
    s.mean = mean;
    s.stddev = std::sqrt(var);
    const double inv = 1.0 / s.stddev;
    for (double &v : s.values)
        v = (v - mean) * inv;
    return s;
}

inline std::vector<double> unzmuv(const CompressionSample &s)
{
    std::vector<double> v(s.values.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = s.values[i] * s.stddev + s.mean;
    return v;
}

/// Dataset-level max-absolute scaling: every complex entry is divided by
/// the largest |H| found anywhere in the dataset.
struct MaxAbsScaler
{
    double scale = 1.0;

    static MaxAbsScaler fit(std::span<const ChannelSequence> dataset)
    {
        double m = 0.0;
        for (const auto &seq : dataset)
            for (const auto &g : seq.grids)
                m = std::max(m, g.max_abs());
        if (!(m > 0.0) || !std::isfinite(m))
            throw DegenerateInputError("maxabs_scale: dataset maximum |H| is zero");
        return {m};
    }

    void apply(ChannelSequence &seq) const
    {
        const double inv = 1.0 / scale;
        for (auto &g : seq.grids)
            for (auto &v : g.data())
                v *= inv;
    }

    void invert(ChannelSequence &seq) const
    {
        for (auto &g : seq.grids)
            for (auto &v : g.data())
                v *= scale;
    }
};

/// Scales the dataset in place and returns the scale used.
inline double maxabs_scale(std::span<ChannelSequence> dataset)
{
    const auto scaler = MaxAbsScaler::fit(std::span<const ChannelSequence>(dataset.data(), dataset.size()));
    for (auto &seq : dataset)
        scaler.apply(seq);
    return scaler.scale;
}

} // namespace chanbench::preprocess
