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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chanbench {

using cplx = std::complex<double>;

struct Vec2
{
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) = default;

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double angle() const { return std::atan2(y, x); }
};

/// Uniform linear array along the local axis; azimuth-only.
struct ArrayGeometry
{
    int num_elements = 1;
    double spacing_wavelengths = 0.5;

    void validate() const
    {
        if (num_elements < 1)
            throw std::invalid_argument("ArrayGeometry: num_elements must be >= 1");
        if (!(spacing_wavelengths > 0.0) || !std::isfinite(spacing_wavelengths))
            throw std::invalid_argument("ArrayGeometry: spacing_wavelengths must be > 0");
    }
};

/// One propagation path. When `element_gains` is non-empty it holds the
/// per-antenna-pair complex gains (row-major, n_rx x n_t) and replaces the
/// array-response product; that is how array-agnostic tapped-delay-line
/// taps are carried through the same synthesis routine.
struct Path
{
    cplx gain{0.0, 0.0};
    double delay_s = 0.0;
    double aod_rad = 0.0;
    double aoa_rad = 0.0;
    double doppler_hz = 0.0;
    std::vector<cplx> element_gains;
    std::vector<int> interactions; // wall indices, in bounce order; empty for LOS

    double power() const { return std::norm(gain); }

    bool finite() const
    {
        if (!std::isfinite(gain.real()) || !std::isfinite(gain.imag()))
            return false;
        if (!std::isfinite(delay_s) || !std::isfinite(aod_rad) || !std::isfinite(aoa_rad) ||
            !std::isfinite(doppler_hz))
            return false;
        for (const auto &g : element_gains)
            if (!std::isfinite(g.real()) || !std::isfinite(g.imag()))
                return false;
        return true;
    }

    void validate() const
    {
        if (!finite())
            throw std::invalid_argument("Path: non-finite parameter");
        if (delay_s < 0.0)
            throw std::invalid_argument("Path: negative delay");
    }
};

struct PathSet
{
    std::vector<Path> paths;
    std::optional<Vec2> rx_position;
    std::optional<Vec2> rx_velocity;

    bool empty() const { return paths.empty(); }
    std::size_t size() const { return paths.size(); }

    double total_power() const
    {
        double p = 0.0;
        for (const auto &path : paths)
            p += path.power();
        return p;
    }

    double min_delay() const
    {
        double d = 0.0;
        bool first = true;
        for (const auto &path : paths)
            if (first || path.delay_s < d)
            {
                d = path.delay_s;
                first = false;
            }
        return d;
    }

    /// Scales all gains so that the summed path power is one.
    void normalize_power()
    {
        const double p = total_power();
        if (!(p > 0.0))
            throw std::invalid_argument("PathSet: cannot normalize zero-power path set");
        const double s = 1.0 / std::sqrt(p);
        for (auto &path : paths)
        {
            path.gain *= s;
            for (auto &g : path.element_gains)
                g *= s;
        }
    }

    /// Shifts delays so that the earliest path arrives at zero.
    void align_first_arrival()
    {
        if (paths.empty())
            return;
        const double d0 = min_delay();
        for (auto &path : paths)
            path.delay_s -= d0;
    }

    /// Power-weighted RMS delay spread.
    double rms_delay_spread() const
    {
        double sp = 0.0, st = 0.0, st2 = 0.0;
        for (const auto &path : paths)
        {
            const double p = path.power();
            sp += p;
            st += p * path.delay_s;
            st2 += p * path.delay_s * path.delay_s;
        }
        if (!(sp > 0.0))
            return 0.0;
        const double mean = st / sp;
        return std::sqrt(std::max(0.0, st2 / sp - mean * mean));
    }
};

/// Complex channel tensor over (rx antenna, tx antenna, subcarrier).
class ChannelGrid
{
public:
    ChannelGrid() = default;

    ChannelGrid(int n_rx, int n_t, int n_c, double subcarrier_spacing_hz = 0.0, double f0_hz = 0.0)
        : n_rx_(n_rx), n_t_(n_t), n_c_(n_c), subcarrier_spacing_hz_(subcarrier_spacing_hz), f0_hz_(f0_hz),
          data_(static_cast<std::size_t>(n_rx) * n_t * n_c)
    {
        if (n_rx < 1 || n_t < 1 || n_c < 1)
            throw std::invalid_argument("ChannelGrid: all dimensions must be >= 1");
    }

    int n_rx() const { return n_rx_; }
    int n_t() const { return n_t_; }
    int n_c() const { return n_c_; }
    double subcarrier_spacing_hz() const { return subcarrier_spacing_hz_; }
    double f0_hz() const { return f0_hz_; }

    std::size_t index(int r, int t, int c) const
    {
        return (static_cast<std::size_t>(r) * n_t_ + t) * n_c_ + c;
    }

    cplx &operator()(int r, int t, int c) { return data_[index(r, t, c)]; }
    const cplx &operator()(int r, int t, int c) const { return data_[index(r, t, c)]; }

    std::vector<cplx> &data() { return data_; }
    const std::vector<cplx> &data() const { return data_; }

    bool same_shape(const ChannelGrid &o) const
    {
        return n_rx_ == o.n_rx_ && n_t_ == o.n_t_ && n_c_ == o.n_c_;
    }

    bool all_finite() const
    {
        for (const auto &v : data_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                return false;
        return true;
    }

    double energy() const
    {
        double e = 0.0;
        for (const auto &v : data_)
            e += std::norm(v);
        return e;
    }

    double max_abs() const
    {
        double m = 0.0;
        for (const auto &v : data_)
            m = std::max(m, std::abs(v));
        return m;
    }

private:
    int n_rx_ = 0;
    int n_t_ = 0;
    int n_c_ = 0;
    double subcarrier_spacing_hz_ = 0.0;
    double f0_hz_ = 0.0;
    std::vector<cplx> data_;
};

struct ChannelSequence
{
    std::vector<ChannelGrid> grids;
    double sampling_period_s = 0.0;

    std::size_t length() const { return grids.size(); }

    void validate() const
    {
        if (grids.empty())
            throw std::invalid_argument("ChannelSequence: empty sequence");
        for (const auto &g : grids)
            if (!g.same_shape(grids.front()))
                throw std::invalid_argument("ChannelSequence: grids differ in shape");
    }
};

} // namespace chanbench
