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

#include <chanbench/core/constants.hpp>
#include <chanbench/core/types.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace chanbench::preprocess {

/// Complex angle-delay map, row-major (delay, angle).
struct AngleDelay
{
    int n_delay = 0;
    int n_angle = 0;
    std::vector<cplx> data;

    cplx &operator()(int d, int a) { return data[static_cast<std::size_t>(d) * n_angle + a]; }
    const cplx &operator()(int d, int a) const { return data[static_cast<std::size_t>(d) * n_angle + a]; }

    double energy() const
    {
        double e = 0.0;
        for (const auto &v : data)
            e += std::norm(v);
        return e;
    }
};

namespace detail {

/// Unitary DFT matrix; sign = -1 for the forward transform, +1 for the inverse.
inline std::vector<cplx> dft_matrix(int n, int sign)
{
    std::vector<cplx> w(static_cast<std::size_t>(n) * n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m)
            w[static_cast<std::size_t>(k) * n + m] =
                std::polar(scale, sign * two_pi * static_cast<double>((static_cast<long>(k) * m) % n) / n);
    return w;
}

} // namespace detail

/// Full (untrimmed) angle-delay transform of receive antenna 0.
///
/// Frequency -> delay uses the unitary inverse DFT, so a path delayed by
/// k / (N_c * spacing) lands in delay bin k under the exp(-j 2 pi f tau)
/// convention. Antennas -> angle uses the unitary forward DFT.
inline AngleDelay angle_delay_full(const ChannelGrid &grid)
{
    if (grid.n_rx() != 1)
        throw std::invalid_argument("to_angle_delay: expected a single receive antenna");
    const int nc = grid.n_c();
    const int nt = grid.n_t();
    const auto w_delay = detail::dft_matrix(nc, +1);
    const auto w_angle = detail::dft_matrix(nt, -1);

    std::vector<cplx> delay(static_cast<std::size_t>(nc) * nt);
    for (int m = 0; m < nc; ++m)
        for (int t = 0; t < nt; ++t)
        {
            cplx acc{0.0, 0.0};
            for (int c = 0; c < nc; ++c)
                acc += grid(0, t, c) * w_delay[static_cast<std::size_t>(c) * nc + m];
            delay[static_cast<std::size_t>(m) * nt + t] = acc;
        }

    AngleDelay out{nc, nt, std::vector<cplx>(static_cast<std::size_t>(nc) * nt)};
    for (int m = 0; m < nc; ++m)
        for (int q = 0; q < nt; ++q)
        {
            cplx acc{0.0, 0.0};
            for (int t = 0; t < nt; ++t)
                acc += delay[static_cast<std::size_t>(m) * nt + t] * w_angle[static_cast<std::size_t>(t) * nt + q];
            out(m, q) = acc;
        }
    return out;
}

inline AngleDelay trim_delay(const AngleDelay &full, int n_delay_keep)
{
    if (n_delay_keep < 1 || n_delay_keep > full.n_delay)
        throw std::invalid_argument("to_angle_delay: n_delay_keep must lie in [1, N_c]");
    AngleDelay out{n_delay_keep, full.n_angle,
                   std::vector<cplx>(full.data.begin(), full.data.begin() + static_cast<std::ptrdiff_t>(n_delay_keep) * full.n_angle)};
    return out;
}

inline AngleDelay to_angle_delay(const ChannelGrid &grid, int n_delay_keep = 16)
{
    if (grid.n_c() < n_delay_keep)
        throw std::invalid_argument("to_angle_delay: fewer subcarriers than retained delay bins");
    return trim_delay(angle_delay_full(grid), n_delay_keep);
}

/// Share of the angle-delay energy that survives trimming.
inline double retained_energy_fraction(const ChannelGrid &grid, int n_delay_keep = 16)
{
    const auto full = angle_delay_full(grid);
    const double total = full.energy();
    if (!(total > 0.0))
        return 0.0;
    return trim_delay(full, n_delay_keep).energy() / total;
}

} // namespace chanbench::preprocess
