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

#include <chanbench/core/array_response.hpp>
#include <chanbench/core/constants.hpp>
#include <chanbench/core/rng.hpp>
#include <chanbench/core/types.hpp>

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace chanbench {

// Phase convention used everywhere: exp(-j 2 pi f tau) * exp(+j 2 pi f_D t).

/// Equally spaced baseband tone offsets f0 + k * spacing.
inline std::vector<double> tone_grid(int n_tones, double spacing_hz, double f0_hz = 0.0)
{
    std::vector<double> f(static_cast<std::size_t>(n_tones));
    for (int k = 0; k < n_tones; ++k)
        f[static_cast<std::size_t>(k)] = f0_hz + spacing_hz * k;
    return f;
}

/// H(t,f) = sum_n alpha_n a_rx(aoa_n) a_tx(aod_n)^H exp(-j2pi f tau_n) exp(j2pi fD_n t)
inline ChannelGrid synth_geometric(const PathSet &pathset, const ArrayGeometry &rx, const ArrayGeometry &tx,
                                   std::span<const double> freqs_hz, double t_s)
{
    rx.validate();
    tx.validate();
    if (freqs_hz.empty())
        throw std::invalid_argument("synth_geometric: empty frequency grid");
    if (!std::isfinite(t_s))
        throw std::invalid_argument("synth_geometric: non-finite time");

    const int n_rx = rx.num_elements;
    const int n_t = tx.num_elements;
    const int n_c = static_cast<int>(freqs_hz.size());
    const double spacing = n_c > 1 ? freqs_hz[1] - freqs_hz[0] : 0.0;
    ChannelGrid grid(n_rx, n_t, n_c, spacing, freqs_hz[0]);

    std::vector<cplx> freq_term(static_cast<std::size_t>(n_c));
    std::vector<cplx> spatial(static_cast<std::size_t>(n_rx) * n_t);

    for (const auto &path : pathset.paths)
    {
        path.validate();
        if (!path.element_gains.empty() && path.element_gains.size() != spatial.size())
            throw std::invalid_argument("synth_geometric: element_gains size does not match arrays");

        const cplx doppler = std::polar(1.0, two_pi * path.doppler_hz * t_s);
        for (int c = 0; c < n_c; ++c)
            freq_term[static_cast<std::size_t>(c)] = std::polar(1.0, -two_pi * freqs_hz[static_cast<std::size_t>(c)] * path.delay_s) * doppler;

        if (path.element_gains.empty())
        {
            const auto a_rx = array_response(rx, path.aoa_rad);
            const auto a_tx = array_response(tx, path.aod_rad);
            for (int r = 0; r < n_rx; ++r)
                for (int t = 0; t < n_t; ++t)
                    spatial[static_cast<std::size_t>(r) * n_t + t] =
                        path.gain * a_rx[static_cast<std::size_t>(r)] * std::conj(a_tx[static_cast<std::size_t>(t)]);
        }
        else
        {
            spatial = path.element_gains;
        }

        auto &data = grid.data();
        for (int r = 0; r < n_rx; ++r)
            for (int t = 0; t < n_t; ++t)
            {
                const cplx s = spatial[static_cast<std::size_t>(r) * n_t + t];
                cplx *row = &data[grid.index(r, t, 0)];
                for (int c = 0; c < n_c; ++c)
                    row[c] += s * freq_term[static_cast<std::size_t>(c)];
            }
    }
    return grid;
}

struct TdlTap
{
    double power = 0.0;
    double delay_s = 0.0;
    double doppler_hz = 0.0;
};

/// One draw of tap gains for a tapped delay line; evaluating it at several
/// times keeps the realization fixed.
struct TdlRealization
{
    std::vector<TdlTap> taps; // powers normalized to unit sum
    std::vector<cplx> gains;

    std::vector<cplx> evaluate(std::span<const double> freqs_hz, double t_s) const
    {
        std::vector<cplx> h(freqs_hz.size());
        for (std::size_t l = 0; l < taps.size(); ++l)
        {
            const cplx rot = gains[l] * std::polar(1.0, two_pi * taps[l].doppler_hz * t_s);
            for (std::size_t k = 0; k < freqs_hz.size(); ++k)
                h[k] += rot * std::polar(1.0, -two_pi * freqs_hz[k] * taps[l].delay_s);
        }
        return h;
    }
};

inline std::vector<TdlTap> normalize_taps(std::vector<TdlTap> taps)
{
    if (taps.empty())
        throw std::invalid_argument("synth_tdl: empty tap list");
    double total = 0.0;
    for (const auto &tap : taps)
    {
        if (!(tap.power >= 0.0) || !std::isfinite(tap.power))
            throw std::invalid_argument("synth_tdl: tap power must be finite and >= 0");
        if (!(tap.delay_s >= 0.0) || !std::isfinite(tap.delay_s) || !std::isfinite(tap.doppler_hz))
            throw std::invalid_argument("synth_tdl: invalid tap delay or Doppler");
        total += tap.power;
    }
    if (!(total > 0.0))
        throw std::invalid_argument("synth_tdl: tap powers sum to zero");
    for (auto &tap : taps)
        tap.power /= total;
    return taps;
}

inline TdlRealization draw_tdl(std::vector<TdlTap> taps, Rng &rng)
{
    TdlRealization out;
    out.taps = normalize_taps(std::move(taps));
    out.gains.reserve(out.taps.size());
    for (const auto &tap : out.taps)
        out.gains.push_back(complex_normal(rng, tap.power));
    return out;
}

/// Scalar TDL frequency response for a fresh gain draw.
inline std::vector<cplx> synth_tdl(std::vector<TdlTap> taps, std::span<const double> freqs_hz, double t_s, Rng &rng)
{
    return draw_tdl(std::move(taps), rng).evaluate(freqs_hz, t_s);
}

} // namespace chanbench
