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
#include <chanbench/core/rng.hpp>
#include <chanbench/core/synthesis.hpp>
#include <chanbench/core/types.hpp>
#include <chanbench/stochastic/profiles.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace chanbench::stochastic {

namespace detail {

/// Lower Cholesky factor of the exponential correlation matrix rho^|i-j|.
inline Eigen::MatrixXcd exponential_correlation_factor(int n, double rho)
{
    Eigen::MatrixXcd r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            r(i, j) = std::pow(rho, std::abs(i - j));
    if (rho == 0.0)
        return r; // identity
    Eigen::LLT<Eigen::MatrixXcd> llt(r);
    return llt.matrixL();
}

inline double wrap_angle(double a)
{
    a = std::fmod(a + pi, two_pi);
    if (a < 0.0)
        a += two_pi;
    return a - pi;
}

} // namespace detail

/// Tapped delay line draw. Each tap carries i.i.d. (optionally Kronecker
/// correlated) gains for every antenna pair in `element_gains`; `gain` is
/// the (0,0) element. Angles are left at zero since taps have no geometry.
inline PathSet gen_tdl(const TdlProfile &profile, double delay_spread_s, int n_rx, int n_t, Rng &rng)
{
    profile.validate();
    if (n_rx < 1 || n_t < 1)
        throw std::invalid_argument("gen_tdl: antenna counts must be >= 1");
    if (!(delay_spread_s >= 0.0))
        throw std::invalid_argument("gen_tdl: delay spread must be >= 0");

    const auto powers = profile.linear_powers();
    const Eigen::MatrixXcd l_rx = detail::exponential_correlation_factor(n_rx, profile.rx_correlation);
    const Eigen::MatrixXcd l_tx = detail::exponential_correlation_factor(n_t, profile.tx_correlation);

    PathSet out;
    out.paths.reserve(profile.taps.size());
    Eigen::MatrixXcd w(n_rx, n_t);
    for (std::size_t l = 0; l < profile.taps.size(); ++l)
    {
        for (int r = 0; r < n_rx; ++r)
            for (int t = 0; t < n_t; ++t)
                w(r, t) = complex_normal(rng, powers[l]);
        const Eigen::MatrixXcd g = l_rx * w * l_tx.transpose();

        Path p;
        p.delay_s = profile.taps[l].normalized_delay * delay_spread_s;
        p.element_gains.resize(static_cast<std::size_t>(n_rx) * n_t);
        for (int r = 0; r < n_rx; ++r)
            for (int t = 0; t < n_t; ++t)
                p.element_gains[static_cast<std::size_t>(r) * n_t + t] = g(r, t);
        p.gain = p.element_gains.front();
        out.paths.push_back(std::move(p));
    }
    return out;
}

/// Clustered delay line draw: fixed angles and delays from the profile,
/// uniformly random subpath phases.
inline PathSet gen_cdl(const CdlProfile &profile, double delay_spread_s, Rng &rng)
{
    profile.validate();
    if (!(delay_spread_s >= 0.0))
        throw std::invalid_argument("gen_cdl: delay spread must be >= 0");

    const auto powers = profile.linear_powers();
    const int m = profile.per_cluster_subpaths;
    PathSet out;
    out.paths.reserve(profile.clusters.size() * static_cast<std::size_t>(m));
    for (std::size_t c = 0; c < profile.clusters.size(); ++c)
    {
        const auto &cl = profile.clusters[c];
        const double amp = std::sqrt(powers[c] / m);
        for (int s = 0; s < m; ++s)
        {
            const double offset = profile.subpath_angle_offsets_deg[static_cast<std::size_t>(s)];
            Path p;
            p.gain = std::polar(amp, uniform(rng, 0.0, two_pi));
            p.delay_s = cl.delay_norm * delay_spread_s;
            p.aod_rad = deg_to_rad(cl.aod_deg + offset);
            p.aoa_rad = deg_to_rad(cl.aoa_deg + offset);
            out.paths.push_back(std::move(p));
        }
    }
    return out;
}

/// Urban-macro style draw: random cluster count, exponential delays scaled
/// to the configured RMS delay spread, wrapped-Gaussian angles around a
/// random mean direction, and an optional LOS ray with Rician K-factor.
///
/// The delay scaling is applied to the NLOS clusters before the LOS ray is
/// injected, so a strong LOS component shortens the composite spread.
inline PathSet gen_uma(const GbsmConfig &config, Rng &rng)
{
    config.validate();
    const int n = std::uniform_int_distribution<int>(config.n_clusters_min, config.n_clusters_max)(rng);
    const double spread = deg_to_rad(config.angle_spread_deg);
    const double mean_aod = uniform(rng, -pi, pi);
    const double mean_aoa = detail::wrap_angle(mean_aod + pi);

    std::vector<double> delays(static_cast<std::size_t>(n));
    std::exponential_distribution<double> expo(1.0);
    for (auto &d : delays)
        d = expo(rng);
    std::sort(delays.begin(), delays.end());
    const double d0 = delays.front();
    for (auto &d : delays)
        d -= d0;

    PathSet out;
    double nlos_power = 0.0;
    for (int i = 0; i < n; ++i)
    {
        const double tau = delays[static_cast<std::size_t>(i)];
        const double shadow = normal(rng, 0.0, config.shadowing_std_db);
        const double p = std::exp(-tau * (config.delay_scaling - 1.0) / config.delay_scaling) *
                         std::pow(10.0, -shadow / 10.0);
        Path path;
        path.gain = std::polar(std::sqrt(p), uniform(rng, 0.0, two_pi));
        path.delay_s = tau;
        path.aod_rad = detail::wrap_angle(mean_aod + normal(rng, 0.0, spread));
        path.aoa_rad = detail::wrap_angle(mean_aoa + normal(rng, 0.0, spread));
        nlos_power += p;
        out.paths.push_back(std::move(path));
    }

    // Scale NLOS delays to the target RMS delay spread and powers to unit sum.
    const double ds = out.rms_delay_spread();
    const double scale = ds > 0.0 ? config.delay_spread_s / ds : 0.0;
    const double norm = 1.0 / std::sqrt(nlos_power);
    for (auto &path : out.paths)
    {
        path.delay_s *= scale;
        path.gain *= norm;
    }

    if (uniform(rng) < config.los_probability)
    {
        const double k_db = config.rician_k_db_max > config.rician_k_db_min
                                ? uniform(rng, config.rician_k_db_min, config.rician_k_db_max)
                                : config.rician_k_db_min;
        const double k = std::pow(10.0, k_db / 10.0);
        const double nlos_scale = std::sqrt(1.0 / (k + 1.0));
        for (auto &path : out.paths)
            path.gain *= nlos_scale;
        Path los;
        los.gain = std::polar(std::sqrt(k / (k + 1.0)), uniform(rng, 0.0, two_pi));
        los.delay_s = 0.0;
        los.aod_rad = mean_aod;
        los.aoa_rad = mean_aoa;
        out.paths.insert(out.paths.begin(), std::move(los));
    }
    return out;
}

struct MobilityDraw
{
    double speed_mps = 0.0;
    double heading_rad = 0.0;
    std::vector<double> per_path_angle_rad;

    void validate(std::size_t n_paths) const
    {
        if (!(speed_mps >= 0.0) || !std::isfinite(speed_mps))
            throw std::invalid_argument("MobilityDraw: speed must be finite and >= 0");
        if (per_path_angle_rad.size() != n_paths)
            throw std::invalid_argument("MobilityDraw: missing per-path motion angles");
    }
};

/// Random heading and per-path angles, both uniform on [0, 2pi).
inline MobilityDraw draw_mobility(std::size_t n_paths, double speed_mps, Rng &rng)
{
    MobilityDraw m;
    m.speed_mps = speed_mps;
    m.heading_rad = uniform(rng, 0.0, two_pi);
    m.per_path_angle_rad.resize(n_paths);
    for (auto &a : m.per_path_angle_rad)
        a = uniform(rng, 0.0, two_pi);
    return m;
}

/// Sets f_D = (v / lambda) cos(angle - heading) on every path.
inline PathSet apply_mobility(PathSet pathset, const MobilityDraw &mobility, double carrier_hz)
{
    mobility.validate(pathset.size());
    const double fmax = mobility.speed_mps * carrier_hz / speed_of_light;
    for (std::size_t n = 0; n < pathset.size(); ++n)
        pathset.paths[n].doppler_hz = fmax * std::cos(mobility.per_path_angle_rad[n] - mobility.heading_rad);
    return pathset;
}

struct SynthesisSetup
{
    ArrayGeometry rx;
    ArrayGeometry tx;
    std::vector<double> freqs_hz{0.0};
};

/// Per-step path sets of a stochastic sequence. Large-scale parameters are
/// frozen: every step carries the same paths, and time only enters through
/// the Doppler phase at synthesis.
inline std::vector<PathSet> evolve_pathsets(const PathSet &pathset, const MobilityDraw &mobility, int length,
                                            double carrier_hz)
{
    if (length < 1)
        throw std::invalid_argument("evolve_sequence: length must be >= 1");
    return std::vector<PathSet>(static_cast<std::size_t>(length), apply_mobility(pathset, mobility, carrier_hz));
}

inline ChannelSequence evolve_sequence(const PathSet &pathset, const MobilityDraw &mobility, int length,
                                       double period_s, double carrier_hz, const SynthesisSetup &setup)
{
    if (!(period_s > 0.0))
        throw std::invalid_argument("evolve_sequence: period must be > 0");
    const auto steps = evolve_pathsets(pathset, mobility, length, carrier_hz);
    ChannelSequence seq;
    seq.sampling_period_s = period_s;
    seq.grids.reserve(steps.size());
    for (std::size_t k = 0; k < steps.size(); ++k)
        seq.grids.push_back(synth_geometric(steps[k], setup.rx, setup.tx, setup.freqs_hz, period_s * static_cast<double>(k)));
    return seq;
}

} // namespace chanbench::stochastic
