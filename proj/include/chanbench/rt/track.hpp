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
#include <chanbench/core/synthesis.hpp>
#include <chanbench/core/types.hpp>
#include <chanbench/rt/tracer.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace chanbench::rt {

/// Straight, axis-aligned receiver trajectory sampled every `step_m`.
struct Track
{
    Vec2 start;
    Vec2 direction{1.0, 0.0};
    double step_m = 0.1;
    int n_steps = 2;

    void validate() const
    {
        const bool axis = (std::abs(direction.x) == 1.0 && direction.y == 0.0) ||
                          (direction.x == 0.0 && std::abs(direction.y) == 1.0);
        if (!axis)
            throw std::invalid_argument("Track: direction must be (+-1,0) or (0,+-1)");
        if (!(step_m > 0.0))
            throw std::invalid_argument("Track: step_m must be > 0");
        if (n_steps < 2)
            throw std::invalid_argument("Track: n_steps must be >= 2");
    }

    Vec2 position(double distance) const { return start + distance * direction; }
    double length() const { return step_m * (n_steps - 1); }
    double heading() const { return direction.angle(); }
};

struct TrackSample
{
    Vec2 position;
    PathSet paths;
};

inline std::vector<TrackSample> sample_track(const Scene &scene, const Track &track)
{
    track.validate();
    std::vector<TrackSample> out;
    out.reserve(static_cast<std::size_t>(track.n_steps));
    for (int k = 0; k < track.n_steps; ++k)
    {
        const Vec2 p = track.position(track.step_m * k);
        out.push_back({p, trace_paths(scene, p)});
    }
    return out;
}

enum class MismatchPolicy {
    pad_ghosts, ///< pair unmatched paths with zero-power copies
    reject      ///< throw when endpoint path counts differ
};

namespace detail {

inline bool path_order(const Path &a, const Path &b)
{
    if (a.interactions != b.interactions)
        return a.interactions < b.interactions;
    return a.delay_s < b.delay_s;
}

inline Path ghost_of(const Path &p)
{
    Path g = p;
    g.gain = {0.0, 0.0};
    for (auto &e : g.element_gains)
        e = {0.0, 0.0};
    return g;
}

/// Pairs paths of two neighbouring samples. Paths are sorted by (reflection
/// signature, delay) and matched by index within each signature group;
/// leftovers get a zero-power ghost partner.
inline std::vector<std::pair<Path, Path>> match_paths(const PathSet &a, const PathSet &b, MismatchPolicy policy)
{
    if (policy == MismatchPolicy::reject && a.size() != b.size())
        throw std::invalid_argument("interpolate_track: path count mismatch between track samples (" +
                                    std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    std::vector<Path> pa = a.paths, pb = b.paths;
    std::stable_sort(pa.begin(), pa.end(), path_order);
    std::stable_sort(pb.begin(), pb.end(), path_order);

    std::vector<std::pair<Path, Path>> out;
    std::size_t i = 0, j = 0;
    while (i < pa.size() || j < pb.size())
    {
        if (j == pb.size() || (i < pa.size() && pa[i].interactions < pb[j].interactions))
        {
            out.emplace_back(pa[i], ghost_of(pa[i]));
            ++i;
        }
        else if (i == pa.size() || pb[j].interactions < pa[i].interactions)
        {
            out.emplace_back(ghost_of(pb[j]), pb[j]);
            ++j;
        }
        else
        {
            out.emplace_back(pa[i], pb[j]);
            ++i;
            ++j;
        }
    }
    return out;
}

/// b shifted by a multiple of 2 pi to lie nearest to a.
inline double unwrap_towards(double a, double b) { return b - two_pi * std::round((b - a) / two_pi); }

inline double lerp(double a, double b, double u) { return a + u * (b - a); }

inline Path interpolate_path(const Path &a, const Path &b, double u)
{
    const bool ghost_a = a.power() == 0.0;
    const bool ghost_b = b.power() == 0.0;
    const double phase_a = ghost_a ? std::arg(b.gain) : std::arg(a.gain);
    const double phase_b = unwrap_towards(phase_a, ghost_b ? phase_a : std::arg(b.gain));

    Path p = ghost_a ? b : a;
    const double power = lerp(a.power(), b.power(), u);
    p.gain = std::polar(std::sqrt(power), lerp(phase_a, phase_b, u));
    p.delay_s = lerp(a.delay_s, b.delay_s, u);
    p.aod_rad = lerp(a.aod_rad, unwrap_towards(a.aod_rad, b.aod_rad), u);
    p.aoa_rad = lerp(a.aoa_rad, unwrap_towards(a.aoa_rad, b.aoa_rad), u);
    p.doppler_hz = lerp(a.doppler_hz, b.doppler_hz, u);
    if (!a.element_gains.empty() && a.element_gains.size() == b.element_gains.size())
        for (std::size_t e = 0; e < p.element_gains.size(); ++e)
            p.element_gains[e] = a.element_gains[e] + u * (b.element_gains[e] - a.element_gains[e]);
    return p;
}

/// A ghost continues its partner's delay along the geometric slope
/// -cos(aoa - heading) / c, so a path that fades in or out over a segment
/// keeps a delay consistent with its Doppler.
inline void extend_ghosts(std::vector<std::pair<Path, Path>> &pairs, const Track &track)
{
    const double heading = track.heading();
    for (auto &[a, b] : pairs)
    {
        if (a.power() == 0.0 && b.power() > 0.0)
            a.delay_s = std::max(0.0, b.delay_s + std::cos(b.aoa_rad - heading) / speed_of_light * track.step_m);
        else if (b.power() == 0.0 && a.power() > 0.0)
            b.delay_s = std::max(0.0, a.delay_s - std::cos(a.aoa_rad - heading) / speed_of_light * track.step_m);
    }
}

} // namespace detail

/// Linear interpolation of per-path power, unwrapped phase, delay and angles
/// between neighbouring track samples, resampled every `target_step_m`.
/// `samples` must be spaced `track.step_m` apart along the track.
inline std::vector<PathSet> interpolate_track(const std::vector<TrackSample> &samples, const Track &track,
                                              double target_step_m, MismatchPolicy policy = MismatchPolicy::pad_ghosts)
{
    track.validate();
    if (samples.size() != static_cast<std::size_t>(track.n_steps))
        throw std::invalid_argument("interpolate_track: sample count does not match the track");
    if (!(target_step_m > 0.0) || !(target_step_m < track.step_m))
        throw std::invalid_argument("interpolate_track: target step must be positive and below the source spacing");

    const double length = track.length();
    const auto n_out = static_cast<std::size_t>(std::floor(length / target_step_m + 1e-9)) + 1;
    std::vector<PathSet> out;
    out.reserve(n_out);

    std::size_t cached_segment = static_cast<std::size_t>(-1);
    std::vector<std::pair<Path, Path>> pairs;
    for (std::size_t j = 0; j < n_out; ++j)
    {
        const double s = target_step_m * static_cast<double>(j);
        auto seg = static_cast<std::size_t>(std::floor(s / track.step_m));
        if (seg >= samples.size() - 1)
            seg = samples.size() - 2;
        const double u = std::clamp(s / track.step_m - static_cast<double>(seg), 0.0, 1.0);
        if (seg != cached_segment)
        {
            pairs = detail::match_paths(samples[seg].paths, samples[seg + 1].paths, policy);
            detail::extend_ghosts(pairs, track);
            cached_segment = seg;
        }
        PathSet ps;
        ps.rx_position = track.position(s);
        ps.paths.reserve(pairs.size());
        for (const auto &[a, b] : pairs)
            ps.paths.push_back(detail::interpolate_path(a, b, u));
        out.push_back(std::move(ps));
    }
    return out;
}

/// Geometric Doppler: f_D = (v f_c / c) cos(aoa - heading).
inline std::vector<PathSet> assign_doppler(std::vector<PathSet> pathsets, double speed_mps, double heading_rad,
                                           double carrier_hz)
{
    if (!(speed_mps >= 0.0) || !std::isfinite(heading_rad))
        throw std::invalid_argument("assign_doppler: invalid speed or heading");
    const double fmax = speed_mps * carrier_hz / speed_of_light;
    for (auto &ps : pathsets)
    {
        for (auto &p : ps.paths)
        {
            if (!std::isfinite(p.aoa_rad))
                throw std::invalid_argument("assign_doppler: path without arrival angle");
            p.doppler_hz = fmax * std::cos(p.aoa_rad - heading_rad);
        }
        ps.rx_velocity = Vec2{speed_mps * std::cos(heading_rad), speed_mps * std::sin(heading_rad)};
    }
    return pathsets;
}

struct TrackSequenceSpec
{
    int length = 60;
    double period_s = 1e-3;
    double speed_mps = 8.333;
    double base_step_m = 0.04; ///< coarse trace spacing, below half a wavelength at 3.5 GHz
};

struct TrackSequence
{
    ChannelSequence sequence;
    std::vector<PathSet> steps;
};

/// Traces the scene on a coarse grid along a straight track, interpolates to
/// the spacing implied by speed * period, attaches geometric Doppler and
/// synthesizes one grid per sampling instant.
inline TrackSequence build_track_sequence(const Scene &scene, Vec2 start, Vec2 direction, const TrackSequenceSpec &spec,
                                          const ArrayGeometry &rx, const ArrayGeometry &tx,
                                          const std::vector<double> &freqs_hz)
{
    if (spec.length < 1 || !(spec.period_s > 0.0) || !(spec.speed_mps > 0.0))
        throw std::invalid_argument("build_track_sequence: invalid sequence spec");
    const double target_step = spec.speed_mps * spec.period_s;
    const double span = target_step * (spec.length - 1);
    Track track;
    track.start = start;
    track.direction = direction;
    track.step_m = spec.base_step_m;
    track.n_steps = static_cast<int>(std::ceil(span / spec.base_step_m)) + 2;

    auto steps = interpolate_track(sample_track(scene, track), track, target_step);
    steps.resize(static_cast<std::size_t>(spec.length));
    steps = assign_doppler(std::move(steps), spec.speed_mps, track.heading(), scene.carrier_hz);

    TrackSequence out;
    out.sequence.sampling_period_s = spec.period_s;
    out.sequence.grids.reserve(steps.size());
    for (std::size_t k = 0; k < steps.size(); ++k)
        out.sequence.grids.push_back(synth_geometric(steps[k], rx, tx, freqs_hz, spec.period_s * static_cast<double>(k)));
    out.steps = std::move(steps);
    return out;
}

} // namespace chanbench::rt
