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
#include <chanbench/rt/scene.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace chanbench::rt {

namespace geom {

/// Mirror image of p across the infinite line through a and b.
inline Vec2 mirror(Vec2 p, Vec2 a, Vec2 b)
{
    const Vec2 d = b - a;
    const double t = (p - a).dot(d) / d.dot(d);
    const Vec2 foot = a + t * d;
    return 2.0 * foot - p;
}

/// Signed side of p relative to the directed line a->b.
inline double side(Vec2 p, Vec2 a, Vec2 b) { return (b - a).cross(p - a); }

/// Intersection of segment p->q with segment a->b. Returns (t along p->q,
/// u along a->b) when the two lines are not parallel.
inline bool intersect(Vec2 p, Vec2 q, Vec2 a, Vec2 b, double &t, double &u)
{
    const Vec2 r = q - p;
    const Vec2 s = b - a;
    const double denom = r.cross(s);
    if (std::abs(denom) < 1e-15 * r.norm() * s.norm())
        return false;
    const Vec2 ap = a - p;
    t = ap.cross(s) / denom;
    u = ap.cross(r) / denom;
    return true;
}

} // namespace geom

namespace detail {

inline constexpr double leg_eps = 1e-9;

/// True when no wall other than `skip_a`/`skip_b` strictly crosses p->q.
inline bool leg_clear(const Scene &scene, Vec2 p, Vec2 q, int skip_a, int skip_b)
{
    for (int w = 0; w < static_cast<int>(scene.walls.size()); ++w)
    {
        if (w == skip_a || w == skip_b)
            continue;
        double t = 0.0, u = 0.0;
        if (!geom::intersect(p, q, scene.walls[static_cast<std::size_t>(w)].a, scene.walls[static_cast<std::size_t>(w)].b, t, u))
            continue;
        if (t > leg_eps && t < 1.0 - leg_eps && u >= 0.0 && u <= 1.0)
            return false;
    }
    return true;
}

/// Validates one wall sequence with the image method; on success fills the
/// bounce points (excluding tx and rx).
inline bool trace_sequence(const Scene &scene, Vec2 rx, const std::vector<int> &seq, std::vector<Vec2> &bounces)
{
    const std::size_t k = seq.size();
    std::vector<Vec2> images(k + 1);
    images[0] = scene.tx_position;
    for (std::size_t j = 0; j < k; ++j)
    {
        const auto &w = scene.walls[static_cast<std::size_t>(seq[j])];
        images[j + 1] = geom::mirror(images[j], w.a, w.b);
    }

    bounces.assign(k, Vec2{});
    Vec2 next = rx;
    for (std::size_t jj = k; jj-- > 0;)
    {
        const auto &w = scene.walls[static_cast<std::size_t>(seq[jj])];
        double t = 0.0, u = 0.0;
        if (!geom::intersect(images[jj + 1], next, w.a, w.b, t, u))
            return false;
        if (!(t > leg_eps && t < 1.0 - leg_eps && u >= 0.0 && u <= 1.0))
            return false;
        bounces[jj] = images[jj + 1] + t * (next - images[jj + 1]);
        next = bounces[jj];
    }

    // Both neighbours of every bounce must sit on the same side of its wall.
    for (std::size_t j = 0; j < k; ++j)
    {
        const auto &w = scene.walls[static_cast<std::size_t>(seq[j])];
        const Vec2 prev = j == 0 ? scene.tx_position : bounces[j - 1];
        const Vec2 nxt = j + 1 == k ? rx : bounces[j + 1];
        if (geom::side(prev, w.a, w.b) * geom::side(nxt, w.a, w.b) <= 0.0)
            return false;
    }

    // Occlusion along every leg.
    Vec2 from = scene.tx_position;
    int from_wall = -1;
    for (std::size_t j = 0; j <= k; ++j)
    {
        const Vec2 to = j == k ? rx : bounces[j];
        const int to_wall = j == k ? -1 : seq[j];
        if (!leg_clear(scene, from, to, from_wall, to_wall))
            return false;
        from = to;
        from_wall = to_wall;
    }
    return true;
}

inline void enumerate(const Scene &scene, Vec2 rx, std::vector<int> &seq, double wavelength, PathSet &out)
{
    if (!seq.empty())
    {
        std::vector<Vec2> bounces;
        if (trace_sequence(scene, rx, seq, bounces))
        {
            double length = 0.0;
            cplx coefficient{1.0, 0.0};
            Vec2 from = scene.tx_position;
            for (std::size_t j = 0; j < seq.size(); ++j)
            {
                length += (bounces[j] - from).norm();
                from = bounces[j];
                coefficient *= scene.walls[static_cast<std::size_t>(seq[j])].reflection;
            }
            length += (rx - from).norm();

            Path p;
            p.gain = coefficient * (wavelength / (4.0 * pi * length));
            p.delay_s = length / speed_of_light;
            p.aod_rad = (bounces.front() - scene.tx_position).angle();
            p.aoa_rad = (bounces.back() - rx).angle();
            p.interactions = seq;
            out.paths.push_back(std::move(p));
        }
    }
    if (static_cast<int>(seq.size()) == scene.max_reflections)
        return;
    for (int w = 0; w < static_cast<int>(scene.walls.size()); ++w)
    {
        if (!seq.empty() && seq.back() == w)
            continue;
        seq.push_back(w);
        enumerate(scene, rx, seq, wavelength, out);
        seq.pop_back();
    }
}

} // namespace detail

/// Specular paths from the scene transmitter to `rx`: the LOS ray when it is
/// unobstructed plus image-method reflections up to `max_reflections`.
/// Gains are free-space amplitude lambda/(4 pi d) times the product of wall
/// coefficients; the carrier propagation phase is not included. Paths come
/// back ordered by (bounce count, wall sequence).
inline PathSet trace_paths(const Scene &scene, Vec2 rx)
{
    scene.validate();
    if (!scene.bounds.contains(rx))
        throw std::invalid_argument("trace_paths: receiver outside scene bounds");
    const double d_los = (rx - scene.tx_position).norm();
    if (!(d_los > 1e-9))
        throw std::invalid_argument("trace_paths: receiver coincides with transmitter");

    const double lambda = wavelength(scene.carrier_hz);
    PathSet out;
    out.rx_position = rx;

    if (detail::leg_clear(scene, scene.tx_position, rx, -1, -1))
    {
        Path los;
        los.gain = cplx{lambda / (4.0 * pi * d_los), 0.0};
        los.delay_s = d_los / speed_of_light;
        los.aod_rad = (rx - scene.tx_position).angle();
        los.aoa_rad = (scene.tx_position - rx).angle();
        out.paths.push_back(std::move(los));
    }

    std::vector<int> seq;
    detail::enumerate(scene, rx, seq, lambda, out);
    std::stable_sort(out.paths.begin(), out.paths.end(), [](const Path &a, const Path &b) {
        if (a.interactions.size() != b.interactions.size())
            return a.interactions.size() < b.interactions.size();
        return a.interactions < b.interactions;
    });
    return out;
}

} // namespace chanbench::rt
