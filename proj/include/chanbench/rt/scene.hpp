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
#include <chanbench/core/json_reader.hpp>
#include <chanbench/core/types.hpp>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chanbench::rt {

struct Wall
{
    Vec2 a;
    Vec2 b;
    cplx reflection{-1.0, 0.0};

    double length() const { return (b - a).norm(); }
};

struct Rect
{
    Vec2 min;
    Vec2 max;

    bool contains(Vec2 p) const { return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y; }
};

/// 2-D propagation scene for the image-method tracer.
struct Scene
{
    std::string name = "scene";
    std::vector<Wall> walls;
    Vec2 tx_position;
    Rect bounds{{-1e3, -1e3}, {1e3, 1e3}};
    int max_reflections = 2;
    double carrier_hz = 3.5e9;

    void validate() const
    {
        if (max_reflections < 0)
            throw std::invalid_argument("Scene: max_reflections must be >= 0");
        if (!(carrier_hz > 0.0))
            throw std::invalid_argument("Scene: carrier_hz must be > 0");
        if (!(bounds.max.x > bounds.min.x && bounds.max.y > bounds.min.y))
            throw std::invalid_argument("Scene: degenerate bounds");
        for (const auto &w : walls)
            if (!(w.length() > 0.0) || !std::isfinite(w.length()))
                throw std::invalid_argument("Scene: degenerate wall (zero length)");
        if (!bounds.contains(tx_position))
            throw std::invalid_argument("Scene: transmitter outside bounds");
    }
};

inline constexpr int scene_version = 1;

/// Scene document:
///   {"type":"scene","version":1,"name":..,"tx_position":[x,y],
///    "bounds":{"min":[x,y],"max":[x,y]},"max_reflections":2,"carrier_hz":3.5e9,
///    "walls":[{"a":[x,y],"b":[x,y],"reflection":[re,im]}],
///    "boxes":[{"min":[x,y],"max":[x,y],"reflection":[re,im]}]}
/// Boxes expand into their four faces.
inline Scene scene_from_json(const json &j, const std::string &path = "")
{
    JsonReader r(j, path);
    if (r.required<std::string>("type") != "scene")
        throw ConfigError(r.field_path("type"), "expected 'scene'");
    r.expect_version(scene_version);

    auto point = [](JsonReader &rd, const std::string &key) {
        const auto v = rd.required<std::vector<double>>(key);
        if (v.size() != 2)
            throw ConfigError(rd.field_path(key), "expected [x, y]");
        return Vec2{v[0], v[1]};
    };
    auto coefficient = [](JsonReader &rd) {
        const auto v = rd.optional<std::vector<double>>("reflection", {-1.0, 0.0});
        if (v.size() != 2)
            throw ConfigError(rd.field_path("reflection"), "expected [re, im]");
        return cplx{v[0], v[1]};
    };

    Scene s;
    s.name = r.optional<std::string>("name", s.name);
    s.tx_position = point(r, "tx_position");
    {
        auto b = r.child("bounds");
        s.bounds.min = point(b, "min");
        s.bounds.max = point(b, "max");
        b.finish();
    }
    s.max_reflections = r.optional<int>("max_reflections", s.max_reflections);
    s.carrier_hz = r.optional<double>("carrier_hz", s.carrier_hz);
    if (r.has("walls"))
        for (auto &w : r.array_of_objects("walls"))
        {
            Wall wall{point(w, "a"), point(w, "b"), coefficient(w)};
            w.finish();
            s.walls.push_back(wall);
        }
    if (r.has("boxes"))
        for (auto &b : r.array_of_objects("boxes"))
        {
            const Vec2 lo = point(b, "min");
            const Vec2 hi = point(b, "max");
            const cplx g = coefficient(b);
            b.finish();
            s.walls.push_back({{lo.x, lo.y}, {hi.x, lo.y}, g});
            s.walls.push_back({{hi.x, lo.y}, {hi.x, hi.y}, g});
            s.walls.push_back({{hi.x, hi.y}, {lo.x, hi.y}, g});
            s.walls.push_back({{lo.x, hi.y}, {lo.x, lo.y}, g});
        }
    r.finish();
    try
    {
        s.validate();
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(path.empty() ? "/" : path, e.what());
    }
    return s;
}

inline json to_json(const Scene &s)
{
    json walls = json::array();
    for (const auto &w : s.walls)
        walls.push_back({{"a", {w.a.x, w.a.y}}, {"b", {w.b.x, w.b.y}}, {"reflection", {w.reflection.real(), w.reflection.imag()}}});
    return {{"type", "scene"},
            {"version", scene_version},
            {"name", s.name},
            {"tx_position", {s.tx_position.x, s.tx_position.y}},
            {"bounds", {{"min", {s.bounds.min.x, s.bounds.min.y}}, {"max", {s.bounds.max.x, s.bounds.max.y}}}},
            {"max_reflections", s.max_reflections},
            {"carrier_hz", s.carrier_hz},
            {"walls", walls}};
}

} // namespace chanbench::rt
