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
#include <chanbench/rt/scene.hpp>
#include <chanbench/stochastic/profiles.hpp>

#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace chanbench::eval {

/// Site-specific source: an image-method scene plus the areas where
/// receivers (compression) or track starts (prediction) may be placed.
struct RtSource
{
    rt::Scene scene;
    std::vector<rt::Rect> receiver_regions;
    double grid_spacing_m = 1.0;
    double min_distance_m = 5.0;
    double min_retained_energy = 0.9;
};

/// One path with random phase and angles. The Doppler shift is either fixed
/// or, when absent, drawn from the mobility model like any stochastic path.
struct SinglePathSource
{
    std::optional<double> doppler_hz;
};

using DomainSource = std::variant<stochastic::TdlProfile, stochastic::CdlProfile, stochastic::GbsmConfig, RtSource,
                                  SinglePathSource>;

struct DomainConfig
{
    std::string name;
    std::string type; ///< tdl | cdl | uma | rt | single_path
    DomainSource source;
    double delay_spread_s = 300e-9;
    int samples = 0; ///< 0 selects the experiment default

    bool is_rt() const { return std::holds_alternative<RtSource>(source); }

    /// Fully resolved generator description (referenced files inlined); the
    /// dataset cache key is derived from it.
    json generator_json() const
    {
        json j{{"name", name}, {"type", type}, {"delay_spread_s", delay_spread_s}};
        std::visit(
            [&](const auto &s) {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, RtSource>)
                {
                    j["scene"] = rt::to_json(s.scene);
                    json regions = json::array();
                    for (const auto &r : s.receiver_regions)
                        regions.push_back({{"min", {r.min.x, r.min.y}}, {"max", {r.max.x, r.max.y}}});
                    j["receiver_regions"] = regions;
                    j["grid_spacing_m"] = s.grid_spacing_m;
                    j["min_distance_m"] = s.min_distance_m;
                    j["min_retained_energy"] = s.min_retained_energy;
                }
                else if constexpr (std::is_same_v<S, SinglePathSource>)
                {
                    j["doppler_hz"] = s.doppler_hz ? json(*s.doppler_hz) : json(nullptr);
                }
                else
                {
                    j["profile"] = stochastic::to_json(s);
                }
            },
            source);
        return j;
    }
};

namespace detail {

/// Loads `key` either as an inline object or as a path relative to `base_dir`.
inline json inline_or_file(JsonReader &r, const std::string &key, const std::filesystem::path &base_dir)
{
    const json &v = r.raw(key);
    if (v.is_object())
        return v;
    if (!v.is_string())
        throw ConfigError(r.field_path(key), "expected an object or a file path");
    std::filesystem::path p = v.get<std::string>();
    if (p.is_relative())
        p = base_dir / p;
    if (!std::filesystem::exists(p))
        throw ConfigError(r.field_path(key), "referenced file does not exist: " + p.string());
    return stochastic::read_json_file(p.string());
}

inline rt::Rect rect_from_json(JsonReader &r)
{
    auto point = [&](const std::string &key) {
        const auto v = r.required<std::vector<double>>(key);
        if (v.size() != 2)
            throw ConfigError(r.field_path(key), "expected [x, y]");
        return Vec2{v[0], v[1]};
    };
    rt::Rect rect{point("min"), point("max")};
    r.finish();
    if (!(rect.max.x > rect.min.x && rect.max.y > rect.min.y))
        throw ConfigError(r.path(), "degenerate region");
    return rect;
}

} // namespace detail

inline DomainConfig domain_from_json(const json &j, const std::string &path, const std::filesystem::path &base_dir)
{
    JsonReader r(j, path);
    DomainConfig d;
    d.name = r.required<std::string>("name");
    if (d.name.empty() || d.name.find_first_of(",/\\ \t\"") != std::string::npos)
        throw ConfigError(r.field_path("name"), "domain names must be non-empty without commas, slashes or spaces");
    d.type = r.required<std::string>("type");
    d.delay_spread_s = r.optional("delay_spread_s", d.delay_spread_s);
    d.samples = r.optional("samples", 0);
    if (!(d.delay_spread_s >= 0.0))
        throw ConfigError(r.field_path("delay_spread_s"), "must be >= 0");
    if (d.samples < 0)
        throw ConfigError(r.field_path("samples"), "must be >= 0");

    const std::string profile_path = r.field_path("profile");
    if (d.type == "tdl")
        d.source = stochastic::tdl_from_json(detail::inline_or_file(r, "profile", base_dir), profile_path);
    else if (d.type == "cdl")
        d.source = stochastic::cdl_from_json(detail::inline_or_file(r, "profile", base_dir), profile_path);
    else if (d.type == "uma")
        d.source = stochastic::gbsm_from_json(detail::inline_or_file(r, "profile", base_dir), profile_path);
    else if (d.type == "rt")
    {
        RtSource s;
        s.scene = rt::scene_from_json(detail::inline_or_file(r, "scene", base_dir), r.field_path("scene"));
        for (auto &reg : r.array_of_objects("receiver_regions"))
            s.receiver_regions.push_back(detail::rect_from_json(reg));
        if (s.receiver_regions.empty())
            throw ConfigError(r.field_path("receiver_regions"), "at least one region required");
        for (const auto &reg : s.receiver_regions)
            if (!s.scene.bounds.contains(reg.min) || !s.scene.bounds.contains(reg.max))
                throw ConfigError(r.field_path("receiver_regions"), "region leaves the scene bounds");
        s.grid_spacing_m = r.optional("grid_spacing_m", s.grid_spacing_m);
        s.min_distance_m = r.optional("min_distance_m", s.min_distance_m);
        s.min_retained_energy = r.optional("min_retained_energy", s.min_retained_energy);
        if (!(s.grid_spacing_m > 0.0) || !(s.min_distance_m >= 0.0) ||
            !(s.min_retained_energy >= 0.0 && s.min_retained_energy <= 1.0))
            throw ConfigError(r.path(), "invalid receiver sampling settings");
        d.source = std::move(s);
    }
    else if (d.type == "single_path")
    {
        SinglePathSource s;
        if (r.has("doppler_hz"))
            s.doppler_hz = r.required<double>("doppler_hz");
        d.source = s;
    }
    else
        throw ConfigError(r.field_path("type"), "unknown domain type '" + d.type + "'");
    r.finish();
    return d;
}

inline void check_unique_names(const std::vector<DomainConfig> &domains, const std::string &path)
{
    std::set<std::string> seen;
    for (const auto &d : domains)
        if (!seen.insert(d.name).second)
            throw ConfigError(path, "duplicate domain name '" + d.name + "'");
}

} // namespace chanbench::eval
