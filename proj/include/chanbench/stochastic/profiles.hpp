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

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace chanbench::stochastic {

// Profile documents are versioned JSON objects:
//   {"type": "tdl" | "cdl" | "gbsm", "version": 1, ...fields below...}
inline constexpr int profile_version = 1;

struct TdlTapSpec
{
    double relative_power_db = 0.0;
    double normalized_delay = 0.0;
};

struct TdlProfile
{
    std::string name;
    std::vector<TdlTapSpec> taps;
    // Exponential (Kronecker) antenna correlation coefficients; 0 means i.i.d.
    double tx_correlation = 0.0;
    double rx_correlation = 0.0;

    void validate() const
    {
        if (taps.empty())
            throw std::invalid_argument("TdlProfile '" + name + "': at least one tap required");
        for (const auto &t : taps)
            if (!(t.normalized_delay >= 0.0) || !std::isfinite(t.relative_power_db))
                throw std::invalid_argument("TdlProfile '" + name + "': invalid tap");
        if (!(tx_correlation >= 0.0 && tx_correlation < 1.0) || !(rx_correlation >= 0.0 && rx_correlation < 1.0))
            throw std::invalid_argument("TdlProfile '" + name + "': correlation must lie in [0, 1)");
    }

    /// Linear tap powers normalized to unit sum.
    std::vector<double> linear_powers() const
    {
        std::vector<double> p;
        double total = 0.0;
        for (const auto &t : taps)
        {
            p.push_back(std::pow(10.0, t.relative_power_db / 10.0));
            total += p.back();
        }
        for (auto &v : p)
            v /= total;
        return p;
    }
};

struct CdlCluster
{
    double power_db = 0.0;
    double delay_norm = 0.0;
    double aod_deg = 0.0;
    double aoa_deg = 0.0;
};

struct CdlProfile
{
    std::string name;
    std::vector<CdlCluster> clusters;
    int per_cluster_subpaths = 1;
    std::vector<double> subpath_angle_offsets_deg{0.0};

    void validate() const
    {
        if (clusters.empty())
            throw std::invalid_argument("CdlProfile '" + name + "': at least one cluster required");
        if (per_cluster_subpaths < 1)
            throw std::invalid_argument("CdlProfile '" + name + "': per_cluster_subpaths must be >= 1");
        if (static_cast<int>(subpath_angle_offsets_deg.size()) != per_cluster_subpaths)
            throw std::invalid_argument("CdlProfile '" + name + "': offsets length must equal per_cluster_subpaths");
        for (const auto &c : clusters)
            if (!(c.delay_norm >= 0.0) || !std::isfinite(c.power_db) || !std::isfinite(c.aod_deg) ||
                !std::isfinite(c.aoa_deg))
                throw std::invalid_argument("CdlProfile '" + name + "': invalid cluster");
    }

    std::vector<double> linear_powers() const
    {
        std::vector<double> p;
        double total = 0.0;
        for (const auto &c : clusters)
        {
            p.push_back(std::pow(10.0, c.power_db / 10.0));
            total += p.back();
        }
        for (auto &v : p)
            v /= total;
        return p;
    }
};

/// Urban-macro style geometry-based stochastic configuration.
struct GbsmConfig
{
    std::string name = "uma";
    int n_clusters_min = 8;
    int n_clusters_max = 16;
    double delay_spread_s = 300e-9;
    double angle_spread_deg = 15.0;
    double rician_k_db_min = 0.0;
    double rician_k_db_max = 9.0;
    double los_probability = 0.3;
    double shadowing_std_db = 3.0;
    double delay_scaling = 2.3;

    void validate() const
    {
        if (n_clusters_min < 1 || n_clusters_max < n_clusters_min)
            throw std::invalid_argument("GbsmConfig: invalid cluster-count range");
        if (!(delay_spread_s > 0.0))
            throw std::invalid_argument("GbsmConfig: delay_spread_s must be > 0");
        if (!(angle_spread_deg >= 0.0))
            throw std::invalid_argument("GbsmConfig: angle_spread_deg must be >= 0");
        if (!(rician_k_db_max >= rician_k_db_min))
            throw std::invalid_argument("GbsmConfig: invalid Rician K range");
        if (!(los_probability >= 0.0 && los_probability <= 1.0))
            throw std::invalid_argument("GbsmConfig: los_probability must lie in [0, 1]");
        if (!(shadowing_std_db >= 0.0) || !(delay_scaling > 1.0))
            throw std::invalid_argument("GbsmConfig: invalid shadowing or delay scaling");
    }
};

namespace detail {

inline void expect_type(JsonReader &r, const std::string &type)
{
    const auto t = r.required<std::string>("type");
    if (t != type)
        throw ConfigError(r.field_path("type"), "expected '" + type + "', got '" + t + "'");
    r.expect_version(profile_version);
}

} // namespace detail

inline TdlProfile tdl_from_json(const json &j, const std::string &path = "")
{
    JsonReader r(j, path);
    detail::expect_type(r, "tdl");
    TdlProfile p;
    p.name = r.required<std::string>("name");
    for (auto &t : r.array_of_objects("taps"))
    {
        TdlTapSpec tap;
        tap.relative_power_db = t.required<double>("relative_power_db");
        tap.normalized_delay = t.required<double>("normalized_delay");
        t.finish();
        p.taps.push_back(tap);
    }
    p.tx_correlation = r.optional<double>("tx_correlation", 0.0);
    p.rx_correlation = r.optional<double>("rx_correlation", 0.0);
    r.finish();
    try
    {
        p.validate();
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(path.empty() ? "/" : path, e.what());
    }
    return p;
}

inline json to_json(const TdlProfile &p)
{
    json taps = json::array();
    for (const auto &t : p.taps)
        taps.push_back({{"relative_power_db", t.relative_power_db}, {"normalized_delay", t.normalized_delay}});
    return {{"type", "tdl"},
            {"version", profile_version},
            {"name", p.name},
            {"taps", taps},
            {"tx_correlation", p.tx_correlation},
            {"rx_correlation", p.rx_correlation}};
}

inline CdlProfile cdl_from_json(const json &j, const std::string &path = "")
{
    JsonReader r(j, path);
    detail::expect_type(r, "cdl");
    CdlProfile p;
    p.name = r.required<std::string>("name");
    for (auto &c : r.array_of_objects("clusters"))
    {
        CdlCluster cl;
        cl.power_db = c.required<double>("power_db");
        cl.delay_norm = c.required<double>("delay_norm");
        cl.aod_deg = c.required<double>("aod_deg");
        cl.aoa_deg = c.required<double>("aoa_deg");
        c.finish();
        p.clusters.push_back(cl);
    }
    p.per_cluster_subpaths = r.required<int>("per_cluster_subpaths");
    p.subpath_angle_offsets_deg = r.required<std::vector<double>>("subpath_angle_offsets_deg");
    r.finish();
    try
    {
        p.validate();
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(path.empty() ? "/" : path, e.what());
    }
    return p;
}

inline json to_json(const CdlProfile &p)
{
    json clusters = json::array();
    for (const auto &c : p.clusters)
        clusters.push_back(
            {{"power_db", c.power_db}, {"delay_norm", c.delay_norm}, {"aod_deg", c.aod_deg}, {"aoa_deg", c.aoa_deg}});
    return {{"type", "cdl"},
            {"version", profile_version},
            {"name", p.name},
            {"clusters", clusters},
            {"per_cluster_subpaths", p.per_cluster_subpaths},
            {"subpath_angle_offsets_deg", p.subpath_angle_offsets_deg}};
}

inline GbsmConfig gbsm_from_json(const json &j, const std::string &path = "")
{
    JsonReader r(j, path);
    detail::expect_type(r, "gbsm");
    GbsmConfig c;
    c.name = r.optional<std::string>("name", c.name);
    const auto clusters = r.required<std::vector<int>>("n_clusters_range");
    const auto k_range = r.required<std::vector<double>>("rician_k_db_range");
    if (clusters.size() != 2)
        throw ConfigError(r.field_path("n_clusters_range"), "expected [min, max]");
    if (k_range.size() != 2)
        throw ConfigError(r.field_path("rician_k_db_range"), "expected [min, max]");
    c.n_clusters_min = clusters[0];
    c.n_clusters_max = clusters[1];
    c.rician_k_db_min = k_range[0];
    c.rician_k_db_max = k_range[1];
    c.delay_spread_s = r.optional<double>("delay_spread_s", c.delay_spread_s);
    c.angle_spread_deg = r.required<double>("angle_spread_deg");
    c.los_probability = r.required<double>("los_probability");
    c.shadowing_std_db = r.optional<double>("shadowing_std_db", c.shadowing_std_db);
    c.delay_scaling = r.optional<double>("delay_scaling", c.delay_scaling);
    r.finish();
    try
    {
        c.validate();
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(path.empty() ? "/" : path, e.what());
    }
    return c;
}

inline json to_json(const GbsmConfig &c)
{
    return {{"type", "gbsm"},
            {"version", profile_version},
            {"name", c.name},
            {"n_clusters_range", {c.n_clusters_min, c.n_clusters_max}},
            {"delay_spread_s", c.delay_spread_s},
            {"angle_spread_deg", c.angle_spread_deg},
            {"rician_k_db_range", {c.rician_k_db_min, c.rician_k_db_max}},
            {"los_probability", c.los_probability},
            {"shadowing_std_db", c.shadowing_std_db},
            {"delay_scaling", c.delay_scaling}};
}

inline json read_json_file(const std::string &file)
{
    std::ifstream in(file);
    if (!in)
        throw ConfigError(file, "cannot open file");
    try
    {
        return json::parse(in);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError(file, std::string("parse error: ") + e.what());
    }
}

} // namespace chanbench::stochastic
