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

#include <chanbench/eval/dataset.hpp>

#include <filesystem>
#include <string>

// Domain definitions shared by the evaluation, CLI and acceptance tests. The
// profile and scene files come from the repository's configs/ directory.
namespace testdomains {

using chanbench::json;

inline std::filesystem::path config_root() { return CHANBENCH_CONFIG_DIR; }

inline json rt_json(double grid_spacing_m = 0.5)
{
    return {{"name", "rt_proxy"},
            {"type", "rt"},
            {"scene", "scenes/street_grid.json"},
            {"grid_spacing_m", grid_spacing_m},
            {"receiver_regions",
             json::array({{{"min", {-44.0, -140.0}}, {"max", {-26.0, 140.0}}},
                          {{"min", {26.0, -140.0}}, {"max", {44.0, 140.0}}},
                          {{"min", {-140.0, -44.0}}, {"max", {140.0, -26.0}}},
                          {{"min", {-140.0, 26.0}}, {"max", {140.0, 44.0}}}})}};
}

inline json stochastic_json(const std::string &name)
{
    if (name == "tdl")
        return {{"name", "tdl"}, {"type", "tdl"}, {"profile", "profiles/tdl_a_like.json"}};
    if (name == "cdl")
        return {{"name", "cdl"}, {"type", "cdl"}, {"profile", "profiles/cdl_c_like.json"}};
    if (name == "uma")
        return {{"name", "uma"}, {"type", "uma"}, {"profile", "profiles/uma.json"}};
    throw std::invalid_argument("unknown test domain " + name);
}

inline chanbench::eval::DomainConfig domain(const std::string &name)
{
    const json j = name == "rt_proxy" ? rt_json() : stochastic_json(name);
    return chanbench::eval::domain_from_json(j, "/" + name, config_root());
}

inline chanbench::eval::DomainConfig single_path(std::optional<double> doppler_hz, const std::string &name = "single")
{
    json j = {{"name", name}, {"type", "single_path"}};
    if (doppler_hz)
        j["doppler_hz"] = *doppler_hz;
    return chanbench::eval::domain_from_json(j, "/" + name, config_root());
}

inline chanbench::eval::DatasetRequest request(chanbench::eval::Task task, chanbench::eval::DomainConfig d, int samples,
                                               std::uint64_t seed)
{
    chanbench::eval::DatasetRequest r;
    r.task = task;
    r.domain = std::move(d);
    r.samples = samples;
    r.seed = seed;
    return r;
}

} // namespace testdomains
