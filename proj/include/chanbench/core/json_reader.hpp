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

#include <json.hpp>

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace chanbench {

using json = nlohmann::json;

/// Schema violation in a configuration or profile document. `field` is a
/// JSON-pointer style path to the offending entry.
class ConfigError : public std::runtime_error
{
public:
    ConfigError(std::string field, const std::string &message)
        : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field))
    {
    }

    const std::string &field() const { return field_; }

private:
    std::string field_;
};

/// Strict reader over a JSON object: every key must be consumed, otherwise
/// finish() reports the first unknown one by path.
class JsonReader
{
public:
    JsonReader(const json &j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
    }

    const std::string &path() const { return path_; }
    std::string field_path(const std::string &key) const { return path_ + "/" + key; }

    bool has(const std::string &key) const { return j_.contains(key); }

    template <class T>
    T required(const std::string &key)
    {
        if (!j_.contains(key))
            throw ConfigError(field_path(key), "missing required field");
        return get<T>(key);
    }

    template <class T>
    T optional(const std::string &key, T fallback)
    {
        if (!j_.contains(key))
            return fallback;
        return get<T>(key);
    }

    JsonReader child(const std::string &key)
    {
        if (!j_.contains(key))
            throw ConfigError(field_path(key), "missing required object");
        seen_.insert(key);
        return JsonReader(j_.at(key), field_path(key));
    }

    const json &raw(const std::string &key)
    {
        if (!j_.contains(key))
            throw ConfigError(field_path(key), "missing required field");
        seen_.insert(key);
        return j_.at(key);
    }

    std::vector<JsonReader> array_of_objects(const std::string &key)
    {
        const json &arr = raw(key);
        if (!arr.is_array())
            throw ConfigError(field_path(key), "expected an array");
        std::vector<JsonReader> out;
        for (std::size_t i = 0; i < arr.size(); ++i)
            out.emplace_back(arr[i], field_path(key) + "/" + std::to_string(i));
        return out;
    }

    void expect_version(int supported)
    {
        const int v = required<int>("version");
        if (v != supported)
            throw ConfigError(field_path("version"), "unsupported version " + std::to_string(v));
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError(field_path(it.key()), "unknown field");
    }

private:
    template <class T>
    T get(const std::string &key)
    {
        seen_.insert(key);
        try
        {
            return j_.at(key).get<T>();
        }
        catch (const json::exception &e)
        {
            throw ConfigError(field_path(key), std::string("wrong type: ") + e.what());
        }
    }

    const json &j_;
    std::string path_;
    std::set<std::string> seen_;
};

} // namespace chanbench
