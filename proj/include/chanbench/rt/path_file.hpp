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

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chanbench::rt {

// Two interchangeable encodings of externally ray-traced paths.
//
// JSON lines (.jsonl), one receiver per line:
//   {"version":1,"position":[x,y],
//    "paths":[{"power_db":..,"phase_deg":..,"delay_s":..,"aod_deg":..,"aoa_deg":..}, ...]}
//
// CSV (.csv): header "pos_x,pos_y,power_db,phase_deg,delay_s,aod_deg,aoa_deg",
// then one row per receiver: pos_x,pos_y followed by the five path columns
// repeated for every path, path-major. A row with only the position is a
// receiver in outage.
inline constexpr int path_file_version = 1;
inline constexpr const char *path_csv_header = "pos_x,pos_y,power_db,phase_deg,delay_s,aod_deg,aoa_deg";

enum class PathFileFormat { jsonl, csv };

class PathFileError : public std::runtime_error
{
public:
    PathFileError(std::size_t line, const std::string &message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line)
    {
    }

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct PathRecord
{
    double power_db = 0.0;
    double phase_deg = 0.0;
    double delay_s = 0.0;
    double aod_deg = 0.0;
    double aoa_deg = 0.0;
};

struct ReceiverRecord
{
    Vec2 position;
    std::vector<PathRecord> paths;
};

using ReceiverPaths = std::vector<std::pair<Vec2, PathSet>>;

inline PathFileFormat format_from_extension(const std::string &file)
{
    if (file.size() >= 4 && file.compare(file.size() - 4, 4, ".csv") == 0)
        return PathFileFormat::csv;
    return PathFileFormat::jsonl;
}

inline Path to_path(const PathRecord &r)
{
    Path p;
    p.gain = std::polar(std::pow(10.0, r.power_db / 20.0), deg_to_rad(r.phase_deg));
    p.delay_s = r.delay_s;
    p.aod_rad = deg_to_rad(r.aod_deg);
    p.aoa_rad = deg_to_rad(r.aoa_deg);
    return p;
}

inline PathRecord to_record(const Path &p)
{
    const double amp = std::abs(p.gain);
    if (!(amp > 0.0) || !p.finite())
        throw std::invalid_argument("export_paths: path gain must be finite and non-zero");
    return {20.0 * std::log10(amp), rad_to_deg(std::arg(p.gain)), p.delay_s, rad_to_deg(p.aod_rad), rad_to_deg(p.aoa_rad)};
}

namespace detail {

inline void check_record(const PathRecord &r, std::size_t line)
{
    if (!std::isfinite(r.power_db) || !std::isfinite(r.phase_deg) || !std::isfinite(r.delay_s) ||
        !std::isfinite(r.aod_deg) || !std::isfinite(r.aoa_deg))
        throw PathFileError(line, "non-finite path value");
    if (r.delay_s < 0.0)
        throw PathFileError(line, "negative delay");
}

inline ReceiverRecord parse_jsonl_line(const std::string &text, std::size_t line)
{
    try
    {
        const json j = json::parse(text);
        JsonReader r(j, "");
        r.expect_version(path_file_version);
        const auto pos = r.required<std::vector<double>>("position");
        if (pos.size() != 2 || !std::isfinite(pos[0]) || !std::isfinite(pos[1]))
            throw PathFileError(line, "position must be a finite [x, y]");
        ReceiverRecord rec{{pos[0], pos[1]}, {}};
        for (auto &p : r.array_of_objects("paths"))
        {
            PathRecord pr;
            pr.power_db = p.required<double>("power_db");
            pr.phase_deg = p.required<double>("phase_deg");
            pr.delay_s = p.required<double>("delay_s");
            pr.aod_deg = p.required<double>("aod_deg");
            pr.aoa_deg = p.required<double>("aoa_deg");
            p.finish();
            check_record(pr, line);
            rec.paths.push_back(pr);
        }
        r.finish();
        return rec;
    }
    catch (const PathFileError &)
    {
        throw;
    }
    catch (const std::exception &e)
    {
        throw PathFileError(line, e.what());
    }
}

inline double parse_double(std::string_view field, std::size_t line)
{
    while (!field.empty() && field.front() == ' ')
        field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\r'))
        field.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw PathFileError(line, "malformed number '" + std::string(field) + "'");
    return v;
}

inline ReceiverRecord parse_csv_line(const std::string &text, std::size_t line)
{
    std::vector<std::string_view> fields;
    std::string_view rest(text);
    while (true)
    {
        const auto comma = rest.find(',');
        fields.push_back(rest.substr(0, comma));
        if (comma == std::string_view::npos)
            break;
        rest.remove_prefix(comma + 1);
    }
    if (fields.size() < 2 || (fields.size() - 2) % 5 != 0)
        throw PathFileError(line, "expected 2 + 5*n_paths columns, got " + std::to_string(fields.size()));
    ReceiverRecord rec;
    rec.position = {parse_double(fields[0], line), parse_double(fields[1], line)};
    if (!std::isfinite(rec.position.x) || !std::isfinite(rec.position.y))
        throw PathFileError(line, "non-finite position");
    for (std::size_t i = 2; i < fields.size(); i += 5)
    {
        PathRecord pr{parse_double(fields[i], line), parse_double(fields[i + 1], line), parse_double(fields[i + 2], line),
                      parse_double(fields[i + 3], line), parse_double(fields[i + 4], line)};
        check_record(pr, line);
        rec.paths.push_back(pr);
    }
    return rec;
}

inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

/// Reads receiver records; any malformed record rejects the whole file
/// with its line number.
inline std::vector<ReceiverRecord> read_path_records(std::istream &in, PathFileFormat format)
{
    std::vector<ReceiverRecord> out;
    std::string text;
    std::size_t line = 0;
    bool header_seen = false;
    while (std::getline(in, text))
    {
        ++line;
        if (!text.empty() && text.back() == '\r')
            text.pop_back();
        if (text.empty())
            continue;
        if (format == PathFileFormat::csv)
        {
            if (!header_seen)
            {
                if (text != path_csv_header)
                    throw PathFileError(line, std::string("expected header '") + path_csv_header + "'");
                header_seen = true;
                continue;
            }
            out.push_back(detail::parse_csv_line(text, line));
        }
        else
        {
            out.push_back(detail::parse_jsonl_line(text, line));
        }
    }
    if (format == PathFileFormat::csv && !header_seen)
        throw PathFileError(line, "missing CSV header");
    return out;
}

inline void write_path_records(std::ostream &out, const std::vector<ReceiverRecord> &records, PathFileFormat format)
{
    using detail::format_double;
    if (format == PathFileFormat::csv)
    {
        out << path_csv_header << '\n';
        for (const auto &rec : records)
        {
            out << format_double(rec.position.x) << ',' << format_double(rec.position.y);
            for (const auto &p : rec.paths)
                out << ',' << format_double(p.power_db) << ',' << format_double(p.phase_deg) << ','
                    << format_double(p.delay_s) << ',' << format_double(p.aod_deg) << ',' << format_double(p.aoa_deg);
            out << '\n';
        }
        return;
    }
    for (const auto &rec : records)
    {
        // Hand-written so numbers keep full round-trip precision.
        out << "{\"version\":" << path_file_version << ",\"position\":[" << format_double(rec.position.x) << ','
            << format_double(rec.position.y) << "],\"paths\":[";
        for (std::size_t i = 0; i < rec.paths.size(); ++i)
        {
            const auto &p = rec.paths[i];
            out << (i ? "," : "") << "{\"power_db\":" << format_double(p.power_db)
                << ",\"phase_deg\":" << format_double(p.phase_deg) << ",\"delay_s\":" << format_double(p.delay_s)
                << ",\"aod_deg\":" << format_double(p.aod_deg) << ",\"aoa_deg\":" << format_double(p.aoa_deg) << '}';
        }
        out << "]}\n";
    }
}

inline ReceiverPaths import_paths(std::istream &in, PathFileFormat format)
{
    ReceiverPaths out;
    for (const auto &rec : read_path_records(in, format))
    {
        PathSet ps;
        ps.rx_position = rec.position;
        for (const auto &p : rec.paths)
            ps.paths.push_back(to_path(p));
        out.emplace_back(rec.position, std::move(ps));
    }
    return out;
}

inline ReceiverPaths import_paths(const std::string &file)
{
    std::ifstream in(file);
    if (!in)
        throw std::runtime_error("import_paths: cannot open " + file);
    return import_paths(in, format_from_extension(file));
}

inline void export_paths(std::ostream &out, const ReceiverPaths &receivers, PathFileFormat format)
{
    std::vector<ReceiverRecord> records;
    for (const auto &[pos, ps] : receivers)
    {
        ReceiverRecord rec{pos, {}};
        for (const auto &p : ps.paths)
            rec.paths.push_back(to_record(p));
        records.push_back(std::move(rec));
    }
    write_path_records(out, records, format);
}

inline void export_paths(const std::string &file, const ReceiverPaths &receivers)
{
    std::ofstream out(file);
    if (!out)
        throw std::runtime_error("export_paths: cannot write " + file);
    export_paths(out, receivers, format_from_extension(file));
}

} // namespace chanbench::rt
