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
#include <chanbench/eval/protocols.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace chanbench::eval {

inline constexpr int report_version = 1;

/// Per-repeat dB values of one (train, test) pair. Aggregates are taken
/// over the dB values.
struct Cell
{
    std::vector<double> values;
    bool failed = false;
    std::string error;

    double mean() const
    {
        if (values.empty())
            throw std::logic_error("Cell::mean: no values");
        double s = 0.0;
        for (double v : values)
            s += v;
        return s / static_cast<double>(values.size());
    }

    /// Sample standard deviation; absent for a single repeat.
    std::optional<double> stddev() const
    {
        if (values.size() < 2)
            return std::nullopt;
        const double m = mean();
        double s = 0.0;
        for (double v : values)
            s += (v - m) * (v - m);
        return std::sqrt(s / static_cast<double>(values.size() - 1));
    }

    double median() const
    {
        if (values.empty())
            throw std::logic_error("Cell::median: no values");
        auto v = values;
        std::sort(v.begin(), v.end());
        const auto n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }

    void fail(const std::string &why)
    {
        failed = true;
        if (error.empty())
            error = why;
    }
};

inline json to_json(const Cell &c)
{
    json j = {{"values", c.values}};
    if (c.failed)
    {
        j["failed"] = true;
        j["error"] = c.error;
    }
    if (!c.failed && !c.values.empty())
    {
        j["mean_db"] = c.mean();
        if (const auto s = c.stddev())
            j["std_db"] = *s;
    }
    return j;
}

inline Cell cell_from_json(const json &j, const std::string &path)
{
    JsonReader r(j, path);
    Cell c;
    c.values = r.required<std::vector<double>>("values");
    c.failed = r.optional<bool>("failed", false);
    c.error = r.optional<std::string>("error", "");
    // derived aggregates are recomputed from the values
    for (const char *k : {"mean_db", "std_db"})
        if (r.has(k))
            r.raw(k);
    r.finish();
    return c;
}

using Matrix = std::vector<std::vector<Cell>>;

/// Train-domain x test-domain results. The diagonal holds in-domain NMSE on
/// the held-out test split; off-diagonal cells hold cross-test NMSE on the
/// whole target domain.
struct EvalReport
{
    Task task = Task::compression;
    std::vector<std::string> domains;
    int repeats = 1;
    int horizon_ms = 0;
    Matrix cross;
    std::optional<Matrix> fine_tune; ///< fine-tuned cross-test, same layout
    json meta = json::object();

    static EvalReport empty(Task task, std::vector<std::string> domains, int repeats, bool with_fine_tune)
    {
        EvalReport r;
        r.task = task;
        r.domains = std::move(domains);
        r.repeats = repeats;
        r.cross.assign(r.domains.size(), std::vector<Cell>(r.domains.size()));
        if (with_fine_tune)
            r.fine_tune = r.cross;
        return r;
    }

    std::size_t index_of(const std::string &d) const
    {
        const auto it = std::find(domains.begin(), domains.end(), d);
        if (it == domains.end())
            throw std::out_of_range("report has no domain '" + d + "'");
        return static_cast<std::size_t>(it - domains.begin());
    }

    const Cell &at(const std::string &train, const std::string &test) const { return cross[index_of(train)][index_of(test)]; }

    bool any_failed() const
    {
        for (const auto *m : {&cross, fine_tune ? &*fine_tune : nullptr})
            if (m)
                for (const auto &row : *m)
                    for (const auto &c : row)
                        if (c.failed)
                            return true;
        return false;
    }

    /// Every one of the |domains|^2 cells must be present with one value
    /// per repeat, or be marked failed.
    void validate() const
    {
        if (repeats < 1)
            throw std::invalid_argument("report: repeats must be >= 1");
        const auto n = domains.size();
        auto check = [&](const Matrix &m, const std::string &name) {
            if (m.size() != n)
                throw std::invalid_argument("report: " + name + " matrix has " + std::to_string(m.size()) + " rows for " +
                                            std::to_string(n) + " domains");
            for (std::size_t i = 0; i < n; ++i)
            {
                if (m[i].size() != n)
                    throw std::invalid_argument("report: " + name + " row '" + domains[i] + "' is incomplete");
                for (std::size_t j = 0; j < n; ++j)
                {
                    const auto &c = m[i][j];
                    if (!c.failed && c.values.size() != static_cast<std::size_t>(repeats))
                        throw std::invalid_argument("report: " + name + " cell (" + domains[i] + ", " + domains[j] +
                                                    ") has " + std::to_string(c.values.size()) + " of " +
                                                    std::to_string(repeats) + " values");
                    for (double v : c.values)
                        if (!std::isfinite(v))
                            throw std::invalid_argument("report: non-finite value in " + name + " cell (" +
                                                        domains[i] + ", " + domains[j] + ")");
                }
            }
        };
        check(cross, "cross");
        if (fine_tune)
            check(*fine_tune, "fine_tune");
    }

    /// Mean over the off-diagonal cell means of one matrix.
    double off_diagonal_mean(const Matrix &m) const
    {
        double s = 0.0;
        int k = 0;
        for (std::size_t i = 0; i < domains.size(); ++i)
            for (std::size_t j = 0; j < domains.size(); ++j)
                if (i != j && !m[i][j].failed)
                {
                    s += m[i][j].mean();
                    ++k;
                }
        if (k == 0)
            throw std::logic_error("report: no off-diagonal cells");
        return s / k;
    }
};

inline json matrix_to_json(const EvalReport &r, const Matrix &m)
{
    json rows = json::object();
    for (std::size_t i = 0; i < r.domains.size(); ++i)
    {
        json row = json::object();
        for (std::size_t j = 0; j < r.domains.size(); ++j)
            row[r.domains[j]] = to_json(m[i][j]);
        rows[r.domains[i]] = row;
    }
    return rows;
}

inline json to_json(const EvalReport &r)
{
    r.validate();
    json j = {{"type", "eval_report"},
              {"version", report_version},
              {"task", to_string(r.task)},
              {"domains", r.domains},
              {"repeats", r.repeats},
              {"horizon_ms", r.horizon_ms},
              {"cross", matrix_to_json(r, r.cross)},
              {"meta", r.meta}};
    if (r.fine_tune)
        j["fine_tune"] = matrix_to_json(r, *r.fine_tune);
    return j;
}

inline Matrix matrix_from_json(JsonReader &parent, const std::string &key, const std::vector<std::string> &domains)
{
    auto rows = parent.child(key);
    Matrix m(domains.size(), std::vector<Cell>(domains.size()));
    for (std::size_t i = 0; i < domains.size(); ++i)
    {
        auto row = rows.child(domains[i]);
        for (std::size_t j = 0; j < domains.size(); ++j)
        {
            if (!row.has(domains[j]))
                throw ConfigError(row.field_path(domains[j]), "missing cell");
            m[i][j] = cell_from_json(row.raw(domains[j]), row.field_path(domains[j]));
        }
        row.finish();
    }
    rows.finish();
    return m;
}

inline EvalReport eval_report_from_json(const json &j, const std::string &path = "")
{
    JsonReader r(j, path);
    if (r.required<std::string>("type") != "eval_report")
        throw ConfigError(r.field_path("type"), "expected 'eval_report'");
    r.expect_version(report_version);
    EvalReport rep;
    rep.task = task_from_string(r.required<std::string>("task"), r.field_path("task"));
    rep.domains = r.required<std::vector<std::string>>("domains");
    rep.repeats = r.required<int>("repeats");
    rep.horizon_ms = r.required<int>("horizon_ms");
    rep.cross = matrix_from_json(r, "cross", rep.domains);
    if (r.has("fine_tune"))
        rep.fine_tune = matrix_from_json(r, "fine_tune", rep.domains);
    rep.meta = r.optional<json>("meta", json::object());
    r.finish();
    rep.validate();
    return rep;
}

namespace detail {

inline std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

inline void cell_csv(std::ostream &out, const Cell &c)
{
    if (c.failed)
    {
        out << ",failed,";
        return;
    }
    out << ',' << fmt(c.mean()) << ',';
    if (const auto s = c.stddev())
        out << fmt(*s);
}

} // namespace detail

/// One row per training domain. For each test domain the columns come in a
/// block: cross-test mean and std, then (if present) fine-tuned mean and std.
inline std::string to_csv(const EvalReport &r)
{
    r.validate();
    std::ostringstream out;
    out << "train_domain";
    for (const auto &d : r.domains)
    {
        out << ',' << d << ":cross_mean_db," << d << ":cross_std_db";
        if (r.fine_tune)
            out << ',' << d << ":finetune_mean_db," << d << ":finetune_std_db";
    }
    out << '\n';
    for (std::size_t i = 0; i < r.domains.size(); ++i)
    {
        out << r.domains[i];
        for (std::size_t j = 0; j < r.domains.size(); ++j)
        {
            detail::cell_csv(out, r.cross[i][j]);
            if (r.fine_tune)
                detail::cell_csv(out, (*r.fine_tune)[i][j]);
        }
        out << '\n';
    }
    return out.str();
}

/// Long-format rows for plotting: matrix,train,test,repeat,nmse_db.
inline std::string to_plot_csv(const EvalReport &r)
{
    std::ostringstream out;
    out << "matrix,train_domain,test_domain,repeat,nmse_db\n";
    auto emit = [&](const Matrix &m, const char *name) {
        for (std::size_t i = 0; i < r.domains.size(); ++i)
            for (std::size_t j = 0; j < r.domains.size(); ++j)
                for (std::size_t k = 0; k < m[i][j].values.size(); ++k)
                    out << name << ',' << r.domains[i] << ',' << r.domains[j] << ',' << k << ','
                        << detail::fmt(m[i][j].values[k]) << '\n';
    };
    emit(r.cross, "cross");
    if (r.fine_tune)
        emit(*r.fine_tune, "fine_tune");
    return out.str();
}

inline json to_json(const CurveResult &c)
{
    json pts = json::array();
    for (const auto &p : c.points)
        pts.push_back({{"fraction", p.fraction},
                       {"count", p.count},
                       {"scratch_db", p.scratch_db},
                       {"pretrained_db", p.pretrained_db}});
    return {{"type", "curve_report"},     {"version", report_version}, {"source", c.source},
            {"target", c.target},         {"holdout", c.holdout},      {"source_only_db", c.source_only_db},
            {"points", pts}};
}

inline CurveResult curve_from_json(const json &j, const std::string &path = "")
{
    JsonReader r(j, path);
    if (r.required<std::string>("type") != "curve_report")
        throw ConfigError(r.field_path("type"), "expected 'curve_report'");
    r.expect_version(report_version);
    CurveResult c;
    c.source = r.required<std::string>("source");
    c.target = r.required<std::string>("target");
    c.holdout = r.required<std::size_t>("holdout");
    c.source_only_db = r.required<double>("source_only_db");
    for (auto &p : r.array_of_objects("points"))
    {
        CurvePoint cp;
        cp.fraction = p.required<double>("fraction");
        cp.count = p.required<std::size_t>("count");
        cp.scratch_db = p.required<double>("scratch_db");
        cp.pretrained_db = p.required<double>("pretrained_db");
        p.finish();
        c.points.push_back(cp);
    }
    r.finish();
    return c;
}

inline std::string to_csv(const CurveResult &c)
{
    std::ostringstream out;
    out << "fraction,count,scratch_db,pretrained_db\n";
    for (const auto &p : c.points)
        out << p.fraction << ',' << p.count << ',' << detail::fmt(p.scratch_db) << ',' << detail::fmt(p.pretrained_db)
            << '\n';
    return out.str();
}

inline json sweep_to_json(const std::vector<SweepEntry> &s)
{
    json rows = json::array();
    for (const auto &e : s)
        rows.push_back({{"domain", e.domain},
                        {"horizon_ms", e.horizon_ms},
                        {"learned_db", e.learned_db},
                        {"sample_and_hold_db", e.sample_and_hold_db}});
    return {{"type", "sweep_report"}, {"version", report_version}, {"entries", rows}};
}

inline std::vector<SweepEntry> sweep_from_json(const json &j, const std::string &path = "")
{
    JsonReader r(j, path);
    if (r.required<std::string>("type") != "sweep_report")
        throw ConfigError(r.field_path("type"), "expected 'sweep_report'");
    r.expect_version(report_version);
    std::vector<SweepEntry> out;
    for (auto &e : r.array_of_objects("entries"))
    {
        SweepEntry s;
        s.domain = e.required<std::string>("domain");
        s.horizon_ms = e.required<int>("horizon_ms");
        s.learned_db = e.required<double>("learned_db");
        s.sample_and_hold_db = e.required<double>("sample_and_hold_db");
        e.finish();
        out.push_back(s);
    }
    r.finish();
    return out;
}

inline std::string sweep_to_csv(const std::vector<SweepEntry> &s)
{
    std::ostringstream out;
    out << "domain,horizon_ms,learned_db,sample_and_hold_db\n";
    for (const auto &e : s)
        out << e.domain << ',' << e.horizon_ms << ',' << detail::fmt(e.learned_db) << ','
            << detail::fmt(e.sample_and_hold_db) << '\n';
    return out.str();
}

inline void write_text(const std::filesystem::path &file, const std::string &text)
{
    if (file.has_parent_path())
        std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    out << text;
    if (!out)
        throw std::runtime_error("cannot write " + file.string());
}

} // namespace chanbench::eval
