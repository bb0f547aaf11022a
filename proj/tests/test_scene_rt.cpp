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

#include <catch_amalgamated.hpp>

#include "support/rt_oracle.hpp"

#include <chanbench/rt/path_file.hpp>
#include <chanbench/rt/track.hpp>

#include <cmath>
#include <optional>
#include <sstream>

using namespace chanbench;
using namespace chanbench::rt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using rtoracle::angle_diff;
using rtoracle::oracle_paths;

namespace {

Scene open_scene()
{
    Scene s;
    s.tx_position = {0.0, 0.0};
    s.bounds = {{-100.0, -100.0}, {100.0, 100.0}};
    return s;
}

double nmse(const ChannelGrid &ref, const ChannelGrid &est)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ref.data().size(); ++i)
    {
        num += std::norm(ref.data()[i] - est.data()[i]);
        den += std::norm(ref.data()[i]);
    }
    return num / den;
}

} // namespace

TEST_CASE("trace_paths examples", "[scene-rt]")
{
    SECTION("free space has only the LOS ray")
    {
        auto s = open_scene();
        const Vec2 rx{30.0, 40.0};
        const auto ps = trace_paths(s, rx);
        REQUIRE(ps.size() == 1);
        CHECK_THAT(ps.paths[0].delay_s, WithinRel(50.0 / speed_of_light, 1e-15));
        CHECK_THAT(std::abs(ps.paths[0].gain), WithinRel(wavelength(3.5e9) / (4 * pi * 50.0), 1e-12));
        CHECK_THAT(ps.paths[0].aod_rad, WithinAbs(std::atan2(40.0, 30.0), 1e-15));
        CHECK_THAT(ps.paths[0].aoa_rad, WithinAbs(std::atan2(-40.0, -30.0), 1e-15));
    }

    SECTION("single long wall matches the image-source delay")
    {
        auto s = open_scene();
        s.walls.push_back({{-90.0, 10.0}, {90.0, 12.0}, {-0.5, 0.2}});
        s.max_reflections = 1;
        const Vec2 rx{25.0, -3.0};
        const auto ps = trace_paths(s, rx);
        REQUIRE(ps.size() == 2);
        // closed-form mirror of tx across the wall line
        const Vec2 d{180.0, 2.0};
        const Vec2 n{-d.y, d.x};
        const Vec2 a{-90.0, 10.0};
        const double dist = (s.tx_position - a).dot(n) / n.dot(n);
        const Vec2 image = s.tx_position - 2.0 * dist * n;
        const double expect = (rx - image).norm();
        CHECK(ps.paths[1].interactions == std::vector<int>{0});
        CHECK_THAT(ps.paths[1].delay_s * speed_of_light, WithinRel(expect, 1e-12));
        CHECK_THAT(std::abs(ps.paths[1].gain),
                   WithinRel(std::abs(cplx{-0.5, 0.2}) * wavelength(3.5e9) / (4 * pi * expect), 1e-12));
        CHECK(angle_diff(ps.paths[1].aoa_rad, (image - rx).angle()) < 1e-12);
    }

    SECTION("blocked LOS without reflections gives an empty set")
    {
        auto s = open_scene();
        s.walls.push_back({{5.0, -20.0}, {5.0, 20.0}});
        s.max_reflections = 0;
        CHECK(trace_paths(s, {10.0, 0.0}).paths.empty());
    }

    SECTION("errors")
    {
        auto s = open_scene();
        CHECK_THROWS_AS(trace_paths(s, {0.0, 0.0}), std::invalid_argument);
        CHECK_THROWS_AS(trace_paths(s, {500.0, 0.0}), std::invalid_argument);
        s.walls.push_back({{1.0, 1.0}, {1.0, 1.0}});
        CHECK_THROWS_AS(trace_paths(s, {10.0, 0.0}), std::invalid_argument);
        s = open_scene();
        s.max_reflections = -1;
        CHECK_THROWS_AS(trace_paths(s, {10.0, 0.0}), std::invalid_argument);
    }
}

TEST_CASE("tracer agrees with a brute-force Fermat oracle", "[scene-rt][property]")
{
    Rng rng(2024);
    int compared = 0, reflections = 0;
    for (int trial = 0; trial < 400; ++trial)
    {
        Scene s;
        s.bounds = {{-50.0, -50.0}, {50.0, 50.0}};
        s.max_reflections = 2;
        s.tx_position = {uniform(rng, -40, 40), uniform(rng, -40, 40)};
        const int n_walls = trial % 3;
        for (int w = 0; w < n_walls; ++w)
        {
            const Vec2 c{uniform(rng, -40, 40), uniform(rng, -40, 40)};
            const double ang = uniform(rng, 0, pi), half = uniform(rng, 5, 40);
            const Vec2 d{std::cos(ang) * half, std::sin(ang) * half};
            s.walls.push_back({c - d, c + d, std::polar(uniform(rng, 0.2, 0.9), uniform(rng, -pi, pi))});
        }
        const Vec2 rx{uniform(rng, -40, 40), uniform(rng, -40, 40)};
        const auto got = trace_paths(s, rx);
        const auto want = oracle_paths(s, rx);
        REQUIRE(got.size() == want.size());
        for (const auto &o : want)
        {
            const auto it = std::find_if(got.paths.begin(), got.paths.end(),
                                         [&](const Path &p) { return p.interactions == o.walls; });
            REQUIRE(it != got.paths.end());
            CHECK_THAT(it->delay_s, WithinRel(o.length / speed_of_light, 1e-9));
            CHECK(angle_diff(it->aod_rad, o.aod) < 1e-9);
            CHECK(angle_diff(it->aoa_rad, o.aoa) < 1e-9);
            cplx coef{1.0, 0.0};
            for (int w : o.walls)
                coef *= s.walls[w].reflection;
            CHECK(std::abs(it->gain - coef * (wavelength(s.carrier_hz) / (4 * pi * o.length))) <
                  1e-9 * std::abs(it->gain));
            ++compared;
            reflections += !o.walls.empty();
        }
    }
    CHECK(reflections > 100);
    CHECK(compared > 300);
}

TEST_CASE("scene documents", "[scene-rt]")
{
    const json j = {{"type", "scene"},
                    {"version", 1},
                    {"name", "box"},
                    {"tx_position", {1.0, 2.0}},
                    {"bounds", {{"min", {-10, -10}}, {"max", {10, 10}}}},
                    {"boxes", {{{"min", {3, 3}}, {"max", {5, 6}}}}}};
    const auto s = scene_from_json(j);
    REQUIRE(s.walls.size() == 4);
    CHECK(s.walls[0].reflection == cplx{-1.0, 0.0});
    CHECK(scene_from_json(to_json(s)).walls.size() == 4);
    CHECK(to_json(scene_from_json(to_json(s))) == to_json(s));

    auto bad = j;
    bad["reflections"] = 3;
    CHECK_THROWS_AS(scene_from_json(bad), ConfigError);
    bad = j;
    bad["tx_position"] = {50.0, 0.0};
    CHECK_THROWS_AS(scene_from_json(bad), ConfigError);
}

TEST_CASE("path file import and export", "[scene-rt]")
{
    SECTION("unit conversion and outage receivers")
    {
        std::istringstream in(
            "{\"version\":1,\"position\":[1,2],\"paths\":[{\"power_db\":-60,\"phase_deg\":90,\"delay_s\":1e-7,"
            "\"aod_deg\":30,\"aoa_deg\":-45}]}\n"
            "{\"version\":1,\"position\":[3,4],\"paths\":[]}\n");
        const auto rx = import_paths(in, PathFileFormat::jsonl);
        REQUIRE(rx.size() == 2);
        const auto &p = rx[0].second.paths.at(0);
        CHECK_THAT(std::abs(p.gain), WithinRel(1e-3, 1e-12));
        CHECK_THAT(p.gain.imag(), WithinRel(1e-3, 1e-12));
        CHECK_THAT(p.aod_rad, WithinAbs(pi / 6, 1e-15));
        CHECK_THAT(p.aoa_rad, WithinAbs(-pi / 4, 1e-15));
        CHECK(rx[1].second.paths.empty());
        CHECK(rx[1].first == Vec2{3.0, 4.0});
    }

    SECTION("malformed records report their line")
    {
        std::istringstream in("{\"version\":1,\"position\":[1,2],\"paths\":[]}\n\n"
                              "{\"version\":1,\"position\":[1,2],\"paths\":[{\"power_db\":-60}]}\n");
        try
        {
            import_paths(in, PathFileFormat::jsonl);
            FAIL("expected PathFileError");
        }
        catch (const PathFileError &e)
        {
            CHECK(e.line() == 3);
        }

        std::istringstream csv(std::string(path_csv_header) + "\n0,0,-50,0,1e-7,0,0\n0,0,-50,0,-1e-7,0,0\n");
        try
        {
            import_paths(csv, PathFileFormat::csv);
            FAIL("expected PathFileError");
        }
        catch (const PathFileError &e)
        {
            CHECK(e.line() == 3);
        }

        std::istringstream cols(std::string(path_csv_header) + "\n0,0,-50,0,1e-7,0\n");
        CHECK_THROWS_AS(import_paths(cols, PathFileFormat::csv), PathFileError);
        std::istringstream nan_line("{\"version\":1,\"position\":[1,2],\"paths\":[{\"power_db\":-60,\"phase_deg\":0,"
                                    "\"delay_s\":\"x\",\"aod_deg\":0,\"aoa_deg\":0}]}\n");
        CHECK_THROWS_AS(import_paths(nan_line, PathFileFormat::jsonl), PathFileError);
    }

    SECTION("export then import is the identity")
    {
        Rng rng(12);
        ReceiverPaths src;
        for (int r = 0; r < 20; ++r)
        {
            PathSet ps;
            const int n = r % 5;
            for (int k = 0; k < n; ++k)
            {
                Path p;
                p.gain = std::polar(std::pow(10.0, uniform(rng, -8, -2)), uniform(rng, -3.1, 3.1));
                p.delay_s = uniform(rng, 0, 2e-6);
                p.aod_rad = uniform(rng, -3.1, 3.1);
                p.aoa_rad = uniform(rng, -3.1, 3.1);
                ps.paths.push_back(p);
            }
            src.emplace_back(Vec2{uniform(rng, -100, 100), uniform(rng, -100, 100)}, ps);
        }
        for (auto fmt : {PathFileFormat::jsonl, PathFileFormat::csv})
        {
            std::stringstream buf;
            export_paths(buf, src, fmt);
            const auto back = import_paths(buf, fmt);
            REQUIRE(back.size() == src.size());
            for (std::size_t r = 0; r < src.size(); ++r)
            {
                CHECK(back[r].first == src[r].first);
                REQUIRE(back[r].second.size() == src[r].second.size());
                for (std::size_t k = 0; k < src[r].second.size(); ++k)
                {
                    const auto &a = src[r].second.paths[k], &b = back[r].second.paths[k];
                    CHECK(std::abs(a.gain - b.gain) <= 1e-12 * std::abs(a.gain));
                    CHECK_THAT(b.delay_s, WithinAbs(a.delay_s, 1e-12 * 2e-6));
                    CHECK_THAT(b.aod_rad, WithinAbs(a.aod_rad, 1e-12));
                    CHECK_THAT(b.aoa_rad, WithinAbs(a.aoa_rad, 1e-12));
                }
            }
        }
    }
}

TEST_CASE("interpolate_track examples", "[scene-rt]")
{
    Track track{{0.0, 0.0}, {1.0, 0.0}, 1.0, 2};

    auto make = [](double delay, double phase, int wall = -1) {
        PathSet ps;
        Path p;
        p.gain = std::polar(1e-3, phase);
        p.delay_s = delay;
        if (wall >= 0)
            p.interactions = {wall};
        ps.paths.push_back(p);
        return ps;
    };

    SECTION("midpoint delay is the average")
    {
        const std::vector<TrackSample> samples{{{0, 0}, make(100e-9, 0.0)}, {{1, 0}, make(110e-9, 0.0)}};
        const auto out = interpolate_track(samples, track, 0.5);
        REQUIRE(out.size() == 3);
        CHECK_THAT(out[1].paths[0].delay_s, WithinRel(105e-9, 1e-12));
        CHECK(out[1].rx_position == Vec2{0.5, 0.0});
    }

    SECTION("identical endpoints give identical interpolants")
    {
        const auto ps = make(123e-9, 1.0);
        const auto out = interpolate_track({{{0, 0}, ps}, {{1, 0}, ps}}, track, 0.1);
        REQUIRE(out.size() == 11);
        for (const auto &o : out)
        {
            CHECK(o.paths[0].delay_s == ps.paths[0].delay_s);
            CHECK(std::abs(o.paths[0].gain - ps.paths[0].gain) < 1e-15);
        }
    }

    SECTION("phase is unwrapped before interpolation")
    {
        const auto out =
            interpolate_track({{{0, 0}, make(0.0, deg_to_rad(170))}, {{1, 0}, make(0.0, deg_to_rad(-170))}}, track, 0.5);
        CHECK(angle_diff(std::arg(out[1].paths[0].gain), pi) < 1e-12);
    }

    SECTION("path-count mismatch")
    {
        auto b = make(110e-9, 0.0);
        b.paths.push_back(make(150e-9, 0.0, 3).paths[0]);
        const std::vector<TrackSample> samples{{{0, 0}, make(100e-9, 0.0)}, {{1, 0}, b}};
        const auto out = interpolate_track(samples, track, 0.25);
        REQUIRE(out[0].size() == 2);
        CHECK(out[0].paths[1].power() == 0.0);
        CHECK_THAT(out[2].paths[1].power(), WithinRel(0.5e-6, 1e-12));
        // The ghost continues the delay along -cos(aoa - heading) / c.
        const double slope = -std::cos(b.paths[1].aoa_rad - track.heading()) / speed_of_light;
        CHECK_THAT(out[2].paths[1].delay_s, WithinRel(150e-9 - 0.5 * slope * track.step_m, 1e-12));
        CHECK_THAT(out[4].paths[1].delay_s, WithinRel(150e-9, 1e-12));
        CHECK_THROWS_AS(interpolate_track(samples, track, 0.25, MismatchPolicy::reject), std::invalid_argument);
    }

    SECTION("LOS midpoint agrees with the exact tracer")
    {
        auto s = open_scene();
        Track t{{10.0, 5.0}, {0.0, 1.0}, 0.1, 6};
        const auto out = interpolate_track(sample_track(s, t), t, 0.05);
        for (std::size_t k = 1; k < out.size(); k += 2)
        {
            const auto exact = trace_paths(s, *out[k].rx_position);
            CHECK_THAT(out[k].paths[0].delay_s, WithinRel(exact.paths[0].delay_s, 1e-3));
        }
    }

    SECTION("invalid inputs")
    {
        const auto ps = make(1e-7, 0.0);
        CHECK_THROWS_AS(interpolate_track({{{0, 0}, ps}, {{1, 0}, ps}}, track, 1.5), std::invalid_argument);
        CHECK_THROWS_AS(interpolate_track({{{0, 0}, ps}}, track, 0.5), std::invalid_argument);
        Track diag{{0, 0}, {0.6, 0.8}, 1.0, 2};
        CHECK_THROWS_AS(interpolate_track({{{0, 0}, ps}, {{1, 0}, ps}}, diag, 0.5), std::invalid_argument);
    }
}

TEST_CASE("assign_doppler examples", "[scene-rt]")
{
    PathSet ps;
    Path p;
    p.gain = 1.0;
    p.aoa_rad = 0.3;
    ps.paths = {p, p};
    ps.paths[1].aoa_rad = -2.0;

    const double fmax = 8.333 * 3.5e9 / speed_of_light;
    auto out = assign_doppler({ps}, 8.333, 0.3 + pi / 2, 3.5e9);
    CHECK_THAT(out[0].paths[0].doppler_hz, WithinAbs(0.0, 1e-12));

    out = assign_doppler({ps}, 8.333, 0.3, 3.5e9);
    CHECK_THAT(out[0].paths[0].doppler_hz, WithinAbs(97.2, 0.1));
    CHECK_THAT(out[0].paths[0].doppler_hz, WithinRel(fmax, 1e-12));

    const auto rev = assign_doppler({ps}, 8.333, 0.3 + pi, 3.5e9);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK_THAT(rev[0].paths[i].doppler_hz, WithinAbs(-out[0].paths[i].doppler_hz, 1e-12));

    ps.paths[0].aoa_rad = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(assign_doppler({ps}, 8.333, 0.0, 3.5e9), std::invalid_argument);
}

TEST_CASE("delay slope along a track matches the arrival angle", "[scene-rt][property]")
{
    Scene s = open_scene();
    s.walls.push_back({{-60.0, 30.0}, {60.0, 30.0}, {-0.7, 0.0}});
    s.walls.push_back({{40.0, -60.0}, {40.0, 60.0}, {-0.5, 0.0}});
    s.max_reflections = 2;
    for (const Vec2 dir : {Vec2{1.0, 0.0}, Vec2{0.0, 1.0}, Vec2{-1.0, 0.0}, Vec2{0.0, -1.0}})
    {
        Track t{{12.0, -8.0}, dir, 0.05, 21};
        const double step = 0.01;
        const auto out = interpolate_track(sample_track(s, t), t, step);
        const double heading = t.heading();
        int checked = 0;
        for (std::size_t k = 1; k + 1 < out.size(); ++k)
            for (std::size_t i = 0; i < out[k].size(); ++i)
            {
                const auto &p = out[k].paths[i];
                if (p.power() == 0.0 || out[k - 1].size() != out[k].size() || out[k + 1].size() != out[k].size())
                    continue;
                const double slope = (out[k + 1].paths[i].delay_s - out[k - 1].paths[i].delay_s) / (2 * step);
                const double expect = -std::cos(p.aoa_rad - heading) / speed_of_light;
                // 2% relative, with an absolute floor for near-perpendicular arrivals
                CHECK(std::abs(slope - expect) <= 0.02 * std::abs(expect) + 0.02 / speed_of_light * 0.05);
                ++checked;
            }
        CHECK(checked > 100);
    }
}

TEST_CASE("interpolation error on LOS tracks", "[scene-rt][property]")
{
    const auto s = open_scene();
    const double lambda = wavelength(s.carrier_hz);
    const ArrayGeometry rx{1, 0.5}, tx{32, 0.5};
    const auto freqs = tone_grid(32, 360e3);
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial)
    {
        const Vec2 dirs[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        Track t{{uniform(rng, -60, 60), uniform(rng, -60, 60)}, dirs[trial % 4], lambda / 8, 40};
        if ((t.start - s.tx_position).norm() < 5.0)
            continue;
        const auto out = interpolate_track(sample_track(s, t), t, lambda / 80);
        double worst = 0.0;
        for (const auto &ps : out)
        {
            const auto exact = trace_paths(s, *ps.rx_position);
            worst = std::max(worst, nmse(synth_geometric(exact, rx, tx, freqs, 0.0),
                                         synth_geometric(ps, rx, tx, freqs, 0.0)));
        }
        CHECK(10 * std::log10(worst + 1e-300) < -30.0);
    }
}

TEST_CASE("build_track_sequence", "[scene-rt]")
{
    Scene s = open_scene();
    s.walls.push_back({{-60.0, 30.0}, {60.0, 30.0}});
    TrackSequenceSpec spec;
    const auto seq = build_track_sequence(s, {5.0, 0.0}, {1.0, 0.0}, spec, {1, 0.5}, {32, 0.5}, tone_grid(32, 360e3));
    REQUIRE(seq.sequence.length() == 60);
    REQUIRE(seq.steps.size() == 60);
    CHECK(seq.sequence.sampling_period_s == 1e-3);
    for (const auto &g : seq.sequence.grids)
        CHECK(g.all_finite());
    const double moved = (*seq.steps.back().rx_position - *seq.steps.front().rx_position).norm();
    CHECK_THAT(moved, WithinRel(8.333e-3 * 59, 1e-9));
    for (const auto &ps : seq.steps)
        for (const auto &p : ps.paths)
            CHECK(std::abs(p.doppler_hz) <= 8.333 * 3.5e9 / speed_of_light + 1e-9);
}
