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

#include <chanbench/core/synthesis.hpp>
#include <chanbench/preprocess/angle_delay.hpp>
#include <chanbench/preprocess/archive.hpp>
#include <chanbench/preprocess/normalize.hpp>
#include <chanbench/preprocess/prb.hpp>
#include <chanbench/preprocess/windows.hpp>

#include <filesystem>
#include <fstream>

using namespace chanbench;
using namespace chanbench::preprocess;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ChannelGrid random_grid(Rng &rng, int n_rx, int n_t, int n_c)
{
    ChannelGrid g(n_rx, n_t, n_c, 180e3);
    for (auto &v : g.data())
        v = complex_normal(rng);
    return g;
}

// Direct O(N^4) evaluation of the 2-D transform used as an oracle:
// X[m, q] = 1/sqrt(Nc Nt) sum_c sum_t H[t, c] exp(+j2pi c m / Nc) exp(-j2pi t q / Nt)
cplx direct_bin(const ChannelGrid &g, int m, int q)
{
    cplx acc{0.0, 0.0};
    const int nc = g.n_c(), nt = g.n_t();
    for (int t = 0; t < nt; ++t)
        for (int c = 0; c < nc; ++c)
            acc += g(0, t, c) * std::polar(1.0, two_pi * (double(c) * m / nc - double(t) * q / nt));
    return acc / std::sqrt(double(nc) * nt);
}

std::filesystem::path temp_file(const std::string &name)
{
    auto dir = std::filesystem::temp_directory_path() / "chanbench_test_preprocess";
    std::filesystem::create_directories(dir);
    return dir / name;
}

ChannelSequence random_sequence(Rng &rng, int length, double period = 1e-3)
{
    ChannelSequence s;
    s.sampling_period_s = period;
    for (int k = 0; k < length; ++k)
        s.grids.push_back(random_grid(rng, 1, 2, 1));
    return s;
}

} // namespace

TEST_CASE("prb_average examples", "[preprocess]")
{
    SECTION("frequency-flat grid is unchanged")
    {
        ChannelGrid g(1, 4, 12 * 32, 15e3);
        for (auto &v : g.data())
            v = {0.3, -1.2};
        const auto out = prb_average(g, 12);
        REQUIRE(out.n_c() == 32);
        for (const auto &v : out.data())
            CHECK(std::abs(v - cplx{0.3, -1.2}) < 1e-15);
        CHECK(out.subcarrier_spacing_hz() == 180e3);
    }

    SECTION("one tone per PRB is the identity")
    {
        Rng rng(1);
        const auto g = random_grid(rng, 2, 3, 32);
        CHECK(prb_average(g, 1).data() == g.data());
    }

    SECTION("linear-in-frequency channel gives the PRB midpoint")
    {
        ChannelGrid g(1, 1, 12 * 32, 15e3);
        for (int c = 0; c < g.n_c(); ++c)
            g(0, 0, c) = cplx{0.5 + 0.01 * c, -0.2 * c};
        const auto out = prb_average(g, 12);
        for (int p = 0; p < 32; ++p)
        {
            const double mid = 12 * p + 5.5;
            CHECK(std::abs(out(0, 0, p) - cplx{0.5 + 0.01 * mid, -0.2 * mid}) < 1e-12);
        }
    }

    SECTION("tone count mismatch")
    {
        ChannelGrid g(1, 1, 100, 15e3);
        CHECK_THROWS_AS(prb_average(g, 12), std::invalid_argument);
    }
}

TEST_CASE("to_angle_delay examples", "[preprocess]")
{
    SECTION("all-ones grid")
    {
        ChannelGrid g(1, 32, 32, 180e3);
        for (auto &v : g.data())
            v = 1.0;
        const auto ad = to_angle_delay(g);
        REQUIRE(ad.n_delay == 16);
        REQUIRE(ad.n_angle == 32);
        CHECK_THAT(std::abs(ad(0, 0)), WithinRel(32.0, 1e-12));
        for (int d = 0; d < 16; ++d)
            for (int a = 0; a < 32; ++a)
                if (d || a)
                    CHECK(std::abs(ad(d, a)) < 1e-12);
    }

    SECTION("Parseval before trimming")
    {
        Rng rng(2);
        for (int trial = 0; trial < 10; ++trial)
        {
            const auto g = random_grid(rng, 1, 32, 32);
            CHECK_THAT(angle_delay_full(g).energy(), WithinRel(g.energy(), 1e-10));
        }
    }

    SECTION("matches the direct double sum")
    {
        Rng rng(3);
        const auto g = random_grid(rng, 1, 8, 16);
        const auto ad = angle_delay_full(g);
        for (int m = 0; m < 16; ++m)
            for (int q = 0; q < 8; ++q)
                CHECK(std::abs(ad(m, q) - direct_bin(g, m, q)) < 1e-12);
    }

    SECTION("on-grid delay lands in its bin")
    {
        const ArrayGeometry rx{1, 0.5}, tx{32, 0.5};
        const double df = 180e3;
        const auto freqs = tone_grid(32, df);
        for (int k : {0, 1, 5, 15, 20})
        {
            PathSet ps;
            Path p;
            p.gain = {0.6, 0.8};
            p.delay_s = k / (32 * df);
            p.aod_rad = 0.4;
            ps.paths.push_back(p);
            const auto ad = angle_delay_full(synth_geometric(ps, rx, tx, freqs, 0.0));
            double row = 0.0;
            for (int a = 0; a < 32; ++a)
                row += std::norm(ad(k, a));
            CHECK_THAT(row / ad.energy(), WithinAbs(1.0, 1e-12));
            CHECK_THAT(retained_energy_fraction(synth_geometric(ps, rx, tx, freqs, 0.0)),
                       WithinAbs(k < 16 ? 1.0 : 0.0, 1e-12));
        }
    }

    SECTION("input shape checks")
    {
        ChannelGrid g(2, 4, 32, 1.0);
        CHECK_THROWS_AS(to_angle_delay(g), std::invalid_argument);
        ChannelGrid narrow(1, 4, 8, 1.0);
        CHECK_THROWS_AS(to_angle_delay(narrow), std::invalid_argument);
    }
}

TEST_CASE("zmuv", "[preprocess]")
{
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial)
    {
        AngleDelay ad{16, 32, std::vector<cplx>(512)};
        const double offset = uniform(rng, -3, 3), amp = std::pow(10.0, uniform(rng, -6, 2));
        for (auto &v : ad.data)
            v = amp * (complex_normal(rng) + offset);
        const auto s = zmuv(ad);
        REQUIRE(s.values.size() == 1024);
        double mean = 0.0, var = 0.0;
        for (double v : s.values)
            mean += v;
        mean /= 1024;
        for (double v : s.values)
            var += (v - mean) * (v - mean);
        var /= 1024;
        CHECK(std::abs(mean) < 1e-9);
        CHECK_THAT(var, WithinAbs(1.0, 1e-9));

        // round trip
        const auto back = merge_real_imag(unzmuv(s), 16, 32);
        for (std::size_t i = 0; i < ad.data.size(); ++i)
            REQUIRE(std::abs(back.data[i] - ad.data[i]) <= 1e-12 * amp * (1 + std::abs(offset)) * 10);
    }

    AngleDelay flat{2, 2, std::vector<cplx>(4, cplx{1.5, 1.5})};
    CHECK_THROWS_AS(zmuv(flat), DegenerateInputError);
    AngleDelay zero{2, 2, std::vector<cplx>(4)};
    CHECK_THROWS_AS(zmuv(zero), DegenerateInputError);
}

TEST_CASE("max-abs scaling", "[preprocess]")
{
    Rng rng(5);
    std::vector<ChannelSequence> data;
    for (int i = 0; i < 5; ++i)
        data.push_back(random_sequence(rng, 8));
    data[2].grids[3](0, 1, 0) = {0.0, 4.0};
    for (auto &s : data)
        for (auto &g : s.grids)
            for (auto &v : g.data())
                if (std::abs(v) > 4.0)
                    v *= 3.9 / std::abs(v);
    const auto original = data;

    const double scale = maxabs_scale(data);
    CHECK(scale == 4.0);
    double m = 0.0;
    for (const auto &s : data)
        for (const auto &g : s.grids)
            m = std::max(m, g.max_abs());
    CHECK(m == 1.0);

    const MaxAbsScaler sc{scale};
    for (std::size_t i = 0; i < data.size(); ++i)
    {
        sc.invert(data[i]);
        for (std::size_t k = 0; k < data[i].grids.size(); ++k)
            for (std::size_t e = 0; e < data[i].grids[k].data().size(); ++e)
                REQUIRE(std::abs(data[i].grids[k].data()[e] - original[i].grids[k].data()[e]) < 1e-12);
    }

    std::vector<ChannelSequence> zeros{ChannelSequence{{ChannelGrid(1, 1, 1, 1.0)}, 1e-3}};
    CHECK_THROWS_AS(maxabs_scale(zeros), DegenerateInputError);
}

TEST_CASE("make_windows", "[preprocess]")
{
    Rng rng(6);

    SECTION("targets are indexed from the last input")
    {
        auto seq = random_sequence(rng, 60);
        // tag every grid with its index
        for (int k = 0; k < 60; ++k)
            seq.grids[k](0, 0, 0) = {double(k), 0.0};
        const auto w = make_windows(seq);
        CHECK(w.l_in == 20);
        CHECK(w.n_features == 4);
        CHECK(w.inputs.size() == 80);
        REQUIRE(w.targets.size() == 6);
        CHECK(w.targets.at(40)[0] == 59.0);
        CHECK(w.targets.at(1)[0] == 20.0);
        CHECK(w.targets.at(10)[0] == 29.0);
        CHECK(w.last_input()[0] == 19.0);
    }

    SECTION("static sequence targets equal the last input")
    {
        auto seq = random_sequence(rng, 60);
        for (auto &g : seq.grids)
            g = seq.grids[0];
        const auto w = make_windows(seq);
        for (const auto &[h, t] : w.targets)
            CHECK(t == w.last_input());
    }

    SECTION("feature layout is antenna-major then I/Q")
    {
        ChannelGrid g(1, 2, 1, 1.0);
        g(0, 0, 0) = {1.0, 2.0};
        g(0, 1, 0) = {3.0, 4.0};
        CHECK(flatten_grid(g) == std::vector<double>{1.0, 2.0, 3.0, 4.0});
        Rng r2(7);
        const auto big = random_grid(r2, 2, 3, 4);
        ChannelGrid back(2, 3, 4, 180e3);
        unflatten_grid(flatten_grid(big), back);
        CHECK(back.data() == big.data());
    }

    SECTION("errors")
    {
        CHECK_THROWS_WITH(make_windows(random_sequence(rng, 59)), Catch::Matchers::ContainsSubstring("too short"));
        CHECK_THROWS_AS(make_windows(random_sequence(rng, 60, 2e-3)), std::invalid_argument);
        CHECK(horizon_steps(40, 1e-3) == 40);
        CHECK(horizon_steps(10, 0.5e-3) == 20);
    }
}

TEST_CASE("tensor archive", "[preprocess]")
{
    Tensor<float> t({3, 2, 4});
    for (std::size_t i = 0; i < t.size(); ++i)
        t.data()[i] = 0.25f * static_cast<float>(i) - 1.0f;
    const auto file = temp_file("t.bin");
    write_tensor(file, t);
    const auto back = read_tensor<float>(file);
    CHECK(back.shape() == t.shape());
    CHECK(std::equal(back.data(), back.data() + back.size(), t.data()));

    CHECK_THROWS_AS(read_tensor<double>(file), ArchiveError);

    // truncated payload
    std::filesystem::resize_file(file, std::filesystem::file_size(file) - 3);
    CHECK_THROWS_AS(read_tensor<float>(file), ArchiveError);

    // trailing garbage
    write_tensor(file, t);
    {
        std::ofstream app(file, std::ios::binary | std::ios::app);
        app << "xx";
    }
    CHECK_THROWS_AS(read_tensor<float>(file), ArchiveError);

    // wrong magic
    {
        std::ofstream bad(file, std::ios::binary);
        bad << "NOPE and more bytes";
    }
    CHECK_THROWS_AS(read_tensor<float>(file), ArchiveError);
    CHECK_THROWS_AS(read_tensor<float>(temp_file("missing.bin")), ArchiveError);

    const auto jf = temp_file("m.json");
    write_json(jf, {{"a", 1}, {"b", {1.5, 2.5}}});
    CHECK(read_json(jf)["b"][1] == 2.5);
    {
        std::ofstream bad(jf);
        bad << "{not json";
    }
    CHECK_THROWS_AS(read_json(jf), ArchiveError);
}
