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

#include "support/domains.hpp"

#include <chanbench/core/constants.hpp>
#include <chanbench/eval/runner.hpp>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>

using namespace chanbench;
using namespace chanbench::eval;
using Catch::Matchers::WithinAbs;

namespace {

std::filesystem::path fresh_dir(const std::string &name)
{
    const auto p = std::filesystem::temp_directory_path() / ("chanbench_eval_" + name);
    std::filesystem::remove_all(p);
    return p;
}

bool same_values(const Tensor<float> &a, const Tensor<float> &b)
{
    return a.shape() == b.shape() && std::equal(a.values().begin(), a.values().end(), b.values().begin());
}

// Small predictor that trains in seconds.
ModelSpec small_gru() { return {nn::gru_arch, {{"hidden", 16}, {"dropout", 0.0}}}; }

nn::TrainConfig quick_train(int epochs = 4)
{
    nn::TrainConfig c;
    c.lr = 3e-3;
    c.batch = 32;
    c.epochs = epochs;
    c.patience = epochs;
    return c;
}

// Independent closed form for sample-and-hold on one rotating phasor.
double hold_closed_form_db(double doppler_hz, double dt_s)
{
    const double s = std::sin(pi * doppler_hz * dt_s);
    const double r = 4.0 * s * s;
    return r < 1e-30 ? -300.0 : 10.0 * std::log10(r);
}

Cell cell_of(std::vector<double> v)
{
    Cell c;
    c.values = std::move(v);
    return c;
}

} // namespace

TEST_CASE("make_split partitions the index range", "[eval-harness][property]")
{
    for (std::size_t n : {10u, 97u, 1000u})
    {
        const auto s = make_split(n, 0.8, 0.1, 42);
        CHECK(s.train.size() == static_cast<std::size_t>(std::floor(0.8 * n + 1e-9)));
        CHECK(s.val.size() == static_cast<std::size_t>(std::floor(0.1 * n + 1e-9)));
        std::set<std::size_t> all(s.train.begin(), s.train.end());
        all.insert(s.val.begin(), s.val.end());
        all.insert(s.test.begin(), s.test.end());
        CHECK(all.size() == n);
        CHECK(*all.rbegin() == n - 1);
    }
    CHECK(make_split(100, 0.8, 0.1, 1).train == make_split(100, 0.8, 0.1, 1).train);
    CHECK(make_split(100, 0.8, 0.1, 1).train != make_split(100, 0.8, 0.1, 2).train);
    CHECK_THROWS_AS(make_split(5, 0.8, 0.1, 1), std::invalid_argument);

    const std::vector<std::size_t> a{1, 2, 3}, b{4, 5}, c{5, 6};
    CHECK_NOTHROW(assert_disjoint({a, b}, "t"));
    CHECK_THROWS_AS(assert_disjoint({a, b, c}, "t"), std::logic_error);
}

TEST_CASE("compression datasets: shape, per-snapshot ZMUV, determinism", "[eval-harness]")
{
    auto req = testdomains::request(Task::compression, testdomains::domain("cdl"), 24, 5);
    const auto ds = generate_dataset(req, 1);
    REQUIRE(ds.inputs.shape() == std::vector<int>{24, 2, 16, 32});
    const std::size_t per = 2 * 16 * 32;
    for (std::size_t i = 0; i < ds.size(); ++i)
    {
        double m = 0.0, v = 0.0;
        for (std::size_t k = 0; k < per; ++k)
            m += ds.inputs[i * per + k];
        m /= per;
        for (std::size_t k = 0; k < per; ++k)
            v += (ds.inputs[i * per + k] - m) * (ds.inputs[i * per + k] - m);
        CHECK_THAT(m, WithinAbs(0.0, 1e-5));
        CHECK_THAT(v / per, WithinAbs(1.0, 1e-4));
    }
    CHECK(ds.manifest.at("normalization").at("scheme") == "zmuv_per_snapshot");
    CHECK(ds.manifest.at("retained_energy").at("mean").get<double>() > 0.9);

    CHECK(same_values(generate_dataset(req, 1).inputs, ds.inputs));
    CHECK(same_values(generate_dataset(req, 3).inputs, ds.inputs));
    const auto h = req.hash();
    req.seed = 6;
    CHECK(req.hash() != h);
    CHECK_FALSE(same_values(generate_dataset(req, 1).inputs, ds.inputs));
    req.seed = 5;
    req.compression.n_delay_keep = 8;
    CHECK(req.hash() != h);
    CHECK(generate_dataset(req, 1).inputs.shape() == std::vector<int>{24, 2, 8, 32});
}

TEST_CASE("prediction datasets: windows, targets and max-abs scaling", "[eval-harness]")
{
    for (const char *name : {"tdl", "uma", "rt_proxy"})
    {
        const auto ds = generate_dataset(testdomains::request(Task::prediction, testdomains::domain(name), 16, 3), 1);
        REQUIRE(ds.inputs.shape() == std::vector<int>{16, 20, 4});
        REQUIRE(ds.targets.size() == preprocess::default_horizons_ms.size());
        float peak = 0.0f;
        for (std::size_t k = 0; k < ds.inputs.size(); k += 2)
            peak = std::max(peak, std::hypot(ds.inputs[k], ds.inputs[k + 1]));
        for (const auto &[h, t] : ds.targets)
        {
            CHECK(t.shape() == std::vector<int>{16, 4});
            for (std::size_t k = 0; k < t.size(); k += 2)
                peak = std::max(peak, std::hypot(t[k], t[k + 1]));
        }
        CHECK(peak <= 1.0f + 1e-6f);
        CHECK(peak > 0.3f);
        CHECK(ds.manifest.at("normalization").at("scheme") == "maxabs_dataset");
        CHECK(ds.manifest.at("normalization").at("scale").get<double>() > 0.0);
        CHECK_THROWS_AS(ds.target(2), std::invalid_argument);
    }
}

TEST_CASE("site-specific receivers respect the sampling rules", "[eval-harness]")
{
    auto d = testdomains::domain("rt_proxy");
    auto &src = std::get<RtSource>(d.source);
    const auto lattice = detail::receiver_lattice(src);
    std::set<std::pair<double, double>> uniq;
    for (const auto &p : lattice)
        uniq.emplace(p.x, p.y);
    CHECK(uniq.size() == lattice.size());

    const auto rx = detail::rt_receivers(src, 200, 9, 1);
    REQUIRE(rx.size() == 200);
    for (const auto &ps : rx)
    {
        CHECK_FALSE(ps.empty());
        REQUIRE(ps.rx_position.has_value());
        CHECK((*ps.rx_position - src.scene.tx_position).norm() >= src.min_distance_m);
    }

    src.receiver_regions = {{{-44.0, -140.0}, {-40.0, -136.0}}};
    src.grid_spacing_m = 2.0;
    CHECK_THROWS_AS(detail::rt_receivers(src, 100, 9, 1), std::runtime_error);
}

TEST_CASE("dataset cache stores, reloads and detects damage", "[eval-harness]")
{
    const auto root = fresh_dir("cache");
    DatasetCache cache(root);
    const auto req = testdomains::request(Task::prediction, testdomains::domain("uma"), 12, 4);
    bool hit = true;
    const auto first = cache.get(req, 1, &hit);
    CHECK_FALSE(hit);
    const auto second = cache.get(req, 1, &hit);
    CHECK(hit);
    CHECK(same_values(first.inputs, second.inputs));
    for (const auto &[h, t] : first.targets)
        CHECK(same_values(t, second.targets.at(h)));
    CHECK(second.manifest == first.manifest);

    std::filesystem::resize_file(cache.dir_for(req) / "inputs.bin", 40);
    CHECK_THROWS_AS(cache.get(req, 1), preprocess::ArchiveError);
    CHECK_THROWS_AS(load_dataset(root / "nowhere"), preprocess::ArchiveError);
    std::filesystem::remove_all(root);
}

TEST_CASE("sample-and-hold follows the single-path closed form", "[eval-harness][oracle]")
{
    PredictionSetup setup;
    setup.horizons_ms = {1, 3, 5, 10};
    auto req = testdomains::request(Task::prediction, testdomains::single_path(100.0), 50, 2);
    req.prediction = setup;
    const auto ds = generate_dataset(req, 1);
    for (int h : setup.horizons_ms)
    {
        const double expected = hold_closed_form_db(100.0, h * 1e-3);
        const double got = sample_and_hold(ds, h);
        if (h == 10)
        {
            // One full rotation: the error vanishes up to float rounding.
            CHECK(got < -100.0);
            CHECK(expected == -300.0);
        }
        else
            CHECK_THAT(got, WithinAbs(expected, 1e-3));
    }
    CHECK_THAT(hold_closed_form_db(100.0, 5e-3), WithinAbs(6.0206, 1e-4));

    auto still = testdomains::request(Task::prediction, testdomains::single_path(0.0, "static"), 20, 2);
    still.prediction = setup;
    const auto sds = generate_dataset(still, 1);
    for (int h : setup.horizons_ms)
        CHECK(sample_and_hold(sds, h) <= -100.0);

    const auto comp = generate_dataset(testdomains::request(Task::compression, testdomains::domain("uma"), 4, 1), 1);
    CHECK_THROWS_AS(sample_and_hold(comp, 1), std::invalid_argument);
}

TEST_CASE("a small predictor learns a single rotating path", "[eval-harness]")
{
    auto req = testdomains::request(Task::prediction, testdomains::single_path(100.0), 2000, 8);
    req.prediction.horizons_ms = {1};
    const auto ds = generate_dataset(req, 1);
    nn::TrainConfig cfg;
    cfg.lr = 3e-3;
    cfg.batch = 64;
    cfg.epochs = 60;
    cfg.patience = 60;
    const auto tm = in_domain(ds, {nn::gru_arch, {{"hidden", 32}, {"dropout", 0.0}}}, cfg, 1, 21);
    INFO("in-domain " << tm.in_domain_db << " dB");
    CHECK(tm.in_domain_db <= -20.0);
    CHECK(tm.in_domain_db < sample_and_hold(ds, 1, tm.split.test) - 10.0);
}

TEST_CASE("cross-test, fine-tune and their controls", "[eval-harness]")
{
    auto req = testdomains::request(Task::prediction, testdomains::domain("tdl"), 400, 12);
    req.prediction.horizons_ms = {1, 5};
    const auto src = generate_dataset(req, 1);
    req.domain = testdomains::domain("uma");
    const auto tgt = generate_dataset(req, 1);

    const auto tm = in_domain(src, small_gru(), quick_train(6), 1, 5);
    REQUIRE(tm.split.test.size() == 40);
    assert_disjoint({tm.split.train, tm.split.val, tm.split.test}, "split");

    SECTION("cross-testing on the source reproduces in-domain NMSE")
    {
        CHECK_THAT(cross_test(tm, src), WithinAbs(tm.in_domain_db, 1.0));
    }

    SECTION("fine-tuning on the source does not hurt it")
    {
        FineTuneConfig ft;
        ft.train = quick_train(3);
        ft.train.lr = 1e-4;
        ft.train.batch = 16;
        ft.budget_fraction = 0.1;
        const auto r = fine_tune(tm, src, ft, 3);
        CHECK(r.budget == 40);
        CHECK(r.adapt_train.size() == 32);
        CHECK(r.eval_rows.size() == 360);
        assert_disjoint({r.adapt_train, r.adapt_val, r.eval_rows}, "fine-tune");
        CHECK(r.after_db <= r.before_db + 0.5);
    }

    SECTION("a zero learning rate reproduces the cross-test on the remainder")
    {
        FineTuneConfig ft;
        ft.train = quick_train(3);
        ft.train.lr = 0.0;
        ft.train.batch = 16;
        ft.budget_fraction = 0.1;
        const auto r = fine_tune(tm, tgt, ft, 3);
        auto m = clone_model(*tm.model);
        const double cross_remainder = nmse_db_on(m, tgt, 1, r.eval_rows);
        CHECK(r.after_db == cross_remainder);
        CHECK(r.before_db == cross_remainder);
        const auto before = tm.model->state();
        CHECK(std::equal(before.front().values().begin(), before.front().values().end(),
                         clone_model(*tm.model).state().front().values().begin()));
    }

    SECTION("budget errors")
    {
        FineTuneConfig ft;
        ft.train = quick_train(2);
        ft.train.batch = 32;
        ft.budget_fraction = 0.05; // 20 samples, 16 for adaptation
        CHECK_THROWS_WITH(fine_tune(tm, tgt, ft, 1), Catch::Matchers::ContainsSubstring("less than one batch"));
        ft.budget_count = 400;
        CHECK_THROWS_AS(fine_tune(tm, tgt, ft, 1), std::invalid_argument);
        ft.budget_count = 0;
        ft.budget_fraction = 1.5;
        CHECK_THROWS_AS(fine_tune(tm, tgt, ft, 1), std::invalid_argument);
    }

    SECTION("cross-test needs the model's horizon in the target")
    {
        auto other = tgt;
        other.targets.erase(1);
        CHECK_THROWS_AS(cross_test(tm, other), std::invalid_argument);
    }
}

TEST_CASE("pretrain curve keeps budgets nested and the holdout fixed", "[eval-harness]")
{
    auto req = testdomains::request(Task::prediction, testdomains::domain("uma"), 300, 2);
    req.prediction.horizons_ms = {1};
    const auto src = generate_dataset(req, 1);
    req.domain = testdomains::domain("tdl");
    const auto tgt = generate_dataset(req, 1);
    const auto tm = in_domain(src, small_gru(), quick_train(3), 1, 4);

    CurveConfig cfg;
    cfg.fractions = {0.2, 0.5};
    cfg.adapt.train = quick_train(2);
    cfg.adapt.train.batch = 16;
    const auto c = pretrain_curve(tm, small_gru(), tgt, cfg, 8);
    REQUIRE(c.points.size() == 2);
    CHECK(c.holdout == 30);
    CHECK(c.points[0].count == 54);
    CHECK(c.points[1].count == 135);
    for (const auto &p : c.points)
        CHECK((std::isfinite(p.scratch_db) && std::isfinite(p.pretrained_db)));

    const auto again = pretrain_curve(tm, small_gru(), tgt, cfg, 8);
    CHECK(again.points[1].pretrained_db == c.points[1].pretrained_db);

    cfg.fractions = {0.5, 0.2};
    CHECK_THROWS_AS(pretrain_curve(tm, small_gru(), tgt, cfg, 8), std::invalid_argument);
    cfg.fractions = {0.0, 0.5};
    CHECK_THROWS_AS(pretrain_curve(tm, small_gru(), tgt, cfg, 8), std::invalid_argument);
    cfg.fractions = {0.01};
    CHECK_THROWS_AS(pretrain_curve(tm, small_gru(), tgt, cfg, 8), std::invalid_argument);
}

TEST_CASE("report cells aggregate in dB and enforce completeness", "[eval-harness]")
{
    const auto one = cell_of({-10.0});
    CHECK(one.mean() == -10.0);
    CHECK_FALSE(one.stddev());
    CHECK_FALSE(to_json(one).contains("std_db"));
    const auto three = cell_of({-10.0, -20.0, -30.0});
    CHECK(three.mean() == -20.0);
    CHECK_THAT(*three.stddev(), WithinAbs(10.0, 1e-12));
    CHECK(three.median() == -20.0);
    CHECK(to_json(three).at("std_db").get<double>() == *three.stddev());

    auto r = EvalReport::empty(Task::compression, {"a", "b"}, 2, true);
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
    for (auto *m : {&r.cross, &*r.fine_tune})
        for (auto &row : *m)
            for (auto &c : row)
                c.values = {-1.0, -3.0};
    CHECK_NOTHROW(r.validate());
    (*r.fine_tune)[0][1].values.pop_back();
    CHECK_THROWS_WITH(r.validate(), Catch::Matchers::ContainsSubstring("fine_tune cell (a, b)"));
    (*r.fine_tune)[0][1].fail("boom");
    CHECK_NOTHROW(r.validate());
    CHECK(r.any_failed());
    r.cross.pop_back();
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
    r.cross.push_back({cell_of({-1.0, -3.0}), cell_of({-1.0, -3.0})});

    const auto j = to_json(r);
    const auto back = eval_report_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(back.fine_tune->at(0).at(1).failed);

    const auto csv = to_csv(r);
    CHECK(csv.substr(0, csv.find('\n')) ==
          "train_domain,a:cross_mean_db,a:cross_std_db,a:finetune_mean_db,a:finetune_std_db,"
          "b:cross_mean_db,b:cross_std_db,b:finetune_mean_db,b:finetune_std_db");
    CHECK(csv.find("a,-2.0000,1.4142,-2.0000,1.4142,-2.0000,1.4142,failed,") != std::string::npos);

    auto broken = j;
    broken["cross"]["a"].erase("b");
    CHECK_THROWS_AS(eval_report_from_json(broken), ConfigError);
    broken = j;
    broken["extra"] = 1;
    CHECK_THROWS_AS(eval_report_from_json(broken), ConfigError);
}

TEST_CASE("matrix runner fills every cell and is reproducible", "[eval-harness]")
{
    auto req = testdomains::request(Task::prediction, testdomains::domain("tdl"), 200, 3);
    req.prediction.horizons_ms = {1};
    const auto a = generate_dataset(req, 1);
    req.domain = testdomains::domain("uma");
    const auto b = generate_dataset(req, 1);
    req.domain = testdomains::single_path(std::nullopt, "tiny");
    req.samples = 30; // too few for a training batch of 32
    const auto tiny = generate_dataset(req, 1);

    MatrixPlan plan;
    plan.datasets = {&a, &b};
    plan.model = small_gru();
    plan.train = quick_train(2);
    plan.horizon_ms = 1;
    plan.repeats = 2;
    plan.seed = 9;
    FineTuneConfig ft;
    ft.train = quick_train(2);
    ft.train.batch = 8;
    ft.budget_fraction = 0.05; // 10 of 200, below the 20-sample test split
    plan.fine_tune = ft;

    const auto r1 = run_matrix(plan);
    REQUIRE_NOTHROW(r1.validate());
    REQUIRE_FALSE(r1.any_failed());
    CHECK(r1.cross[0][0].values.size() == 2);
    CHECK(r1.cross[0][0].stddev().has_value());
    CHECK(r1.cross[0][1].values[0] != r1.cross[0][1].values[1]);

    plan.jobs = 3;
    const auto r2 = run_matrix(plan);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k)
            {
                CHECK_THAT(r2.cross[i][j].values[k], WithinAbs(r1.cross[i][j].values[k], 1e-9));
                CHECK_THAT((*r2.fine_tune)[i][j].values[k], WithinAbs((*r1.fine_tune)[i][j].values[k], 1e-9));
            }

    plan.datasets = {&a, &tiny};
    plan.jobs = 1;
    const auto r3 = run_matrix(plan);
    CHECK(r3.any_failed());
    CHECK_FALSE(r3.cross[0][0].failed);
    CHECK_FALSE(r3.cross[0][1].failed);
    CHECK(r3.cross[1][0].failed);
    CHECK(r3.cross[1][1].failed);
    CHECK_THAT(r3.cross[1][0].error, Catch::Matchers::ContainsSubstring("tiny"));
    CHECK((*r3.fine_tune)[0][1].failed); // 3 budget samples cannot fill a batch
    CHECK_NOTHROW(to_json(r3));
}

TEST_CASE("model cache returns the stored model", "[eval-harness]")
{
    const auto root = fresh_dir("models");
    auto req = testdomains::request(Task::prediction, testdomains::domain("tdl"), 120, 3);
    req.prediction.horizons_ms = {1};
    const auto ds = generate_dataset(req, 1);
    const ModelCache cache(root);
    const auto first = in_domain(ds, small_gru(), quick_train(2), 1, 4, cache);
    CHECK_FALSE(first.from_cache);
    const auto second = in_domain(ds, small_gru(), quick_train(2), 1, 4, cache);
    CHECK(second.from_cache);
    CHECK(second.in_domain_db == first.in_domain_db);
    CHECK(cross_test(second, ds) == cross_test(first, ds));
    CHECK(second.split.test == first.split.test);
    const auto other = in_domain(ds, small_gru(), quick_train(3), 1, 4, cache);
    CHECK_FALSE(other.from_cache);
    std::filesystem::remove_all(root);
}

TEST_CASE("horizon sweep trains one model per domain and horizon", "[eval-harness]")
{
    auto req = testdomains::request(Task::prediction, testdomains::single_path(100.0), 150, 3);
    req.prediction.horizons_ms = {1, 3};
    const auto ds = generate_dataset(req, 1);
    const auto s = horizon_sweep({&ds}, small_gru(), quick_train(2), {1, 3}, 5);
    REQUIRE(s.size() == 2);
    CHECK(s[0].horizon_ms == 1);
    CHECK(s[1].horizon_ms == 3);
    CHECK_THAT(s[0].sample_and_hold_db, WithinAbs(hold_closed_form_db(100.0, 1e-3), 1e-3));
    CHECK_THAT(s[1].sample_and_hold_db, WithinAbs(hold_closed_form_db(100.0, 3e-3), 1e-3));
    const auto j = sweep_to_json(s);
    CHECK(sweep_to_json(sweep_from_json(j)) == j);
}
