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

#include <chanbench/core/hash.hpp>
#include <chanbench/core/rng.hpp>
#include <chanbench/core/synthesis.hpp>
#include <chanbench/core/tensor.hpp>
#include <chanbench/eval/domain.hpp>
#include <chanbench/eval/pool.hpp>
#include <chanbench/eval/setup.hpp>
#include <chanbench/nn/train.hpp>
#include <chanbench/preprocess/angle_delay.hpp>
#include <chanbench/preprocess/archive.hpp>
#include <chanbench/preprocess/normalize.hpp>
#include <chanbench/preprocess/prb.hpp>
#include <chanbench/preprocess/windows.hpp>
#include <chanbench/rt/track.hpp>
#include <chanbench/stochastic/generators.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace chanbench::eval {

inline constexpr int dataset_format_version = 1;

/// Everything that determines a generated dataset.
struct DatasetRequest
{
    Task task = Task::compression;
    DomainConfig domain;
    CompressionSetup compression;
    PredictionSetup prediction;
    int samples = 0;
    std::uint64_t seed = 0;

    json key_json() const
    {
        json k = {{"format", "chanbench-dataset"},
                  {"version", dataset_format_version},
                  {"task", to_string(task)},
                  {"setup", task == Task::compression ? to_json(compression) : to_json(prediction)},
                  {"generator", domain.generator_json()},
                  {"samples", samples},
                  {"seed", seed}};
        if (task == Task::prediction && domain.is_rt())
            k["trace_step_m"] = rt::TrackSequenceSpec{}.base_step_m;
        return k;
    }

    std::string hash() const { return short_hash(key_json().dump()); }
};

/// Model-ready tensors of one domain.
///   compression: inputs (N, 2, n_delay, n_angle), per-snapshot ZMUV
///   prediction:  inputs (N, l_in, F) and one (N, F) target per horizon,
///                scaled by the dataset-wide max |H|
struct TaskDataset
{
    Task task = Task::compression;
    std::string domain;
    std::string hash;
    Tensor<float> inputs;
    std::map<int, Tensor<float>> targets;
    json manifest;

    std::size_t size() const { return inputs.rank() == 0 ? 0 : static_cast<std::size_t>(inputs.dim(0)); }

    const Tensor<float> &target(int horizon_ms) const
    {
        if (task == Task::compression)
            return inputs;
        const auto it = targets.find(horizon_ms);
        if (it == targets.end())
            throw std::invalid_argument("dataset '" + domain + "' has no " + std::to_string(horizon_ms) +
                                        " ms horizon");
        return it->second;
    }

    nn::Dataset<float> supervised(int horizon_ms) const { return {inputs, target(horizon_ms)}; }

    nn::Dataset<float> supervised(int horizon_ms, std::span<const std::size_t> rows) const
    {
        return {inputs.gather(rows), target(horizon_ms).gather(rows)};
    }
};

namespace detail {

inline stochastic::SynthesisSetup prediction_arrays(const PredictionSetup &s)
{
    return {ArrayGeometry{s.n_rx, 0.5}, ArrayGeometry{s.n_tx, 0.5}, {0.0}};
}

/// One stochastic (or single-path) draw. Large-scale parameters come from
/// the profile; angles for tapped delay lines stay at zero.
inline PathSet draw_stochastic(const DomainConfig &d, int n_rx, int n_t, Rng &rng)
{
    return std::visit(
        [&](const auto &src) -> PathSet {
            using S = std::decay_t<decltype(src)>;
            if constexpr (std::is_same_v<S, stochastic::TdlProfile>)
                return stochastic::gen_tdl(src, d.delay_spread_s, n_rx, n_t, rng);
            else if constexpr (std::is_same_v<S, stochastic::CdlProfile>)
                return stochastic::gen_cdl(src, d.delay_spread_s, rng);
            else if constexpr (std::is_same_v<S, stochastic::GbsmConfig>)
                return stochastic::gen_uma(src, rng);
            else if constexpr (std::is_same_v<S, SinglePathSource>)
            {
                Path p;
                p.gain = std::polar(1.0, uniform(rng, 0.0, two_pi));
                p.aod_rad = uniform(rng, -pi, pi);
                p.aoa_rad = uniform(rng, -pi, pi);
                PathSet ps;
                ps.paths.push_back(p);
                return ps;
            }
            else
                throw std::logic_error("draw_stochastic: site-specific source");
        },
        d.source);
}

/// Lattice points inside the receiver regions, each point once even where
/// regions overlap.
inline std::vector<Vec2> receiver_lattice(const RtSource &src)
{
    std::vector<Vec2> pts;
    std::set<std::pair<long long, long long>> seen;
    const double h = src.grid_spacing_m;
    for (const auto &r : src.receiver_regions)
    {
        const auto nx = static_cast<int>(std::floor((r.max.x - r.min.x) / h + 1e-9));
        const auto ny = static_cast<int>(std::floor((r.max.y - r.min.y) / h + 1e-9));
        for (int i = 0; i <= nx; ++i)
            for (int j = 0; j <= ny; ++j)
            {
                const Vec2 p{r.min.x + i * h, r.min.y + j * h};
                if (seen.emplace(std::llround(p.x * 1e6), std::llround(p.y * 1e6)).second)
                    pts.push_back(p);
            }
    }
    return pts;
}

struct CompressionSampleResult
{
    std::vector<double> values;
    double retained_energy = 0.0;
};

inline CompressionSampleResult compression_sample(const PathSet &ps, const CompressionSetup &s,
                                                  const std::vector<double> &tones)
{
    const auto fine = synth_geometric(ps, ArrayGeometry{s.n_rx, 0.5}, ArrayGeometry{s.n_tx, 0.5}, tones, 0.0);
    const auto grid = preprocess::prb_average(fine, s.tones_per_prb, s.n_prb);
    const auto ad = preprocess::to_angle_delay(grid, s.n_delay_keep);
    return {preprocess::zmuv(ad).values, preprocess::retained_energy_fraction(grid, s.n_delay_keep)};
}

/// Receivers for a site-specific compression dataset: the first `n` lattice
/// points, in seeded random order, that are far enough from the transmitter
/// and not in outage.
inline std::vector<PathSet> rt_receivers(const RtSource &src, std::size_t n, std::uint64_t seed, int jobs)
{
    auto pts = receiver_lattice(src);
    Rng rng(derive_seed(seed, 0x1a77));
    std::shuffle(pts.begin(), pts.end(), rng);
    std::vector<PathSet> out;
    std::size_t pos = 0;
    while (out.size() < n && pos < pts.size())
    {
        const std::size_t chunk = std::min(pts.size() - pos, std::max<std::size_t>(n - out.size(), 256));
        std::vector<PathSet> traced(chunk);
        parallel_for(chunk, jobs, [&](std::size_t i) {
            const Vec2 p = pts[pos + i];
            if ((p - src.scene.tx_position).norm() >= src.min_distance_m)
                traced[i] = rt::trace_paths(src.scene, p);
        });
        for (auto &ps : traced)
            if (!ps.empty() && out.size() < n)
                out.push_back(std::move(ps));
        pos += chunk;
    }
    if (out.size() < n)
        throw std::runtime_error("rt dataset: only " + std::to_string(out.size()) + " usable receivers for " +
                                 std::to_string(n) + " requested samples; enlarge the regions or the lattice");
    return out;
}

inline double segment_distance(Vec2 p, Vec2 a, Vec2 b)
{
    const Vec2 ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.dot(ab), 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

/// One straight track inside a receiver region, traced and interpolated.
inline ChannelSequence rt_track(const RtSource &src, const PredictionSetup &s, Rng &rng)
{
    static const Vec2 axes[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    const double span = s.speed_mps * s.period_s * (s.length - 1);
    std::vector<double> area;
    for (const auto &r : src.receiver_regions)
        area.push_back((r.max.x - r.min.x) * (r.max.y - r.min.y));
    std::discrete_distribution<std::size_t> pick_region(area.begin(), area.end());
    const auto arrays = prediction_arrays(s);
    rt::TrackSequenceSpec spec;
    spec.length = s.length;
    spec.period_s = s.period_s;
    spec.speed_mps = s.speed_mps;
    for (int attempt = 0; attempt < 1000; ++attempt)
    {
        const auto &reg = src.receiver_regions[pick_region(rng)];
        const Vec2 start{uniform(rng, reg.min.x, reg.max.x), uniform(rng, reg.min.y, reg.max.y)};
        const Vec2 dir = axes[std::uniform_int_distribution<int>(0, 3)(rng)];
        const Vec2 end = start + span * dir;
        if (!reg.contains(end) || segment_distance(src.scene.tx_position, start, end) < src.min_distance_m)
            continue;
        auto seq = rt::build_track_sequence(src.scene, start, dir, spec, arrays.rx, arrays.tx, arrays.freqs_hz).sequence;
        bool outage = false;
        for (const auto &g : seq.grids)
            outage = outage || !(g.energy() > 0.0);
        if (!outage)
            return seq;
    }
    throw std::runtime_error("rt dataset: could not place a track without outage in 1000 attempts");
}

inline ChannelSequence stochastic_sequence(const DomainConfig &d, const PredictionSetup &s, Rng &rng)
{
    auto ps = draw_stochastic(d, s.n_rx, s.n_tx, rng);
    const auto arrays = prediction_arrays(s);
    if (const auto *sp = std::get_if<SinglePathSource>(&d.source); sp && sp->doppler_hz)
    {
        for (auto &p : ps.paths)
            p.doppler_hz = *sp->doppler_hz;
        ChannelSequence seq;
        seq.sampling_period_s = s.period_s;
        for (int k = 0; k < s.length; ++k)
            seq.grids.push_back(synth_geometric(ps, arrays.rx, arrays.tx, arrays.freqs_hz, s.period_s * k));
        return seq;
    }
    const auto mobility = stochastic::draw_mobility(ps.size(), s.speed_mps, rng);
    return stochastic::evolve_sequence(ps, mobility, s.length, s.period_s, s.carrier_hz, arrays);
}

inline Tensor<float> to_float_tensor(std::vector<int> shape, const std::vector<double> &v)
{
    Tensor<float> t(std::move(shape));
    std::transform(v.begin(), v.end(), t.values().begin(), [](double x) { return static_cast<float>(x); });
    return t;
}

} // namespace detail

inline TaskDataset generate_compression(const DatasetRequest &req, int jobs)
{
    const auto &s = req.compression;
    s.validate();
    const auto n = static_cast<std::size_t>(req.samples);
    if (n == 0)
        throw std::invalid_argument("generate: dataset '" + req.domain.name + "' needs at least one sample");
    const auto tones = s.fine_tones();
    std::vector<detail::CompressionSampleResult> samples(n);

    if (const auto *src = std::get_if<RtSource>(&req.domain.source))
    {
        auto scene_src = *src;
        scene_src.scene.carrier_hz = s.carrier_hz;
        const auto receivers = detail::rt_receivers(scene_src, n, req.seed, jobs);
        parallel_for(n, jobs, [&](std::size_t i) { samples[i] = detail::compression_sample(receivers[i], s, tones); });
    }
    else
    {
        parallel_for(n, jobs, [&](std::size_t i) {
            Rng rng(derive_seed(req.seed, i));
            samples[i] = detail::compression_sample(detail::draw_stochastic(req.domain, s.n_rx, s.n_tx, rng), s, tones);
        });
    }

    const auto shape = s.sample_shape();
    const std::size_t per = static_cast<std::size_t>(shape[0]) * shape[1] * shape[2];
    TaskDataset ds;
    ds.task = Task::compression;
    ds.domain = req.domain.name;
    ds.hash = req.hash();
    ds.inputs = Tensor<float>({static_cast<int>(n), shape[0], shape[1], shape[2]});
    double e_sum = 0.0, e_min = 1.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        std::transform(samples[i].values.begin(), samples[i].values.end(), ds.inputs.data() + i * per,
                       [](double x) { return static_cast<float>(x); });
        e_sum += samples[i].retained_energy;
        e_min = std::min(e_min, samples[i].retained_energy);
    }
    const double e_mean = e_sum / static_cast<double>(n);
    if (const auto *src = std::get_if<RtSource>(&req.domain.source); src && !(e_mean > src->min_retained_energy))
        throw std::runtime_error("rt dataset '" + req.domain.name + "': retained delay-bin energy fraction " +
                                 std::to_string(e_mean) + " is not above " + std::to_string(src->min_retained_energy));

    ds.manifest = req.key_json();
    ds.manifest["hash"] = ds.hash;
    ds.manifest["domain"] = req.domain.name;
    ds.manifest["normalization"] = {{"scheme", "zmuv_per_snapshot"}};
    ds.manifest["retained_energy"] = {{"mean", e_mean}, {"min", e_min}};
    ds.manifest["shapes"] = {{"inputs", ds.inputs.shape()}};
    return ds;
}

inline TaskDataset generate_prediction(const DatasetRequest &req, int jobs)
{
    const auto &s = req.prediction;
    s.validate();
    const auto n = static_cast<std::size_t>(req.samples);
    if (n == 0)
        throw std::invalid_argument("generate: dataset '" + req.domain.name + "' needs at least one sample");

    std::vector<ChannelSequence> seqs(n);
    const auto *rt_src = std::get_if<RtSource>(&req.domain.source);
    RtSource scene_src;
    if (rt_src)
    {
        scene_src = *rt_src;
        scene_src.scene.carrier_hz = s.carrier_hz;
    }
    parallel_for(n, jobs, [&](std::size_t i) {
        Rng rng(derive_seed(req.seed, i));
        seqs[i] = rt_src ? detail::rt_track(scene_src, s, rng) : detail::stochastic_sequence(req.domain, s, rng);
    });

    const double scale = preprocess::maxabs_scale(std::span<ChannelSequence>(seqs));
    const int f = s.n_features();
    TaskDataset ds;
    ds.task = Task::prediction;
    ds.domain = req.domain.name;
    ds.hash = req.hash();
    ds.inputs = Tensor<float>({static_cast<int>(n), s.l_in, f});
    for (int h : s.horizons_ms)
        ds.targets[h] = Tensor<float>({static_cast<int>(n), f});
    for (std::size_t i = 0; i < n; ++i)
    {
        const auto w = preprocess::make_windows(seqs[i], s.l_in, s.horizons_ms, scale);
        std::transform(w.inputs.begin(), w.inputs.end(), ds.inputs.data() + i * w.inputs.size(),
                       [](double x) { return static_cast<float>(x); });
        for (const auto &[h, t] : w.targets)
            std::transform(t.begin(), t.end(), ds.targets[h].data() + i * static_cast<std::size_t>(f),
                           [](double x) { return static_cast<float>(x); });
    }

    ds.manifest = req.key_json();
    ds.manifest["hash"] = ds.hash;
    ds.manifest["domain"] = req.domain.name;
    ds.manifest["normalization"] = {{"scheme", "maxabs_dataset"}, {"scale", scale}};
    json tshapes = json::object();
    for (const auto &[h, t] : ds.targets)
        tshapes[std::to_string(h)] = t.shape();
    ds.manifest["shapes"] = {{"inputs", ds.inputs.shape()}, {"targets", tshapes}};
    return ds;
}

inline TaskDataset generate_dataset(const DatasetRequest &req, int jobs)
{
    return req.task == Task::compression ? generate_compression(req, jobs) : generate_prediction(req, jobs);
}

inline std::string target_file(int horizon_ms) { return "targets_" + std::to_string(horizon_ms) + "ms.bin"; }

/// Writes inputs.bin, targets_<h>ms.bin and manifest.json into `dir`. The
/// directory is assembled next to its final location and renamed into place.
inline void save_dataset(const std::filesystem::path &dir, const TaskDataset &ds)
{
    namespace fs = std::filesystem;
    const fs::path tmp = dir.string() + ".partial";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    preprocess::write_tensor(tmp / "inputs.bin", ds.inputs);
    for (const auto &[h, t] : ds.targets)
        preprocess::write_tensor(tmp / target_file(h), t);
    preprocess::write_json(tmp / "manifest.json", ds.manifest);
    fs::remove_all(dir);
    fs::rename(tmp, dir);
}

inline TaskDataset load_dataset(const std::filesystem::path &dir)
{
    namespace fs = std::filesystem;
    if (!fs::exists(dir / "manifest.json"))
        throw preprocess::ArchiveError(dir.string() + ": no dataset manifest found");
    TaskDataset ds;
    ds.manifest = preprocess::read_json(dir / "manifest.json");
    try
    {
        if (ds.manifest.at("format") != "chanbench-dataset" || ds.manifest.at("version") != dataset_format_version)
            throw preprocess::ArchiveError(dir.string() + ": not a dataset manifest of a supported version");
        ds.task = task_from_string(ds.manifest.at("task").get<std::string>(), "task");
        ds.domain = ds.manifest.at("domain").get<std::string>();
        ds.hash = ds.manifest.at("hash").get<std::string>();
        ds.inputs = preprocess::read_tensor<float>(dir / "inputs.bin");
        if (ds.inputs.shape() != ds.manifest.at("shapes").at("inputs").get<std::vector<int>>())
            throw preprocess::ArchiveError(dir.string() + ": inputs shape disagrees with the manifest");
        if (ds.task == Task::prediction)
            for (const auto &h : ds.manifest.at("setup").at("horizons_ms"))
            {
                const int hm = h.get<int>();
                ds.targets[hm] = preprocess::read_tensor<float>(dir / target_file(hm));
                if (ds.targets[hm].dim(0) != ds.inputs.dim(0))
                    throw preprocess::ArchiveError(dir.string() + ": target count disagrees with inputs");
            }
    }
    catch (const json::exception &e)
    {
        throw preprocess::ArchiveError(dir.string() + ": malformed manifest: " + e.what());
    }
    return ds;
}

/// Content-addressed dataset store: `root/datasets/<hash>`.
class DatasetCache
{
public:
    DatasetCache() = default;
    explicit DatasetCache(std::filesystem::path root) : root_(std::move(root)) {}

    bool enabled() const { return !root_.empty(); }
    std::filesystem::path dir_for(const DatasetRequest &req) const { return root_ / "datasets" / req.hash(); }

    /// Loads the cached dataset or generates (and stores) it. `hit` reports
    /// whether the cache answered.
    TaskDataset get(const DatasetRequest &req, int jobs, bool *hit = nullptr) const
    {
        if (enabled())
        {
            const auto dir = dir_for(req);
            if (std::filesystem::exists(dir / "manifest.json"))
            {
                auto ds = load_dataset(dir);
                if (ds.hash != req.hash())
                    throw preprocess::ArchiveError(dir.string() + ": manifest hash does not match its location");
                if (hit)
                    *hit = true;
                return ds;
            }
        }
        if (hit)
            *hit = false;
        auto ds = generate_dataset(req, jobs);
        if (enabled())
            save_dataset(dir_for(req), ds);
        return ds;
    }

private:
    std::filesystem::path root_;
};

} // namespace chanbench::eval
