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

#include <chanbench/nn/models.hpp>
#include <chanbench/preprocess/archive.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

namespace chanbench::nn {

inline constexpr char checkpoint_magic[4] = {'C', 'H', 'B', 'P'};
inline constexpr std::uint32_t checkpoint_version = 1;

struct CheckpointInfo
{
    std::string arch;
    json config;
    std::uint64_t seed = 0;
    std::string config_hash;
    int epoch = 0;
    double val_nmse_db = 0.0;
};

namespace detail {

inline void put_u32(std::ostream &out, std::uint32_t v) { out.write(reinterpret_cast<const char *>(&v), 4); }

inline std::uint32_t get_u32(std::istream &in, const std::string &file)
{
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char *>(&v), 4);
    if (!in)
        throw preprocess::ArchiveError(file + ": truncated checkpoint");
    return v;
}

} // namespace detail

/// Writes `params.bin` (named float32 tensors) and `manifest.json` into `dir`.
inline void save_checkpoint(const std::filesystem::path &dir, Model<float> &model, const CheckpointInfo &info)
{
    std::filesystem::create_directories(dir);
    const auto file = dir / "params.bin";
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw preprocess::ArchiveError("cannot write " + file.string());
    out.write(checkpoint_magic, 4);
    detail::put_u32(out, checkpoint_version);
    std::vector<std::pair<std::string, const Tensor<float> *>> entries;
    for (auto *p : model.params())
        entries.emplace_back(p->name, &p->value);
    for (auto *b : model.buffers())
        entries.emplace_back(b->name, &b->value);
    detail::put_u32(out, static_cast<std::uint32_t>(entries.size()));
    for (const auto &[name, t] : entries)
    {
        detail::put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::put_u32(out, static_cast<std::uint32_t>(t->rank()));
        for (int d : t->shape())
            detail::put_u32(out, static_cast<std::uint32_t>(d));
        out.write(reinterpret_cast<const char *>(t->data()), static_cast<std::streamsize>(t->size() * sizeof(float)));
    }
    if (!out)
        throw preprocess::ArchiveError("write failed for " + file.string());

    preprocess::write_json(dir / "manifest.json", {{"format", "chanbench-checkpoint"},
                                                   {"version", checkpoint_version},
                                                   {"arch", model.arch()},
                                                   {"config", model.config()},
                                                   {"seed", model.seed()},
                                                   {"config_hash", info.config_hash},
                                                   {"epoch", info.epoch},
                                                   {"val_nmse_db", info.val_nmse_db},
                                                   {"parameters", model.parameter_count()}});
}

inline CheckpointInfo read_checkpoint_info(const std::filesystem::path &dir)
{
    const json m = preprocess::read_json(dir / "manifest.json");
    if (m.value("format", "") != "chanbench-checkpoint" || m.value("version", 0) != static_cast<int>(checkpoint_version))
        throw preprocess::ArchiveError((dir / "manifest.json").string() + ": not a version-1 checkpoint manifest");
    CheckpointInfo info;
    info.arch = m.at("arch").get<std::string>();
    info.config = m.at("config");
    info.seed = m.at("seed").get<std::uint64_t>();
    info.config_hash = m.at("config_hash").get<std::string>();
    info.epoch = m.at("epoch").get<int>();
    info.val_nmse_db = m.at("val_nmse_db").get<double>();
    return info;
}

/// Rebuilds the model described by the manifest and loads its tensors.
inline Model<float> load_checkpoint(const std::filesystem::path &dir, CheckpointInfo *info_out = nullptr)
{
    const auto info = read_checkpoint_info(dir);
    auto model = build_model<float>(info.arch, info.config, info.seed);
    const auto file = dir / "params.bin";
    const std::string name = file.string();
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw preprocess::ArchiveError("cannot open " + name);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, checkpoint_magic, 4) != 0)
        throw preprocess::ArchiveError(name + ": not a checkpoint");
    if (detail::get_u32(in, name) != checkpoint_version)
        throw preprocess::ArchiveError(name + ": unsupported checkpoint version");
    std::vector<std::pair<std::string, Tensor<float> *>> entries;
    for (auto *p : model.params())
        entries.emplace_back(p->name, &p->value);
    for (auto *b : model.buffers())
        entries.emplace_back(b->name, &b->value);
    if (detail::get_u32(in, name) != entries.size())
        throw preprocess::ArchiveError(name + ": tensor count does not match the architecture");
    for (auto &[pname, t] : entries)
    {
        const auto len = detail::get_u32(in, name);
        if (len > 4096)
            throw preprocess::ArchiveError(name + ": corrupt tensor name");
        std::string stored(len, '\0');
        in.read(stored.data(), len);
        if (!in || stored != pname)
            throw preprocess::ArchiveError(name + ": expected tensor '" + pname + "'");
        const auto rank = detail::get_u32(in, name);
        std::vector<int> shape;
        for (std::uint32_t i = 0; i < rank && i < 8; ++i)
            shape.push_back(static_cast<int>(detail::get_u32(in, name)));
        if (shape != t->shape())
            throw preprocess::ArchiveError(name + ": shape mismatch for '" + pname + "'");
        in.read(reinterpret_cast<char *>(t->data()), static_cast<std::streamsize>(t->size() * sizeof(float)));
        if (!in)
            throw preprocess::ArchiveError(name + ": truncated tensor '" + pname + "'");
    }
    if (in.peek() != std::char_traits<char>::eof())
        throw preprocess::ArchiveError(name + ": trailing bytes");
    if (info_out)
        *info_out = info;
    return model;
}

} // namespace chanbench::nn
