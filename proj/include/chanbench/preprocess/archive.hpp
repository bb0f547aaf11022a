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
#include <chanbench/core/tensor.hpp>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace chanbench::preprocess {

// Binary tensor container:
//   bytes 0-3  magic "CHBT"
//   u32        format version (1)
//   u32        dtype code (1 = float32, 2 = float64)
//   u32        rank
//   i64[rank]  shape
//   payload    row-major little-endian values
// A JSON manifest next to the tensors describes what they contain.

class ArchiveError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline constexpr char tensor_magic[4] = {'C', 'H', 'B', 'T'};
inline constexpr std::uint32_t tensor_format_version = 1;

template <typename T>
constexpr std::uint32_t dtype_code()
{
    if constexpr (std::is_same_v<T, float>)
        return 1;
    else if constexpr (std::is_same_v<T, double>)
        return 2;
    else
        static_assert(sizeof(T) == 0, "unsupported tensor dtype");
}

template <typename V>
void write_pod(std::ostream &out, const V &v)
{
    out.write(reinterpret_cast<const char *>(&v), sizeof(V));
}

template <typename V>
V read_pod(std::istream &in, const std::string &file)
{
    V v{};
    in.read(reinterpret_cast<char *>(&v), sizeof(V));
    if (!in)
        throw ArchiveError(file + ": truncated tensor header");
    return v;
}

} // namespace detail

template <typename T>
void write_tensor(const std::filesystem::path &file, const Tensor<T> &t)
{
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw ArchiveError("cannot write " + file.string());
    out.write(detail::tensor_magic, 4);
    detail::write_pod(out, detail::tensor_format_version);
    detail::write_pod(out, detail::dtype_code<T>());
    detail::write_pod(out, static_cast<std::uint32_t>(t.rank()));
    for (int d : t.shape())
        detail::write_pod(out, static_cast<std::int64_t>(d));
    out.write(reinterpret_cast<const char *>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(T)));
    if (!out)
        throw ArchiveError("write failed for " + file.string());
}

template <typename T>
Tensor<T> read_tensor(const std::filesystem::path &file)
{
    const std::string name = file.string();
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw ArchiveError("cannot open " + name);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, detail::tensor_magic, 4) != 0)
        throw ArchiveError(name + ": not a tensor container");
    if (detail::read_pod<std::uint32_t>(in, name) != detail::tensor_format_version)
        throw ArchiveError(name + ": unsupported tensor format version");
    if (detail::read_pod<std::uint32_t>(in, name) != detail::dtype_code<T>())
        throw ArchiveError(name + ": unexpected dtype");
    const auto rank = detail::read_pod<std::uint32_t>(in, name);
    if (rank > 8)
        throw ArchiveError(name + ": implausible rank");
    std::vector<int> shape;
    for (std::uint32_t i = 0; i < rank; ++i)
    {
        const auto d = detail::read_pod<std::int64_t>(in, name);
        if (d < 0 || d > (1LL << 31))
            throw ArchiveError(name + ": invalid dimension");
        shape.push_back(static_cast<int>(d));
    }
    Tensor<T> t(shape);
    in.read(reinterpret_cast<char *>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(T)));
    if (!in || in.gcount() != static_cast<std::streamsize>(t.size() * sizeof(T)))
        throw ArchiveError(name + ": truncated payload");
    if (in.peek() != std::char_traits<char>::eof())
        throw ArchiveError(name + ": trailing bytes after payload");
    return t;
}

inline void write_json(const std::filesystem::path &file, const json &j)
{
    std::ofstream out(file);
    if (!out)
        throw ArchiveError("cannot write " + file.string());
    out << j.dump(2) << '\n';
}

inline json read_json(const std::filesystem::path &file)
{
    std::ifstream in(file);
    if (!in)
        throw ArchiveError("cannot open " + file.string());
    try
    {
        return json::parse(in);
    }
    catch (const json::parse_error &e)
    {
        throw ArchiveError(file.string() + ": " + e.what());
    }
}

} // namespace chanbench::preprocess
