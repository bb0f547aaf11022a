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

#include <complex>
#include <cstdint>
#include <random>

namespace chanbench {

/// Random engine used throughout. Every generator takes an owned stream by
/// reference; nothing keeps global random state.
using Rng = std::mt19937_64;

/// splitmix64 finalizer, used to derive independent per-sample streams.
inline std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b)
{
    return derive_seed(derive_seed(master, a), b);
}

inline double uniform(Rng &rng, double lo = 0.0, double hi = 1.0)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double normal(Rng &rng, double mean = 0.0, double stddev = 1.0)
{
    return std::normal_distribution<double>(mean, stddev)(rng);
}

/// Circularly-symmetric complex normal with E|z|^2 = variance.
inline std::complex<double> complex_normal(Rng &rng, double variance = 1.0)
{
    std::normal_distribution<double> n(0.0, 1.0);
    const double s = std::sqrt(variance / 2.0);
    const double re = n(rng);
    const double im = n(rng);
    return {s * re, s * im};
}

} // namespace chanbench
