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

#include <chanbench/core/types.hpp>

#include <stdexcept>

namespace chanbench::preprocess {

/// Averages each block of `tones_per_prb` consecutive tones into one
/// effective subcarrier.
inline ChannelGrid prb_average(const ChannelGrid &fine, int tones_per_prb, int n_prb = 32)
{
    if (tones_per_prb < 1 || n_prb < 1)
        throw std::invalid_argument("prb_average: tones_per_prb and n_prb must be >= 1");
    if (fine.n_c() != tones_per_prb * n_prb)
        throw std::invalid_argument("prb_average: grid has " + std::to_string(fine.n_c()) + " tones, expected " +
                                    std::to_string(tones_per_prb * n_prb));
    const double spacing = fine.subcarrier_spacing_hz() * tones_per_prb;
    const double f0 = fine.f0_hz() + 0.5 * (tones_per_prb - 1) * fine.subcarrier_spacing_hz();
    ChannelGrid out(fine.n_rx(), fine.n_t(), n_prb, spacing, f0);
    const double inv = 1.0 / tones_per_prb;
    for (int r = 0; r < fine.n_rx(); ++r)
        for (int t = 0; t < fine.n_t(); ++t)
            for (int p = 0; p < n_prb; ++p)
            {
                cplx acc{0.0, 0.0};
                for (int k = 0; k < tones_per_prb; ++k)
                    acc += fine(r, t, p * tones_per_prb + k);
                out(r, t, p) = acc * inv;
            }
    return out;
}

} // namespace chanbench::preprocess
