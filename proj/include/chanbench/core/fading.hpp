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
#include <chanbench/core/rng.hpp>
#include <chanbench/core/types.hpp>

#include <cmath>
#include <stdexcept>
#include <variant>

namespace chanbench {

namespace fading {

struct Awgn
{
};

struct Rayleigh
{
    double omega = 1.0;
};

struct Rician
{
    double k = 0.0; // linear K-factor
    double omega = 1.0;
};

struct Nakagami
{
    double m = 1.0;
    double omega = 1.0;
};

} // namespace fading

using FadingKind = std::variant<fading::Awgn, fading::Rayleigh, fading::Rician, fading::Nakagami>;

/// Draws one flat-fading coefficient h (y = h x + n). E|h|^2 = omega; the
/// AWGN case returns h = 1.
inline cplx fading_sample(const FadingKind &kind, Rng &rng)
{
    struct Visitor
    {
        Rng &rng;

        cplx operator()(const fading::Awgn &) const { return {1.0, 0.0}; }

        cplx operator()(const fading::Rayleigh &p) const
        {
            if (!(p.omega > 0.0))
                throw std::invalid_argument("rayleigh: omega must be > 0");
            return complex_normal(rng, p.omega);
        }

        cplx operator()(const fading::Rician &p) const
        {
            if (!(p.k >= 0.0) || !std::isfinite(p.k))
                throw std::invalid_argument("rician: K must be >= 0");
            if (!(p.omega > 0.0))
                throw std::invalid_argument("rician: omega must be > 0");
            const double los = std::sqrt(p.k * p.omega / (p.k + 1.0));
            const double phase = uniform(rng, 0.0, two_pi);
            return std::polar(los, phase) + complex_normal(rng, p.omega / (p.k + 1.0));
        }

        cplx operator()(const fading::Nakagami &p) const
        {
            if (!(p.m >= 0.5) || !std::isfinite(p.m))
                throw std::invalid_argument("nakagami: m must be >= 0.5");
            if (!(p.omega > 0.0))
                throw std::invalid_argument("nakagami: omega must be > 0");
            // R^2 ~ Gamma(m, omega/m)
            const double r2 = std::gamma_distribution<double>(p.m, p.omega / p.m)(rng);
            const double phase = uniform(rng, 0.0, two_pi);
            return std::polar(std::sqrt(r2), phase);
        }
    };
    return std::visit(Visitor{rng}, kind);
}

} // namespace chanbench
