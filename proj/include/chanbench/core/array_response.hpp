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
#include <chanbench/core/types.hpp>

#include <cmath>
#include <vector>

namespace chanbench {

/// Far-field ULA steering vector; element k has phase 2*pi*d*k*sin(angle).
inline std::vector<cplx> array_response(const ArrayGeometry &geometry, double angle_rad)
{
    geometry.validate();
    std::vector<cplx> a(static_cast<std::size_t>(geometry.num_elements));
    const double step = two_pi * geometry.spacing_wavelengths * std::sin(angle_rad);
    for (int k = 0; k < geometry.num_elements; ++k)
        a[static_cast<std::size_t>(k)] = std::polar(1.0, step * k);
    return a;
}

} // namespace chanbench
