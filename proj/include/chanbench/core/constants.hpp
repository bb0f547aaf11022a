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

#include <numbers>

namespace chanbench {

inline constexpr double speed_of_light = 299792458.0;
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / pi; }

inline double wavelength(double carrier_hz) { return speed_of_light / carrier_hz; }

} // namespace chanbench
