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

#include <chanbench/core/tensor.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace chanbench::nn {

/// Floor applied when converting an exact reconstruction to decibels.
inline constexpr double nmse_floor_db = -300.0;

inline double to_db(double ratio)
{
    if (!(ratio >= 0.0))
        throw std::domain_error("to_db: negative or NaN ratio");
    if (ratio == 0.0)
        return nmse_floor_db;
    return std::max(nmse_floor_db, 10.0 * std::log10(ratio));
}

/// Per-sample ||h - h_est||^2 / ||h||^2 along the leading axis.
template <typename T>
std::vector<double> nmse_ratios(const Tensor<T> &h_true, const Tensor<T> &h_est)
{
    if (h_true.shape() != h_est.shape())
        throw std::invalid_argument("nmse: shape mismatch " + h_true.shape_string() + " vs " + h_est.shape_string());
    if (h_true.rank() == 0 || h_true.dim(0) == 0)
        throw std::invalid_argument("nmse: empty batch");
    const std::size_t n = static_cast<std::size_t>(h_true.dim(0)), d = h_true.row_size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < d; ++k)
        {
            const double a = h_true[i * d + k], b = h_est[i * d + k];
            num += (a - b) * (a - b);
            den += a * a;
        }
        if (!(den > 0.0))
            throw std::domain_error("nmse: zero-norm reference in sample " + std::to_string(i));
        out[i] = num / den;
    }
    return out;
}

inline double mean_of(const std::vector<double> &v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

/// Batch NMSE in dB: linear per-sample ratios are averaged before the log.
template <typename T>
double nmse_db(const Tensor<T> &h_true, const Tensor<T> &h_est)
{
    return to_db(mean_of(nmse_ratios(h_true, h_est)));
}

/// Mean per-sample NMSE ratio and its gradient with respect to `h_est`.
template <typename T>
double nmse_loss(const Tensor<T> &h_true, const Tensor<T> &h_est, Tensor<T> &grad)
{
    const auto ratios = nmse_ratios(h_true, h_est);
    const std::size_t n = ratios.size(), d = h_true.row_size();
    grad = Tensor<T>(h_est.shape());
    for (std::size_t i = 0; i < n; ++i)
    {
        double den = 0.0;
        for (std::size_t k = 0; k < d; ++k)
            den += static_cast<double>(h_true[i * d + k]) * h_true[i * d + k];
        const double c = 2.0 / (den * static_cast<double>(n));
        for (std::size_t k = 0; k < d; ++k)
            grad[i * d + k] = static_cast<T>(c * (static_cast<double>(h_est[i * d + k]) - h_true[i * d + k]));
    }
    return mean_of(ratios);
}

} // namespace chanbench::nn
