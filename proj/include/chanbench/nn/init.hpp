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

#include <chanbench/core/rng.hpp>
#include <chanbench/core/tensor.hpp>

#include <Eigen/Dense>

#include <cmath>

namespace chanbench::nn::init {

/// U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
template <typename T>
void fan_in_uniform(Tensor<T> &t, int fan_in, Rng &rng)
{
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto &v : t.values())
        v = static_cast<T>(uniform(rng, -bound, bound));
}

/// Fills rows [row0, row0 + n) of a (rows, n) matrix with an orthogonal
/// n x n block (QR of a Gaussian matrix, sign-corrected).
template <typename T>
void orthogonal_block(Tensor<T> &t, int row0, int n, Rng &rng)
{
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j)
        if (r(j, j) < 0.0)
            q.col(j) *= -1.0;
    const int cols = t.dim(1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            t[static_cast<std::size_t>(row0 + i) * cols + j] = static_cast<T>(q(i, j));
}

} // namespace chanbench::nn::init
