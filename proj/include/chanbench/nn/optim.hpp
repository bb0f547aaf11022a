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

#include <chanbench/nn/layer.hpp>

#include <cmath>
#include <vector>

namespace chanbench::nn {

/// Adaptive-moment gradient descent with bias correction.
template <typename T>
class Adam
{
public:
    struct Options
    {
        double lr = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
    };

    Adam(std::vector<Param<T> *> params, Options opt) : params_(std::move(params)), opt_(opt)
    {
        for (auto *p : params_)
        {
            m_.emplace_back(p->value.size(), 0.0);
            v_.emplace_back(p->value.size(), 0.0);
        }
    }

    void zero_grad()
    {
        for (auto *p : params_)
            p->zero_grad();
    }

    void step()
    {
        ++t_;
        if (opt_.lr == 0.0)
            return;
        const double c1 = 1.0 - std::pow(opt_.beta1, t_), c2 = 1.0 - std::pow(opt_.beta2, t_);
        for (std::size_t i = 0; i < params_.size(); ++i)
        {
            auto &val = params_[i]->value.values();
            const auto &g = params_[i]->grad.values();
            auto &m = m_[i];
            auto &v = v_[i];
            for (std::size_t k = 0; k < val.size(); ++k)
            {
                const double gk = g[k];
                m[k] = opt_.beta1 * m[k] + (1.0 - opt_.beta1) * gk;
                v[k] = opt_.beta2 * v[k] + (1.0 - opt_.beta2) * gk * gk;
                val[k] = static_cast<T>(val[k] - opt_.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + opt_.eps));
            }
        }
    }

    double lr() const { return opt_.lr; }
    void set_lr(double lr) { opt_.lr = lr; }
    long steps() const { return t_; }

private:
    std::vector<Param<T> *> params_;
    Options opt_;
    std::vector<std::vector<double>> m_, v_;
    long t_ = 0;
};

} // namespace chanbench::nn
