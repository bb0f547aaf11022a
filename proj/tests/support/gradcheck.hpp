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

// Central finite-difference gradient oracle shared by the unit and
// acceptance suites. A layer is checked through the scalar probe
// L(x) = sum(w * f(x)) with a fixed random w, so backward(w) must return
// dL/dx and accumulate dL/dtheta.

#include <chanbench/nn/gru.hpp>
#include <chanbench/nn/layers.hpp>
#include <chanbench/nn/loss.hpp>
#include <chanbench/nn/models.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace gradcheck {

using namespace chanbench;
using namespace chanbench::nn;

struct Result
{
    std::string what;
    double max_rel_error = 0.0;
};

/// ||a - b|| / max(||a||, ||b||, 1e-6). The floor covers gradients that
/// vanish identically, e.g. a convolution bias feeding batch norm, where the
/// difference quotient is pure round-off.
template <typename A, typename B>
double rel_error(const A &a, const B &b)
{
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-6});
}

inline Tensor<double> random_tensor(std::vector<int> shape, Rng &rng, double min_abs = 0.0)
{
    Tensor<double> t(std::move(shape));
    for (auto &v : t.values())
    {
        do
            v = normal(rng);
        while (std::abs(v) < min_abs);
    }
    return t;
}

/// Checks input and parameter gradients of `layer` at `x`.
inline Result check_layer(Layer<double> &layer, const Tensor<double> &x, Mode mode, Rng &rng, double eps = 1e-5)
{
    const auto y0 = layer.forward(x, mode);
    const auto w = random_tensor(y0.shape(), rng);
    auto probe = [&](const Tensor<double> &in) {
        const auto y = layer.forward(in, mode);
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
            s += w[i] * y[i];
        return s;
    };

    for (auto *p : layer.params())
        p->zero_grad();
    layer.forward(x, mode);
    const auto dx = layer.backward(w);
    std::vector<std::vector<double>> analytic;
    for (auto *p : layer.params())
        analytic.push_back(p->grad.to_vector());

    Result res{layer.kind(), 0.0};
    Tensor<double> xp = x;
    std::vector<double> num(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        const double v = xp[i];
        xp[i] = v + eps;
        const double lp = probe(xp);
        xp[i] = v - eps;
        const double lm = probe(xp);
        xp[i] = v;
        num[i] = (lp - lm) / (2 * eps);
    }
    res.max_rel_error = rel_error(dx.values(), num);

    const auto params = layer.params();
    for (std::size_t k = 0; k < params.size(); ++k)
    {
        auto &val = params[k]->value.values();
        std::vector<double> pnum(val.size());
        for (std::size_t i = 0; i < val.size(); ++i)
        {
            const double v = val[i];
            val[i] = v + eps;
            const double lp = probe(x);
            val[i] = v - eps;
            const double lm = probe(x);
            val[i] = v;
            pnum[i] = (lp - lm) / (2 * eps);
        }
        res.max_rel_error = std::max(res.max_rel_error, rel_error(analytic[k], pnum));
    }
    return res;
}

/// Checks a whole model under the batch NMSE loss. The error is taken over
/// the concatenated parameter gradient: single tensors whose gradient is
/// identically zero would otherwise be scored on difference-quotient noise.
inline Result check_model(Model<double> &model, const Tensor<double> &x, const Tensor<double> &target, double eps = 1e-5)
{
    model.freeze_running_stats(true);
    auto loss_at = [&]() { Tensor<double> g; return nmse_loss(target, model.forward(x, Mode::train), g); };
    for (auto *p : model.params())
        p->zero_grad();
    Tensor<double> g;
    nmse_loss(target, model.forward(x, Mode::train), g);
    model.backward(g);

    std::vector<double> analytic, numeric;
    for (auto *p : model.params())
    {
        auto &val = p->value.values();
        for (std::size_t i = 0; i < val.size(); ++i)
        {
            const double v = val[i];
            val[i] = v + eps;
            const double lp = loss_at();
            val[i] = v - eps;
            const double lm = loss_at();
            val[i] = v;
            numeric.push_back((lp - lm) / (2 * eps));
            analytic.push_back(p->grad[i]);
        }
    }
    model.freeze_running_stats(false);
    return {model.arch(), rel_error(analytic, numeric)};
}

inline int pick(Rng &rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Runs `configs` random configurations of every layer type; returns the
/// worst relative error per layer type.
inline std::vector<Result> run_suite(int configs, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<Result> worst;
    auto record = [&](const std::string &name, double err) {
        for (auto &r : worst)
            if (r.what == name)
            {
                r.max_rel_error = std::max(r.max_rel_error, err);
                return;
            }
        worst.push_back({name, err});
    };

    for (int c = 0; c < configs; ++c)
    {
        for (int k : {7, 5, 3})
        {
            Conv2d<double> conv(pick(rng, 1, 3), pick(rng, 1, 4), k, rng);
            const auto x = random_tensor({pick(rng, 1, 3), conv.params()[0]->value.dim(1) / (k * k), pick(rng, 2, 8), pick(rng, 2, 9)}, rng);
            record("conv2d " + std::to_string(k) + "x" + std::to_string(k), check_layer(conv, x, Mode::train, rng).max_rel_error);
        }
        {
            const int in = pick(rng, 1, 12), out = pick(rng, 1, 12);
            Dense<double> dense(in, out, rng);
            record("dense", check_layer(dense, random_tensor({pick(rng, 1, 5), in}, rng), Mode::train, rng).max_rel_error);
        }
        {
            const int ch = pick(rng, 1, 6);
            BatchNorm<double> bn(ch);
            for (auto &v : bn.params()[0]->value.values())
                v = uniform(rng, 0.5, 2.0);
            for (auto &v : bn.params()[1]->value.values())
                v = normal(rng);
            bn.freeze_running_stats(true);
            record("batchnorm1d", check_layer(bn, random_tensor({pick(rng, 3, 8), ch}, rng), Mode::train, rng).max_rel_error);
            record("batchnorm2d",
                   check_layer(bn, random_tensor({pick(rng, 2, 4), ch, pick(rng, 2, 5), pick(rng, 2, 5)}, rng), Mode::train, rng)
                       .max_rel_error);
        }
        {
            const int in = pick(rng, 1, 5), hidden = pick(rng, 1, 6);
            Gru<double> gru(in, hidden, rng);
            record("gru", check_layer(gru, random_tensor({pick(rng, 1, 4), pick(rng, 1, 6), in}, rng), Mode::train, rng)
                              .max_rel_error);
        }
        {
            LeakyRelu<double> lrelu(0.3);
            // keep inputs away from the kink at 0
            record("leaky_relu",
                   check_layer(lrelu, random_tensor({pick(rng, 1, 4), pick(rng, 1, 20)}, rng, 1e-3), Mode::train, rng).max_rel_error);
        }
        {
            Tanh<double> th;
            record("tanh", check_layer(th, random_tensor({pick(rng, 1, 4), pick(rng, 1, 20)}, rng), Mode::train, rng).max_rel_error);
        }
        {
            L2Normalize<double> l2;
            record("l2_normalize",
                   check_layer(l2, random_tensor({pick(rng, 1, 4), pick(rng, 2, 20)}, rng), Mode::train, rng).max_rel_error);
        }
        {
            Dropout<double> drop(uniform(rng, 0.1, 0.7), rng());
            const auto x = random_tensor({pick(rng, 1, 4), pick(rng, 2, 20)}, rng);
            drop.forward(x, Mode::train);
            drop.freeze_mask = true;
            record("dropout", check_layer(drop, x, Mode::train, rng).max_rel_error);
        }
        {
            LastStep<double> last;
            record("last_step", check_layer(last, random_tensor({pick(rng, 1, 4), pick(rng, 1, 5), pick(rng, 1, 6)}, rng),
                                            Mode::train, rng)
                                    .max_rel_error);
        }
    }
    return worst;
}

/// End-to-end model checks on 4-sample batches.
inline std::vector<Result> run_model_suite(int configs, std::uint64_t seed)
{
    Rng rng(seed);
    Result csi{"csinet_plus model", 0.0}, gru{"gru_predictor model", 0.0};
    for (int c = 0; c < configs; ++c)
    {
        CsiNetPlusConfig cc;
        cc.n_delay = pick(rng, 2, 4);
        cc.n_angle = pick(rng, 2, 6);
        cc.code_dim = pick(rng, 2, 6);
        cc.refine_blocks = pick(rng, 1, 2);
        cc.refine_width_1 = pick(rng, 1, 3);
        cc.refine_width_2 = pick(rng, 1, 3);
        auto m = make_csinet_plus<double>(cc, rng());
        const auto x = random_tensor({4, 2, cc.n_delay, cc.n_angle}, rng);
        csi.max_rel_error = std::max(csi.max_rel_error, check_model(m, x, x, 1e-6).max_rel_error);

        GruPredictorConfig gc;
        gc.n_features = pick(rng, 1, 4);
        gc.hidden = pick(rng, 2, 6);
        gc.dropout = 0.0; // masks would change between probes
        const int window = pick(rng, 2, 6);
        auto g = make_gru_predictor<double>(gc, window, rng());
        gru.max_rel_error = std::max(
            gru.max_rel_error,
            check_model(g, random_tensor({4, window, gc.n_features}, rng), random_tensor({4, gc.n_features}, rng), 1e-6).max_rel_error);
    }
    return {csi, gru};
}

} // namespace gradcheck
