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
#include <chanbench/nn/init.hpp>
#include <chanbench/nn/layer.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace chanbench::nn {

namespace detail {

inline void require_shape(bool ok, const std::string &layer, const std::string &what)
{
    if (!ok)
        throw std::invalid_argument(layer + ": " + what);
}

} // namespace detail

/// y = x W^T + b on (N, in) inputs.
template <typename T>
class Dense : public Layer<T>
{
public:
    Dense(int in, int out, Rng &rng) : in_(in), out_(out), w_("weight", {out, in}), b_("bias", {out})
    {
        init::fan_in_uniform(w_.value, in, rng);
        init::fan_in_uniform(b_.value, in, rng);
    }

    Tensor<T> forward(const Tensor<T> &x, Mode) override
    {
        detail::require_shape(x.rank() == 2 && x.dim(1) == in_, "dense", "expected (N, " + std::to_string(in_) + "), got " + x.shape_string());
        x_ = x;
        const int n = x.dim(0);
        Tensor<T> y({n, out_});
        MapRM<T> ym(y.data(), n, out_);
        ym.noalias() = ConstMapRM<T>(x.data(), n, in_) * ConstMapRM<T>(w_.value.data(), out_, in_).transpose();
        ym.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(b_.value.data(), out_);
        return y;
    }

    Tensor<T> backward(const Tensor<T> &g) override
    {
        const int n = x_.dim(0);
        ConstMapRM<T> gm(g.data(), n, out_);
        MapRM<T>(w_.grad.data(), out_, in_).noalias() += gm.transpose() * ConstMapRM<T>(x_.data(), n, in_);
        add_column_sums(gm, b_.grad.data());
        Tensor<T> dx({n, in_});
        MapRM<T>(dx.data(), n, in_).noalias() = gm * ConstMapRM<T>(w_.value.data(), out_, in_);
        return dx;
    }

    std::string kind() const override { return "dense"; }
    std::vector<Param<T> *> params() override { return {&w_, &b_}; }
    void set_prefix(const std::string &p) override
    {
        w_.name = p + "weight";
        b_.name = p + "bias";
    }

    Param<T> &weight() { return w_; }
    Param<T> &bias() { return b_; }

private:
    int in_, out_;
    Param<T> w_, b_;
    Tensor<T> x_;
};

/// Stride-1 "same" 2-D convolution on (N, C, H, W) via im2col.
template <typename T>
class Conv2d : public Layer<T>
{
public:
    Conv2d(int cin, int cout, int kernel, Rng &rng)
        : cin_(cin), cout_(cout), k_(kernel), w_("weight", {cout, cin * kernel * kernel}), b_("bias", {cout})
    {
        if (kernel < 1 || kernel % 2 == 0)
            throw std::invalid_argument("conv2d: kernel size must be odd");
        init::fan_in_uniform(w_.value, cin * kernel * kernel, rng);
        init::fan_in_uniform(b_.value, cin * kernel * kernel, rng);
    }

    Tensor<T> forward(const Tensor<T> &x, Mode) override
    {
        detail::require_shape(x.rank() == 4 && x.dim(1) == cin_, "conv2d",
                              "expected (N, " + std::to_string(cin_) + ", H, W), got " + x.shape_string());
        x_ = x;
        const int n = x.dim(0), h = x.dim(2), w = x.dim(3), hw = h * w, ck = cin_ * k_ * k_;
        Tensor<T> y({n, cout_, h, w});
        MatrixRM<T> col(ck, hw);
        ConstMapRM<T> wm(w_.value.data(), cout_, ck);
        const Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bias(b_.value.data(), cout_);
        for (int s = 0; s < n; ++s)
        {
            im2col(x.data() + static_cast<std::size_t>(s) * cin_ * hw, h, w, col);
            MapRM<T> ym(y.data() + static_cast<std::size_t>(s) * cout_ * hw, cout_, hw);
            ym.noalias() = wm * col;
            ym.colwise() += bias;
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T> &g) override
    {
        const int n = x_.dim(0), h = x_.dim(2), w = x_.dim(3), hw = h * w, ck = cin_ * k_ * k_;
        Tensor<T> dx(x_.shape());
        MatrixRM<T> col(ck, hw), dcol(ck, hw);
        ConstMapRM<T> wm(w_.value.data(), cout_, ck);
        MapRM<T> dw(w_.grad.data(), cout_, ck);
        for (int s = 0; s < n; ++s)
        {
            ConstMapRM<T> gm(g.data() + static_cast<std::size_t>(s) * cout_ * hw, cout_, hw);
            im2col(x_.data() + static_cast<std::size_t>(s) * cin_ * hw, h, w, col);
            dw.noalias() += gm * col.transpose();
            add_row_sums(gm, b_.grad.data());
            dcol.noalias() = wm.transpose() * gm;
            col2im(dcol, h, w, dx.data() + static_cast<std::size_t>(s) * cin_ * hw);
        }
        return dx;
    }

    std::string kind() const override { return "conv2d"; }
    std::vector<Param<T> *> params() override { return {&w_, &b_}; }
    void set_prefix(const std::string &p) override
    {
        w_.name = p + "weight";
        b_.name = p + "bias";
    }

    int kernel() const { return k_; }

private:
    void im2col(const T *src, int h, int w, MatrixRM<T> &col) const
    {
        const int pad = k_ / 2;
        for (int c = 0; c < cin_; ++c)
            for (int ki = 0; ki < k_; ++ki)
                for (int kj = 0; kj < k_; ++kj)
                {
                    T *row = col.data() + static_cast<std::size_t>((c * k_ + ki) * k_ + kj) * h * w;
                    for (int y = 0; y < h; ++y)
                    {
                        const int sy = y + ki - pad;
                        T *dst = row + static_cast<std::size_t>(y) * w;
                        if (sy < 0 || sy >= h)
                        {
                            std::fill(dst, dst + w, T(0));
                            continue;
                        }
                        const T *line = src + (static_cast<std::size_t>(c) * h + sy) * w;
                        for (int x = 0; x < w; ++x)
                        {
                            const int sx = x + kj - pad;
                            dst[x] = (sx >= 0 && sx < w) ? line[sx] : T(0);
                        }
                    }
                }
    }

    void col2im(const MatrixRM<T> &col, int h, int w, T *dst) const
    {
        const int pad = k_ / 2;
        for (int c = 0; c < cin_; ++c)
            for (int ki = 0; ki < k_; ++ki)
                for (int kj = 0; kj < k_; ++kj)
                {
                    const T *row = col.data() + static_cast<std::size_t>((c * k_ + ki) * k_ + kj) * h * w;
                    for (int y = 0; y < h; ++y)
                    {
                        const int sy = y + ki - pad;
                        if (sy < 0 || sy >= h)
                            continue;
                        T *line = dst + (static_cast<std::size_t>(c) * h + sy) * w;
                        const T *src = row + static_cast<std::size_t>(y) * w;
                        const int x0 = std::max(0, pad - kj), x1 = std::min(w, w + pad - kj);
                        for (int x = x0; x < x1; ++x)
                            line[x + kj - pad] += src[x];
                    }
                }
    }

    int cin_, cout_, k_;
    Param<T> w_, b_;
    Tensor<T> x_;
};

/// Batch normalization over axis 1 of (N, C) or (N, C, ...) inputs. Train
/// mode normalizes with batch statistics and updates the running averages;
/// eval mode uses the running averages.
template <typename T>
class BatchNorm : public Layer<T>
{
public:
    explicit BatchNorm(int channels, double momentum = 0.1, double eps = 1e-5)
        : c_(channels), momentum_(momentum), eps_(eps), gamma_("weight", {channels}), beta_("bias", {channels}),
          mean_{"running_mean", Tensor<T>({channels})}, var_{"running_var", Tensor<T>({channels}, T(1))}
    {
        std::fill(gamma_.value.values().begin(), gamma_.value.values().end(), T(1));
    }

    /// When false, train mode still uses batch statistics but leaves the
    /// running averages untouched.
    bool update_running_stats = true;

    Tensor<T> forward(const Tensor<T> &x, Mode mode) override
    {
        detail::require_shape(x.rank() >= 2 && x.dim(1) == c_, "batchnorm",
                              "expected (N, " + std::to_string(c_) + ", ...), got " + x.shape_string());
        const int n = x.dim(0);
        const std::size_t s = x.size() / (static_cast<std::size_t>(n) * c_);
        const double m = static_cast<double>(n) * s;
        mode_ = mode;
        Tensor<T> y(x.shape());
        xhat_ = Tensor<T>(x.shape());
        inv_std_.assign(c_, 0.0);
        for (int c = 0; c < c_; ++c)
        {
            double mean = 0.0, var = 0.0;
            if (mode == Mode::train)
            {
                if (m < 2)
                    throw std::invalid_argument("batchnorm: train mode needs more than one value per channel");
                for (int i = 0; i < n; ++i)
                {
                    const T *p = x.data() + (static_cast<std::size_t>(i) * c_ + c) * s;
                    for (std::size_t k = 0; k < s; ++k)
                        mean += p[k];
                }
                mean /= m;
                for (int i = 0; i < n; ++i)
                {
                    const T *p = x.data() + (static_cast<std::size_t>(i) * c_ + c) * s;
                    for (std::size_t k = 0; k < s; ++k)
                        var += (p[k] - mean) * (p[k] - mean);
                }
                var /= m;
                if (update_running_stats)
                {
                    mean_.value[c] = static_cast<T>((1.0 - momentum_) * mean_.value[c] + momentum_ * mean);
                    var_.value[c] = static_cast<T>((1.0 - momentum_) * var_.value[c] + momentum_ * var * m / (m - 1.0));
                }
            }
            else
            {
                mean = mean_.value[c];
                var = var_.value[c];
            }
            const double inv = 1.0 / std::sqrt(var + eps_);
            inv_std_[c] = inv;
            const double g = gamma_.value[c], b = beta_.value[c];
            for (int i = 0; i < n; ++i)
            {
                const std::size_t off = (static_cast<std::size_t>(i) * c_ + c) * s;
                for (std::size_t k = 0; k < s; ++k)
                {
                    const double xh = (x[off + k] - mean) * inv;
                    xhat_[off + k] = static_cast<T>(xh);
                    y[off + k] = static_cast<T>(g * xh + b);
                }
            }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T> &g) override
    {
        const int n = g.dim(0);
        const std::size_t s = g.size() / (static_cast<std::size_t>(n) * c_);
        const double m = static_cast<double>(n) * s;
        Tensor<T> dx(g.shape());
        for (int c = 0; c < c_; ++c)
        {
            double sum_g = 0.0, sum_gx = 0.0;
            for (int i = 0; i < n; ++i)
            {
                const std::size_t off = (static_cast<std::size_t>(i) * c_ + c) * s;
                for (std::size_t k = 0; k < s; ++k)
                {
                    sum_g += g[off + k];
                    sum_gx += static_cast<double>(g[off + k]) * xhat_[off + k];
                }
            }
            gamma_.grad[c] += static_cast<T>(sum_gx);
            beta_.grad[c] += static_cast<T>(sum_g);
            const double scale = gamma_.value[c] * inv_std_[c];
            for (int i = 0; i < n; ++i)
            {
                const std::size_t off = (static_cast<std::size_t>(i) * c_ + c) * s;
                for (std::size_t k = 0; k < s; ++k)
                {
                    if (mode_ == Mode::train)
                        dx[off + k] = static_cast<T>(scale * (g[off + k] - sum_g / m - xhat_[off + k] * sum_gx / m));
                    else
                        dx[off + k] = static_cast<T>(scale * g[off + k]);
                }
            }
        }
        return dx;
    }

    void freeze_running_stats(bool frozen) override { update_running_stats = !frozen; }

    std::string kind() const override { return "batchnorm"; }
    std::vector<Param<T> *> params() override { return {&gamma_, &beta_}; }
    std::vector<Buffer<T> *> buffers() override { return {&mean_, &var_}; }
    void set_prefix(const std::string &p) override
    {
        gamma_.name = p + "weight";
        beta_.name = p + "bias";
        mean_.name = p + "running_mean";
        var_.name = p + "running_var";
    }

    Buffer<T> &running_mean() { return mean_; }
    Buffer<T> &running_var() { return var_; }

private:
    int c_;
    double momentum_, eps_;
    Param<T> gamma_, beta_;
    Buffer<T> mean_, var_;
    Tensor<T> xhat_;
    std::vector<double> inv_std_;
    Mode mode_ = Mode::train;
};

template <typename T>
class LeakyRelu : public Layer<T>
{
public:
    explicit LeakyRelu(double slope = 0.3) : slope_(static_cast<T>(slope)) {}

    Tensor<T> forward(const Tensor<T> &x, Mode) override
    {
        x_ = x;
        Tensor<T> y = x;
        for (auto &v : y.values())
            v = v > T(0) ? v : slope_ * v;
        return y;
    }

    Tensor<T> backward(const Tensor<T> &g) override
    {
        Tensor<T> dx = g;
        for (std::size_t i = 0; i < dx.size(); ++i)
            if (!(x_[i] > T(0)))
                dx[i] *= slope_;
        return dx;
    }

    std::string kind() const override { return "leaky_relu"; }

private:
    T slope_;
    Tensor<T> x_;
};

template <typename T>
class Tanh : public Layer<T>
{
public:
    Tensor<T> forward(const Tensor<T> &x, Mode) override
    {
        y_ = x;
        for (auto &v : y_.values())
            v = std::tanh(v);
        return y_;
    }

    Tensor<T> backward(const Tensor<T> &g) override
    {
        Tensor<T> dx = g;
        for (std::size_t i = 0; i < dx.size(); ++i)
            dx[i] *= T(1) - y_[i] * y_[i];
        return dx;
    }

    std::string kind() const override { return "tanh"; }

private:
    Tensor<T> y_;
};

/// Scales every sample (leading-axis row) to unit Euclidean norm.
template <typename T>
class L2Normalize : public Layer<T>
{
public:
    Tensor<T> forward(const Tensor<T> &x, Mode) override
    {
        y_ = x;
        const std::size_t n = static_cast<std::size_t>(x.dim(0)), d = x.row_size();
        norm_.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
        {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k)
                s += static_cast<double>(x[i * d + k]) * x[i * d + k];
            const double nrm = std::sqrt(s);
            if (!(nrm > 0.0))
                throw std::domain_error("l2_normalize: zero-norm sample");
            norm_[i] = nrm;
            for (std::size_t k = 0; k < d; ++k)
                y_[i * d + k] = static_cast<T>(x[i * d + k] / nrm);
        }
        return y_;
    }

    Tensor<T> backward(const Tensor<T> &g) override
    {
        Tensor<T> dx(g.shape());
        const std::size_t n = norm_.size(), d = g.row_size();
        for (std::size_t i = 0; i < n; ++i)
        {
            double dot = 0.0;
            for (std::size_t k = 0; k < d; ++k)
                dot += static_cast<double>(y_[i * d + k]) * g[i * d + k];
            for (std::size_t k = 0; k < d; ++k)
                dx[i * d + k] = static_cast<T>((g[i * d + k] - y_[i * d + k] * dot) / norm_[i]);
        }
        return dx;
    }

    std::string kind() const override { return "l2_normalize"; }

private:
    Tensor<T> y_;
    std::vector<double> norm_;
};

/// Multiplication by a fixed constant.
template <typename T>
class Scale : public Layer<T>
{
public:
    explicit Scale(double factor) : factor_(static_cast<T>(factor)) {}

    Tensor<T> forward(const Tensor<T> &x, Mode) override
    {
        Tensor<T> y = x;
        for (auto &v : y.values())
            v *= factor_;
        return y;
    }

    Tensor<T> backward(const Tensor<T> &g) override { return forward(g, Mode::eval); }
    std::string kind() const override { return "scale"; }

private:
    T factor_;
};

/// Inverted dropout: active in train mode only.
template <typename T>
class Dropout : public Layer<T>
{
public:
    Dropout(double p, std::uint64_t seed) : p_(p), rng_(seed)
    {
        if (!(p >= 0.0 && p < 1.0))
            throw std::invalid_argument("dropout: probability must lie in [0, 1)");
    }

    /// Reuse the previous mask (for finite-difference checks).
    bool freeze_mask = false;

    void reseed(std::uint64_t seed) override
    {
        rng_.seed(seed);
        mask_.clear();
    }

    Tensor<T> forward(const Tensor<T> &x, Mode mode) override
    {
        active_ = mode == Mode::train && p_ > 0.0;
        if (!active_)
            return x;
        if (!(freeze_mask && mask_.size() == x.size()))
        {
            mask_.assign(x.size(), T(0));
            const T keep = static_cast<T>(1.0 / (1.0 - p_));
            std::bernoulli_distribution bern(1.0 - p_);
            for (auto &m : mask_)
                m = bern(rng_) ? keep : T(0);
        }
        Tensor<T> y = x;
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] *= mask_[i];
        return y;
    }

    Tensor<T> backward(const Tensor<T> &g) override
    {
        if (!active_)
            return g;
        Tensor<T> dx = g;
        for (std::size_t i = 0; i < dx.size(); ++i)
            dx[i] *= mask_[i];
        return dx;
    }

    std::string kind() const override { return "dropout"; }

private:
    double p_;
    Rng rng_;
    std::vector<T> mask_;
    bool active_ = false;
};

/// Reshapes the per-sample part of the tensor; the leading axis is kept.
template <typename T>
class Reshape : public Layer<T>
{
public:
    explicit Reshape(std::vector<int> sample_shape) : shape_(std::move(sample_shape)) {}

    Tensor<T> forward(const Tensor<T> &x, Mode) override
    {
        in_shape_ = x.shape();
        std::vector<int> s{x.dim(0)};
        s.insert(s.end(), shape_.begin(), shape_.end());
        return x.reshaped(s);
    }

    Tensor<T> backward(const Tensor<T> &g) override { return g.reshaped(in_shape_); }
    std::string kind() const override { return "reshape"; }

private:
    std::vector<int> shape_, in_shape_;
};

} // namespace chanbench::nn
