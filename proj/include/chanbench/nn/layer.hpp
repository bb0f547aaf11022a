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

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace chanbench::nn {

enum class Mode { train, eval };

template <typename T>
using MatrixRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapRM = Eigen::Map<MatrixRM<T>>;
template <typename T>
using ConstMapRM = Eigen::Map<const MatrixRM<T>>;

/// out[c] += sum_r m(r, c), accumulated in row order.
template <typename M, typename T>
void add_column_sums(const M &m, T *out)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            out[c] += m(r, c);
}

/// out[r] += sum_c m(r, c), accumulated in column order.
template <typename M, typename T>
void add_row_sums(const M &m, T *out)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r)
    {
        T s(0);
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            s += m(r, c);
        out[r] += s;
    }
}

/// Trainable tensor with its gradient accumulator.
template <typename T>
struct Param
{
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;

    Param() = default;
    Param(std::string n, std::vector<int> shape) : name(std::move(n)), value(shape), grad(shape) {}

    void zero_grad() { std::fill(grad.values().begin(), grad.values().end(), T(0)); }
};

/// Non-trainable state that is still part of a checkpoint (e.g. running
/// batch-norm statistics).
template <typename T>
struct Buffer
{
    std::string name;
    Tensor<T> value;
};

/// Reverse-mode layer. `forward` caches whatever `backward` needs; `backward`
/// accumulates parameter gradients and returns the input gradient.
template <typename T>
class Layer
{
public:
    virtual ~Layer() = default;

    virtual Tensor<T> forward(const Tensor<T> &x, Mode mode) = 0;
    virtual Tensor<T> backward(const Tensor<T> &grad_out) = 0;
    virtual std::string kind() const = 0;

    virtual std::vector<Param<T> *> params() { return {}; }
    virtual std::vector<Buffer<T> *> buffers() { return {}; }

    /// Scoped name prefix applied to parameters and buffers.
    virtual void set_prefix(const std::string &prefix) { prefix_ = prefix; }

    /// Restarts any internal random stream (dropout masks).
    virtual void reseed(std::uint64_t) {}

    /// Stops (or resumes) updates of running statistics in train mode.
    virtual void freeze_running_stats(bool) {}

protected:
    std::string prefix_;
};

template <typename T>
using LayerPtr = std::unique_ptr<Layer<T>>;

/// Layers applied in order.
template <typename T>
class Sequential : public Layer<T>
{
public:
    Sequential() = default;

    template <typename L, typename... Args>
    L &add(Args &&...args)
    {
        auto layer = std::make_unique<L>(std::forward<Args>(args)...);
        L &ref = *layer;
        layers_.push_back(std::move(layer));
        return ref;
    }

    void push(LayerPtr<T> layer) { layers_.push_back(std::move(layer)); }

    Tensor<T> forward(const Tensor<T> &x, Mode mode) override
    {
        Tensor<T> h = x;
        for (auto &l : layers_)
            h = l->forward(h, mode);
        return h;
    }

    Tensor<T> backward(const Tensor<T> &grad_out) override
    {
        Tensor<T> g = grad_out;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
            g = (*it)->backward(g);
        return g;
    }

    std::string kind() const override { return "sequential"; }

    std::vector<Param<T> *> params() override
    {
        std::vector<Param<T> *> out;
        for (auto &l : layers_)
            for (auto *p : l->params())
                out.push_back(p);
        return out;
    }

    std::vector<Buffer<T> *> buffers() override
    {
        std::vector<Buffer<T> *> out;
        for (auto &l : layers_)
            for (auto *b : l->buffers())
                out.push_back(b);
        return out;
    }

    void set_prefix(const std::string &prefix) override
    {
        this->prefix_ = prefix;
        for (std::size_t i = 0; i < layers_.size(); ++i)
            layers_[i]->set_prefix(prefix + std::to_string(i) + ".");
    }

    void reseed(std::uint64_t seed) override
    {
        for (std::size_t i = 0; i < layers_.size(); ++i)
            layers_[i]->reseed(derive_seed(seed, i));
    }

    void freeze_running_stats(bool frozen) override
    {
        for (auto &l : layers_)
            l->freeze_running_stats(frozen);
    }

    std::size_t size() const { return layers_.size(); }
    Layer<T> &at(std::size_t i) { return *layers_.at(i); }

private:
    std::vector<LayerPtr<T>> layers_;
};

/// y = body(x) + x.
template <typename T>
class Residual : public Layer<T>
{
public:
    explicit Residual(std::unique_ptr<Sequential<T>> body) : body_(std::move(body)) {}

    Tensor<T> forward(const Tensor<T> &x, Mode mode) override
    {
        Tensor<T> y = body_->forward(x, mode);
        if (y.shape() != x.shape())
            throw std::invalid_argument("Residual: body changes the tensor shape");
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] += x[i];
        return y;
    }

    Tensor<T> backward(const Tensor<T> &grad_out) override
    {
        Tensor<T> g = body_->backward(grad_out);
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] += grad_out[i];
        return g;
    }

    std::string kind() const override { return "residual"; }
    std::vector<Param<T> *> params() override { return body_->params(); }
    std::vector<Buffer<T> *> buffers() override { return body_->buffers(); }
    void set_prefix(const std::string &prefix) override { body_->set_prefix(prefix); }
    void reseed(std::uint64_t seed) override { body_->reseed(seed); }
    void freeze_running_stats(bool frozen) override { body_->freeze_running_stats(frozen); }

    Sequential<T> &body() { return *body_; }

private:
    std::unique_ptr<Sequential<T>> body_;
};

} // namespace chanbench::nn
