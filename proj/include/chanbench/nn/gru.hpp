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

#include <chanbench/nn/init.hpp>
#include <chanbench/nn/layer.hpp>

#include <string>
#include <vector>

namespace chanbench::nn {

/// Single-layer gated recurrent unit over (N, L, in) sequences, returning
/// every hidden state as (N, L, hidden). Gate order and equations:
///   r = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
///   z = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
///   n = tanh(W_in x + b_in + r * (W_hn h + b_hn))
///   h' = (1 - z) * n + z * h,   h_0 = 0
template <typename T>
class Gru : public Layer<T>
{
public:
    Gru(int in, int hidden, Rng &rng)
        : in_(in), h_(hidden), w_ih_("weight_ih", {3 * hidden, in}), w_hh_("weight_hh", {3 * hidden, hidden}),
          b_ih_("bias_ih", {3 * hidden}), b_hh_("bias_hh", {3 * hidden})
    {
        init::fan_in_uniform(w_ih_.value, in, rng);
        for (int g = 0; g < 3; ++g)
            init::orthogonal_block(w_hh_.value, g * hidden, hidden, rng);
        init::fan_in_uniform(b_ih_.value, hidden, rng);
        init::fan_in_uniform(b_hh_.value, hidden, rng);
    }

    Tensor<T> forward(const Tensor<T> &x, Mode) override
    {
        if (x.rank() != 3 || x.dim(2) != in_)
            throw std::invalid_argument("gru: expected (N, L, " + std::to_string(in_) + "), got " + x.shape_string());
        x_ = x;
        const int n = x.dim(0), l = x.dim(1), h3 = 3 * h_;
        using Row = Eigen::Matrix<T, 1, Eigen::Dynamic>;
        const Eigen::Map<const Row> bih(b_ih_.value.data(), h3), bhh(b_hh_.value.data(), h3);

        // Input projections for all steps at once; row index = sample * L + step.
        gi_ = MatrixRM<T>(static_cast<Eigen::Index>(n) * l, h3);
        gi_.noalias() = ConstMapRM<T>(x.data(), n * l, in_) * ConstMapRM<T>(w_ih_.value.data(), h3, in_).transpose();
        gi_.rowwise() += bih;

        h_prev_.assign(l, MatrixRM<T>());
        r_.assign(l, MatrixRM<T>());
        z_.assign(l, MatrixRM<T>());
        c_.assign(l, MatrixRM<T>());
        ghn_.assign(l, MatrixRM<T>());

        Tensor<T> y({n, l, h_});
        MatrixRM<T> h = MatrixRM<T>::Zero(n, h_);
        MatrixRM<T> gh(n, h3), gi_t(n, h3);
        ConstMapRM<T> whh(w_hh_.value.data(), h3, h_);
        for (int t = 0; t < l; ++t)
        {
            for (int s = 0; s < n; ++s)
                gi_t.row(s) = gi_.row(static_cast<Eigen::Index>(s) * l + t);
            gh.noalias() = h * whh.transpose();
            gh.rowwise() += bhh;
            auto sig = [](auto a) { return (T(1) / (T(1) + (-a).exp())).matrix(); };
            MatrixRM<T> r = sig((gi_t.leftCols(h_) + gh.leftCols(h_)).array());
            MatrixRM<T> z = sig((gi_t.middleCols(h_, h_) + gh.middleCols(h_, h_)).array());
            MatrixRM<T> ghn = gh.rightCols(h_);
            MatrixRM<T> cand = (gi_t.rightCols(h_).array() + r.array() * ghn.array()).tanh().matrix();
            h_prev_[t] = h;
            h = ((T(1) - z.array()) * cand.array() + z.array() * h.array()).matrix();
            r_[t] = std::move(r);
            z_[t] = std::move(z);
            c_[t] = std::move(cand);
            ghn_[t] = std::move(ghn);
            for (int s = 0; s < n; ++s)
                Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(y.data() + (static_cast<std::size_t>(s) * l + t) * h_, h_) =
                    h.row(s);
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T> &g) override
    {
        const int n = x_.dim(0), l = x_.dim(1), h3 = 3 * h_;
        ConstMapRM<T> whh(w_hh_.value.data(), h3, h_);
        MatrixRM<T> dgi_all(static_cast<Eigen::Index>(n) * l, h3);
        MatrixRM<T> dh_carry = MatrixRM<T>::Zero(n, h_);
        MatrixRM<T> dgh(n, h3), dgi(n, h3);
        MapRM<T> dwhh(w_hh_.grad.data(), h3, h_);
        Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> dbhh(b_hh_.grad.data(), h3);
        for (int t = l - 1; t >= 0; --t)
        {
            MatrixRM<T> dh = dh_carry;
            for (int s = 0; s < n; ++s)
                dh.row(s) += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(
                    g.data() + (static_cast<std::size_t>(s) * l + t) * h_, h_);
            const auto r = r_[t].array(), z = z_[t].array(), c = c_[t].array();
            const auto dha = dh.array();
            const auto dn_pre = (dha * (T(1) - z) * (T(1) - c * c)).eval();
            const auto dz_pre = (dha * (h_prev_[t].array() - c) * z * (T(1) - z)).eval();
            const auto dr_pre = (dn_pre * ghn_[t].array() * r * (T(1) - r)).eval();
            dgi.leftCols(h_) = dr_pre.matrix();
            dgi.middleCols(h_, h_) = dz_pre.matrix();
            dgi.rightCols(h_) = dn_pre.matrix();
            dgh.leftCols(h_) = dr_pre.matrix();
            dgh.middleCols(h_, h_) = dz_pre.matrix();
            dgh.rightCols(h_) = (dn_pre * r).matrix();
            for (int s = 0; s < n; ++s)
                dgi_all.row(static_cast<Eigen::Index>(s) * l + t) = dgi.row(s);
            dwhh.noalias() += dgh.transpose() * h_prev_[t];
            add_column_sums(dgh, dbhh.data());
            dh_carry = (dha * z).matrix();
            dh_carry.noalias() += dgh * whh;
        }
        MapRM<T>(w_ih_.grad.data(), h3, in_).noalias() += dgi_all.transpose() * ConstMapRM<T>(x_.data(), n * l, in_);
        add_column_sums(dgi_all, b_ih_.grad.data());
        Tensor<T> dx(x_.shape());
        MapRM<T>(dx.data(), n * l, in_).noalias() = dgi_all * ConstMapRM<T>(w_ih_.value.data(), h3, in_);
        return dx;
    }

    std::string kind() const override { return "gru"; }
    std::vector<Param<T> *> params() override { return {&w_ih_, &w_hh_, &b_ih_, &b_hh_}; }
    void set_prefix(const std::string &p) override
    {
        w_ih_.name = p + "weight_ih";
        w_hh_.name = p + "weight_hh";
        b_ih_.name = p + "bias_ih";
        b_hh_.name = p + "bias_hh";
    }

    Param<T> &weight_hh() { return w_hh_; }

private:
    int in_, h_;
    Param<T> w_ih_, w_hh_, b_ih_, b_hh_;
    Tensor<T> x_;
    MatrixRM<T> gi_;
    std::vector<MatrixRM<T>> h_prev_, r_, z_, c_, ghn_;
};

/// (N, L, F) -> (N, F): the final time step.
template <typename T>
class LastStep : public Layer<T>
{
public:
    Tensor<T> forward(const Tensor<T> &x, Mode) override
    {
        if (x.rank() != 3)
            throw std::invalid_argument("last_step: expected (N, L, F), got " + x.shape_string());
        shape_ = x.shape();
        const int n = x.dim(0), l = x.dim(1), f = x.dim(2);
        Tensor<T> y({n, f});
        for (int s = 0; s < n; ++s)
            std::copy_n(x.data() + (static_cast<std::size_t>(s) * l + l - 1) * f, f, y.data() + static_cast<std::size_t>(s) * f);
        return y;
    }

    Tensor<T> backward(const Tensor<T> &g) override
    {
        const int n = shape_[0], l = shape_[1], f = shape_[2];
        Tensor<T> dx(shape_);
        for (int s = 0; s < n; ++s)
            std::copy_n(g.data() + static_cast<std::size_t>(s) * f, f, dx.data() + (static_cast<std::size_t>(s) * l + l - 1) * f);
        return dx;
    }

    std::string kind() const override { return "last_step"; }

private:
    std::vector<int> shape_;
};

} // namespace chanbench::nn
