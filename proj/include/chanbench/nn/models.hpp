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

#include <chanbench/core/json_reader.hpp>
#include <chanbench/core/rng.hpp>
#include <chanbench/nn/gru.hpp>
#include <chanbench/nn/layers.hpp>

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace chanbench::nn {

/// Convolutional autoencoder for angle-delay CSI compression.
struct CsiNetPlusConfig
{
    int n_delay = 16;
    int n_angle = 32;
    int code_dim = 32;
    int refine_blocks = 6;
    int refine_width_1 = 8;
    int refine_width_2 = 16;
    double leaky_slope = 0.3;

    int sample_size() const { return 2 * n_delay * n_angle; }

    void validate() const
    {
        if (n_delay < 1 || n_angle < 1 || code_dim < 1 || refine_blocks < 0 || refine_width_1 < 1 || refine_width_2 < 1)
            throw std::invalid_argument("CsiNetPlusConfig: dimensions must be positive");
    }
};

/// Two-layer recurrent predictor with a last-step affine head.
struct GruPredictorConfig
{
    int n_features = 4;
    int hidden = 64;
    int layers = 2;
    double dropout = 0.5;

    void validate() const
    {
        if (n_features < 1 || hidden < 1 || layers < 1)
            throw std::invalid_argument("GruPredictorConfig: dimensions must be positive");
        if (!(dropout >= 0.0 && dropout < 1.0))
            throw std::invalid_argument("GruPredictorConfig: dropout must lie in [0, 1)");
    }
};

inline json to_json(const CsiNetPlusConfig &c)
{
    return {{"n_delay", c.n_delay},           {"n_angle", c.n_angle},
            {"code_dim", c.code_dim},         {"refine_blocks", c.refine_blocks},
            {"refine_width_1", c.refine_width_1}, {"refine_width_2", c.refine_width_2},
            {"leaky_slope", c.leaky_slope}};
}

inline CsiNetPlusConfig csinet_config_from_json(const json &j, const std::string &path = "")
{
    JsonReader r(j, path);
    CsiNetPlusConfig c;
    c.n_delay = r.optional<int>("n_delay", c.n_delay);
    c.n_angle = r.optional<int>("n_angle", c.n_angle);
    c.code_dim = r.optional<int>("code_dim", c.code_dim);
    c.refine_blocks = r.optional<int>("refine_blocks", c.refine_blocks);
    c.refine_width_1 = r.optional<int>("refine_width_1", c.refine_width_1);
    c.refine_width_2 = r.optional<int>("refine_width_2", c.refine_width_2);
    c.leaky_slope = r.optional<double>("leaky_slope", c.leaky_slope);
    r.finish();
    c.validate();
    return c;
}

inline json to_json(const GruPredictorConfig &c)
{
    return {{"n_features", c.n_features}, {"hidden", c.hidden}, {"layers", c.layers}, {"dropout", c.dropout}};
}

inline GruPredictorConfig gru_config_from_json(const json &j, const std::string &path = "")
{
    JsonReader r(j, path);
    GruPredictorConfig c;
    c.n_features = r.optional<int>("n_features", c.n_features);
    c.hidden = r.optional<int>("hidden", c.hidden);
    c.layers = r.optional<int>("layers", c.layers);
    c.dropout = r.optional<double>("dropout", c.dropout);
    r.finish();
    c.validate();
    return c;
}

inline constexpr const char *csinet_arch = "csinet_plus";
inline constexpr const char *gru_arch = "gru_predictor";

/// A network together with the metadata needed to rebuild it.
template <typename T>
class Model
{
public:
    using State = std::vector<Tensor<T>>;

    Model(std::string arch, json config, std::uint64_t seed, std::unique_ptr<Sequential<T>> net,
          std::vector<int> input_shape, std::vector<int> output_shape)
        : arch_(std::move(arch)), config_(std::move(config)), seed_(seed), net_(std::move(net)),
          input_shape_(std::move(input_shape)), output_shape_(std::move(output_shape))
    {
        net_->set_prefix("");
        net_->reseed(derive_seed(seed_, 0x5eed));
    }

    Tensor<T> forward(const Tensor<T> &x, Mode mode)
    {
        check_input(x);
        return net_->forward(x, mode);
    }

    Tensor<T> backward(const Tensor<T> &g) { return net_->backward(g); }

    std::vector<Param<T> *> params() { return net_->params(); }
    std::vector<Buffer<T> *> buffers() { return net_->buffers(); }
    void reseed(std::uint64_t seed) { net_->reseed(seed); }
    void freeze_running_stats(bool frozen) { net_->freeze_running_stats(frozen); }

    std::size_t parameter_count()
    {
        std::size_t n = 0;
        for (auto *p : params())
            n += p->value.size();
        return n;
    }

    /// Parameters followed by buffers, in registration order.
    State state()
    {
        State s;
        for (auto *p : params())
            s.push_back(p->value);
        for (auto *b : buffers())
            s.push_back(b->value);
        return s;
    }

    void load_state(const State &s)
    {
        auto ps = params();
        auto bs = buffers();
        if (s.size() != ps.size() + bs.size())
            throw std::invalid_argument("Model::load_state: tensor count mismatch");
        for (std::size_t i = 0; i < ps.size(); ++i)
        {
            if (s[i].shape() != ps[i]->value.shape())
                throw std::invalid_argument("Model::load_state: shape mismatch for " + ps[i]->name);
            ps[i]->value = s[i];
        }
        for (std::size_t i = 0; i < bs.size(); ++i)
        {
            if (s[ps.size() + i].shape() != bs[i]->value.shape())
                throw std::invalid_argument("Model::load_state: shape mismatch for " + bs[i]->name);
            bs[i]->value = s[ps.size() + i];
        }
    }

    const std::string &arch() const { return arch_; }
    const json &config() const { return config_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<int> &input_shape() const { return input_shape_; }
    const std::vector<int> &output_shape() const { return output_shape_; }
    Sequential<T> &net() { return *net_; }

private:
    void check_input(const Tensor<T> &x) const
    {
        if (x.rank() != input_shape_.size() + 1 ||
            !std::equal(input_shape_.begin(), input_shape_.end(), x.shape().begin() + 1))
        {
            std::string want = "(N";
            for (int d : input_shape_)
                want += ", " + std::to_string(d);
            throw std::invalid_argument(arch_ + ": expected input " + want + "), got " + x.shape_string());
        }
    }

    std::string arch_;
    json config_;
    std::uint64_t seed_;
    std::unique_ptr<Sequential<T>> net_;
    std::vector<int> input_shape_, output_shape_;
};

template <typename T>
Model<T> make_csinet_plus(const CsiNetPlusConfig &cfg, std::uint64_t seed)
{
    cfg.validate();
    Rng rng(seed);
    const int d = cfg.n_delay, a = cfg.n_angle, n = cfg.sample_size();
    auto net = std::make_unique<Sequential<T>>();
    // encoder
    for (int i = 0; i < 2; ++i)
    {
        net->template add<Conv2d<T>>(2, 2, 7, rng);
        net->template add<BatchNorm<T>>(2);
        net->template add<LeakyRelu<T>>(cfg.leaky_slope);
    }
    net->template add<Reshape<T>>(std::vector<int>{n});
    net->template add<Dense<T>>(n, cfg.code_dim, rng);
    // decoder
    net->template add<Dense<T>>(cfg.code_dim, n, rng);
    net->template add<Reshape<T>>(std::vector<int>{2, d, a});
    net->template add<Conv2d<T>>(2, 2, 7, rng);
    net->template add<BatchNorm<T>>(2);
    net->template add<Tanh<T>>();
    for (int b = 0; b < cfg.refine_blocks; ++b)
    {
        auto body = std::make_unique<Sequential<T>>();
        body->template add<Conv2d<T>>(2, cfg.refine_width_1, 7, rng);
        body->template add<BatchNorm<T>>(cfg.refine_width_1);
        body->template add<LeakyRelu<T>>(cfg.leaky_slope);
        body->template add<Conv2d<T>>(cfg.refine_width_1, cfg.refine_width_2, 5, rng);
        body->template add<BatchNorm<T>>(cfg.refine_width_2);
        body->template add<LeakyRelu<T>>(cfg.leaky_slope);
        body->template add<Conv2d<T>>(cfg.refine_width_2, 2, 3, rng);
        body->template add<BatchNorm<T>>(2);
        net->template add<Residual<T>>(std::move(body));
        net->template add<LeakyRelu<T>>(cfg.leaky_slope);
    }
    // Unit-norm output rescaled to the norm of a ZMUV snapshot (sqrt of its size).
    net->template add<L2Normalize<T>>();
    net->template add<Scale<T>>(std::sqrt(static_cast<double>(n)));
    return Model<T>(csinet_arch, to_json(cfg), seed, std::move(net), {2, d, a}, {2, d, a});
}

template <typename T>
Model<T> make_gru_predictor(const GruPredictorConfig &cfg, int window_length, std::uint64_t seed)
{
    cfg.validate();
    if (window_length < 1)
        throw std::invalid_argument("make_gru_predictor: window length must be >= 1");
    Rng rng(seed);
    auto net = std::make_unique<Sequential<T>>();
    for (int l = 0; l < cfg.layers; ++l)
    {
        net->template add<Gru<T>>(l == 0 ? cfg.n_features : cfg.hidden, cfg.hidden, rng);
        if (l + 1 < cfg.layers && cfg.dropout > 0.0)
            net->template add<Dropout<T>>(cfg.dropout, derive_seed(seed, l));
    }
    net->template add<LastStep<T>>();
    net->template add<BatchNorm<T>>(cfg.hidden);
    net->template add<Dense<T>>(cfg.hidden, cfg.n_features, rng);
    json j = to_json(cfg);
    j["window_length"] = window_length;
    return Model<T>(gru_arch, j, seed, std::move(net), {window_length, cfg.n_features}, {cfg.n_features});
}

/// Rebuilds a freshly initialized model from its architecture id and config.
template <typename T>
Model<T> build_model(const std::string &arch, const json &config, std::uint64_t seed)
{
    if (arch == csinet_arch)
        return make_csinet_plus<T>(csinet_config_from_json(config), seed);
    if (arch == gru_arch)
    {
        json c = config;
        const int window = c.at("window_length").get<int>();
        c.erase("window_length");
        return make_gru_predictor<T>(gru_config_from_json(c), window, seed);
    }
    throw std::invalid_argument("unknown model architecture '" + arch + "'");
}

} // namespace chanbench::nn
