#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "dragan/nn/ops.hpp"

namespace dragan::nn {

enum class LayerKind { dense, conv1d, batchnorm1d, dropout, activation };

struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    std::size_t in = 0;   // dense in-extent, conv1d in-channels, batchnorm features
    std::size_t out = 0;  // dense out-extent, conv1d out-channels
    std::size_t kernel = 1;
    ActivationKind activation = ActivationKind::none;
    double dropout_rate = 0.0;

    static LayerSpec make_dense(std::size_t in, std::size_t out) { return {LayerKind::dense, in, out}; }
    static LayerSpec make_conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel) {
        return {LayerKind::conv1d, in_channels, out_channels, kernel};
    }
    static LayerSpec make_batchnorm(std::size_t features) { return {LayerKind::batchnorm1d, features, features}; }
    static LayerSpec make_dropout(double rate) { return {LayerKind::dropout, 0, 0, 1, ActivationKind::none, rate}; }
    static LayerSpec make_activation(ActivationKind a) { return {LayerKind::activation, 0, 0, 1, a}; }

    void validate() const {
        switch (kind) {
            case LayerKind::dense:
                if (in < 1 || out < 1) throw ConfigError("dense layer extents must be >= 1");
                break;
            case LayerKind::conv1d:
                if (kernel < 1) throw ConfigError("conv1d kernel width must be >= 1");
                if (kernel % 2 == 0) throw ConfigError("conv1d kernel width must be odd for same padding");
                if (in < 1 || out < 1) throw ConfigError("conv1d channel counts must be >= 1");
                break;
            case LayerKind::batchnorm1d:
                if (in < 1) throw ConfigError("batchnorm feature count must be >= 1");
                break;
            case LayerKind::dropout:
                if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout rate must be in [0,1)");
                break;
            case LayerKind::activation: break;
        }
    }
};

/// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) fill.
inline void init_uniform_fan_in(Tensor& t, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : t.values()) v = rng.uniform(-bound, bound);
}

class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x, Mode mode, Rng& rng) = 0;
    virtual std::vector<Tensor> parameters() { return {}; }
};

class Dense final : public Layer {
public:
    Dense(std::size_t in, std::size_t out, Rng& rng) : weights_({in, out}, true), bias_({out}, true) {
        LayerSpec::make_dense(in, out).validate();
        init_uniform_fan_in(weights_, in, rng);
    }
    Tensor forward(const Tensor& x, Mode, Rng&) override { return dense(x, weights_, bias_); }
    std::vector<Tensor> parameters() override { return {weights_, bias_}; }

    Tensor& weights() { return weights_; }
    Tensor& bias() { return bias_; }

private:
    Tensor weights_, bias_;
};

class Conv1d final : public Layer {
public:
    Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, Rng& rng)
        : kernels_({out_channels, in_channels, kernel}, true), bias_({out_channels}, true) {
        LayerSpec::make_conv1d(in_channels, out_channels, kernel).validate();
        init_uniform_fan_in(kernels_, in_channels * kernel, rng);
    }
    Tensor forward(const Tensor& x, Mode, Rng&) override { return conv1d(x, kernels_, bias_); }
    std::vector<Tensor> parameters() override { return {kernels_, bias_}; }

    Tensor& kernels() { return kernels_; }
    Tensor& bias() { return bias_; }

private:
    Tensor kernels_, bias_;
};

class BatchNorm1d final : public Layer {
public:
    explicit BatchNorm1d(std::size_t features)
        : gamma_({features}, std::vector<double>(features, 1.0), true), beta_({features}, true), stats_(features) {}
    Tensor forward(const Tensor& x, Mode mode, Rng&) override { return batchnorm1d(x, gamma_, beta_, mode, stats_); }
    std::vector<Tensor> parameters() override { return {gamma_, beta_}; }
    const BatchNormStats& stats() const { return stats_; }

private:
    Tensor gamma_, beta_;
    BatchNormStats stats_;
};

class Dropout final : public Layer {
public:
    explicit Dropout(double rate) : rate_(rate) { LayerSpec::make_dropout(rate).validate(); }
    Tensor forward(const Tensor& x, Mode mode, Rng& rng) override { return dropout(x, rate_, mode, rng); }

private:
    double rate_;
};

class Activation final : public Layer {
public:
    explicit Activation(ActivationKind kind) : kind_(kind) {}
    Tensor forward(const Tensor& x, Mode, Rng&) override { return activation(x, kind_); }

private:
    ActivationKind kind_;
};

inline std::unique_ptr<Layer> make_layer(const LayerSpec& spec, Rng& rng) {
    spec.validate();
    switch (spec.kind) {
        case LayerKind::dense: return std::make_unique<Dense>(spec.in, spec.out, rng);
        case LayerKind::conv1d: return std::make_unique<Conv1d>(spec.in, spec.out, spec.kernel, rng);
        case LayerKind::batchnorm1d: return std::make_unique<BatchNorm1d>(spec.in);
        case LayerKind::dropout: return std::make_unique<Dropout>(spec.dropout_rate);
        case LayerKind::activation: return std::make_unique<Activation>(spec.activation);
    }
    throw ConfigError("unknown layer kind");
}

class Sequential {
public:
    Sequential() = default;
    Sequential(const std::vector<LayerSpec>& specs, Rng& rng) {
        for (const auto& s : specs) layers_.push_back(make_layer(s, rng));
    }

    void push_back(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

    Tensor forward(Tensor x, Mode mode, Rng& rng) const {
        for (const auto& l : layers_) x = l->forward(x, mode, rng);
        return x;
    }

    std::vector<Tensor> parameters() const {
        std::vector<Tensor> out;
        for (const auto& l : layers_)
            for (auto& p : l->parameters()) out.push_back(p);
        return out;
    }

    std::size_t size() const { return layers_.size(); }
    Layer& operator[](std::size_t i) { return *layers_[i]; }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

inline void zero_grad(std::span<Tensor> params) {
    for (auto& p : params) p.zero_grad();
}

inline void set_requires_grad(std::span<Tensor> params, bool on) {
    for (auto& p : params) p.set_requires_grad(on);
}

inline std::string to_string(ActivationKind a) {
    switch (a) {
        case ActivationKind::relu: return "relu";
        case ActivationKind::leaky_relu: return "leaky-relu";
        case ActivationKind::sigmoid: return "sigmoid";
        case ActivationKind::none: break;
    }
    return "none";
}

inline ActivationKind parse_activation(const std::string& s) {
    if (s == "relu") return ActivationKind::relu;
    if (s == "leaky-relu" || s == "leakyrelu" || s == "leaky_relu") return ActivationKind::leaky_relu;
    if (s == "sigmoid") return ActivationKind::sigmoid;
    if (s == "none") return ActivationKind::none;
    throw ConfigError("unknown activation '" + s + "'");
}

}  // namespace dragan::nn
