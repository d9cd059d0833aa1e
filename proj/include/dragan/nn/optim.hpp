#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dragan/nn/tensor.hpp"

namespace dragan::nn {

enum class OptimizerKind { sgd, adam, rmsprop };

inline std::string to_string(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::sgd: return "sgd";
        case OptimizerKind::adam: return "adam";
        case OptimizerKind::rmsprop: return "rmsprop";
    }
    return "sgd";
}

inline OptimizerKind parse_optimizer(const std::string& s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adam") return OptimizerKind::adam;
    if (s == "rmsprop") return OptimizerKind::rmsprop;
    throw ConfigError("unknown optimizer '" + s + "'");
}

/// Optimizer hyperparameters plus per-parameter moment buffers.
///
/// Adam keeps first/second moments with bias correction (beta1 0.9,
/// beta2 0.999). RMSprop keeps a decaying mean of squared gradients
/// (decay 0.99) without bias correction. Both use eps 1e-8 outside the
/// square root.
struct OptimizerState {
    OptimizerKind kind = OptimizerKind::sgd;
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double decay = 0.99;
    double eps = 1e-8;
    std::size_t step_count = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;

    OptimizerState() = default;
    OptimizerState(OptimizerKind kind, double learning_rate, const std::vector<std::size_t>& sizes)
        : kind(kind), learning_rate(learning_rate) {
        if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
        for (auto n : sizes) {
            first_moment.emplace_back(kind == OptimizerKind::adam ? n : 0, 0.0);
            second_moment.emplace_back(kind == OptimizerKind::sgd ? 0 : n, 0.0);
        }
    }

    static OptimizerState for_parameters(OptimizerKind kind, double learning_rate, std::span<const Tensor> params) {
        std::vector<std::size_t> sizes;
        for (const auto& p : params) sizes.push_back(p.numel());
        return OptimizerState(kind, learning_rate, sizes);
    }
};

namespace detail {

inline void update_slot(std::span<double> param, std::span<const double> grad, OptimizerState& s, std::size_t slot) {
    if (param.size() != grad.size()) throw DimensionError("optimizer: parameter/gradient size mismatch");
    const double lr = s.learning_rate;
    switch (s.kind) {
        case OptimizerKind::sgd:
            for (std::size_t i = 0; i < param.size(); ++i) param[i] -= lr * grad[i];
            break;
        case OptimizerKind::adam: {
            auto& m = s.first_moment.at(slot);
            auto& v = s.second_moment.at(slot);
            if (m.size() != param.size()) throw DimensionError("optimizer: state not sized for parameter");
            const double t = static_cast<double>(s.step_count);
            const double c1 = 1.0 - std::pow(s.beta1, t);
            const double c2 = 1.0 - std::pow(s.beta2, t);
            for (std::size_t i = 0; i < param.size(); ++i) {
                m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * grad[i];
                v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
                param[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + s.eps);
            }
            break;
        }
        case OptimizerKind::rmsprop: {
            auto& v = s.second_moment.at(slot);
            if (v.size() != param.size()) throw DimensionError("optimizer: state not sized for parameter");
            for (std::size_t i = 0; i < param.size(); ++i) {
                v[i] = s.decay * v[i] + (1.0 - s.decay) * grad[i] * grad[i];
                param[i] -= lr * grad[i] / (std::sqrt(v[i]) + s.eps);
            }
            break;
        }
    }
}

}  // namespace detail

/// One update over raw buffers: `params[i]` is moved along `grads[i]`.
inline void optimizer_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
                           OptimizerState& state) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size())
        throw DimensionError("optimizer: state initialized for a different parameter list");
    ++state.step_count;
    for (std::size_t i = 0; i < params.size(); ++i) detail::update_slot(params[i], grads[i], state, i);
}

/// One update of every tensor from its accumulated gradient. Tensors that
/// never received a gradient are treated as having a zero gradient.
inline void optimizer_step(std::span<Tensor> params, OptimizerState& state) {
    if (params.size() != state.first_moment.size())
        throw DimensionError("optimizer: state initialized for a different parameter list");
    ++state.step_count;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto g = params[i].grad();
        detail::update_slot(params[i].values(), g, state, i);
    }
}

}  // namespace dragan::nn
