#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dragan/data/matrix.hpp"
#include "dragan/nn/ops.hpp"
#include "dragan/nn/optim.hpp"

namespace dragan::classify {

inline constexpr double kProbabilityClamp = 1e-7;

struct LogisticConfig {
    std::size_t steps = 200;
    double learning_rate = 0.5;
    nn::OptimizerKind optimizer = nn::OptimizerKind::sgd;

    /// Per-epoch classifier inside the draGAN loop.
    static LogisticConfig inner() { return {200, 0.5, nn::OptimizerKind::sgd}; }
    /// Classifier trained on (resampled) training folds in the benchmark.
    static LogisticConfig downstream() { return {1000, 0.5, nn::OptimizerKind::sgd}; }
};

struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
    LogisticConfig config;
};

inline std::vector<double> decision_function(const LogisticModel& model, const Matrix& x) {
    if (x.cols() != model.weights.size())
        throw DimensionError("logistic: model has " + std::to_string(model.weights.size()) + " weights, input has " +
                             std::to_string(x.cols()) + " columns");
    std::vector<double> z(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto r = x.row(i);
        double acc = model.bias;
        for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * model.weights[j];
        z[i] = acc;
    }
    return z;
}

/// sigma(Xw + b) per row.
inline std::vector<double> predict_proba(const LogisticModel& model, const Matrix& x) {
    auto z = decision_function(model, x);
    for (auto& v : z) v = nn::detail::sigmoid(v);
    return z;
}

/// Mean negative log-likelihood with probabilities clamped to [1e-7, 1-1e-7].
/// Accepts soft targets in [0,1].
inline double mean_nll(const LogisticModel& model, const Matrix& x, std::span<const double> y) {
    auto p = predict_proba(model, x);
    double loss = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double q = std::clamp(p[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
        loss -= y[i] * std::log(q) + (1.0 - y[i]) * std::log(1.0 - q);
    }
    return loss / static_cast<double>(p.size());
}

/// Gradient of the mean NLL: (mean((p - y) x), mean(p - y)).
inline std::pair<std::vector<double>, double> nll_gradient(const LogisticModel& model, const Matrix& x,
                                                           std::span<const double> y) {
    auto p = predict_proba(model, x);
    std::vector<double> gw(x.cols(), 0.0);
    double gb = 0.0;
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double e = (p[i] - y[i]) * inv_n;
        auto r = x.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) gw[j] += e * r[j];
        gb += e;
    }
    return {std::move(gw), gb};
}

/// Full-batch gradient descent on the mean NLL from zero initialization.
inline LogisticModel train_logreg(const Matrix& x, std::span<const double> y, const LogisticConfig& config = {}) {
    if (x.rows() == 0) throw ContractError("train_logreg: empty training set");
    if (y.size() != x.rows()) throw DimensionError("train_logreg: label count does not match rows");
    for (double v : x.data())
        if (!std::isfinite(v)) throw ContractError("train_logreg: non-finite feature value");
    for (double v : y)
        if (!(v >= 0.0 && v <= 1.0)) throw ContractError("train_logreg: labels must lie in [0,1]");

    LogisticModel model{std::vector<double>(x.cols(), 0.0), 0.0, config};
    nn::OptimizerState opt(config.optimizer, config.learning_rate, {x.cols(), 1});
    std::vector<double> bias_buf(1);
    for (std::size_t s = 0; s < config.steps; ++s) {
        auto [gw, gb] = nll_gradient(model, x, y);
        bias_buf[0] = model.bias;
        const std::span<double> params[] = {model.weights, bias_buf};
        const std::vector<double> gbv{gb};
        const std::span<const double> grads[] = {gw, gbv};
        nn::optimizer_step(params, grads, opt);
        model.bias = bias_buf[0];
    }
    return model;
}

inline LogisticModel train_logreg(const Matrix& x, std::span<const int> y, const LogisticConfig& config = {}) {
    std::vector<double> yd(y.begin(), y.end());
    return train_logreg(x, yd, config);
}

}  // namespace dragan::classify
