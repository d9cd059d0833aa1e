#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dragan/data/dataset.hpp"
#include "dragan/nn/tensor.hpp"
#include "dragan/rng.hpp"

namespace testing_support {

using dragan::nn::Tensor;

struct GradCheck {
    std::size_t checked = 0;
    std::size_t failed = 0;
    double worst_relative = 0.0;
    std::string first_failure;
};

/// Central-difference check of `samples` randomly chosen entries across
/// `params` against the gradients from backward(). An entry passes when the
/// relative error is within `tol` or both values are below `abs_floor`.
inline GradCheck check_gradients(const std::function<Tensor()>& loss_fn, std::vector<Tensor> params,
                                 std::size_t samples, dragan::Rng& rng, double tol = 1e-3, double step = 1e-6,
                                 double abs_floor = 1e-8) {
    for (auto& p : params) p.zero_grad();
    dragan::nn::backward(loss_fn());
    std::vector<std::vector<double>> analytic;
    for (auto& p : params) {
        auto g = p.grad();
        analytic.emplace_back(g.begin(), g.end());
    }
    std::size_t total = 0;
    for (auto& p : params) total += p.numel();

    GradCheck out;
    for (std::size_t s = 0; s < samples; ++s) {
        std::size_t flat = rng.index(total), t = 0;
        while (flat >= params[t].numel()) flat -= params[t++].numel();
        double& v = params[t][flat];
        const double saved = v;
        v = saved + step;
        const double up = loss_fn().item();
        v = saved - step;
        const double down = loss_fn().item();
        v = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double a = analytic[t][flat];
        const double diff = std::abs(a - numeric);
        const double scale = std::max(std::abs(a), std::abs(numeric));
        const double rel = scale > 0.0 ? diff / scale : 0.0;
        ++out.checked;
        if (diff > abs_floor && rel > tol) {
            if (out.failed == 0)
                out.first_failure = "tensor " + std::to_string(t) + " index " + std::to_string(flat) +
                                    ": analytic " + std::to_string(a) + " numeric " + std::to_string(numeric);
            ++out.failed;
        }
        if (diff > abs_floor) out.worst_relative = std::max(out.worst_relative, rel);
    }
    return out;
}

inline Tensor random_tensor(dragan::nn::Shape shape, dragan::Rng& rng, bool requires_grad = true, double lo = -1.0,
                            double hi = 1.0) {
    Tensor t(std::move(shape), requires_grad);
    for (auto& v : t.values()) v = rng.uniform(lo, hi);
    return t;
}

/// Two Gaussian blobs in `d` dimensions: `n_pos` minority rows around
/// +shift, the rest around 0.
inline dragan::Dataset two_gaussians(std::size_t n, std::size_t n_pos, std::size_t d, double shift, std::uint64_t seed) {
    dragan::Rng rng(seed);
    dragan::Dataset ds;
    ds.name = "two_gaussians";
    ds.features = dragan::Matrix(0, d);
    std::vector<double> row(d);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = i < n_pos ? 1 : 0;
        for (auto& v : row) v = rng.normal() + (y ? shift : 0.0);
        ds.append(row, y);
    }
    return ds;
}

}  // namespace testing_support
