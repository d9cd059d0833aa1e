#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dragan/nn/tensor.hpp"
#include "dragan/rng.hpp"

namespace dragan::nn {

enum class ActivationKind { none, relu, leaky_relu, sigmoid };
enum class Mode { train, eval };

inline constexpr double kLeakySlope = 0.01;
inline constexpr double kBatchNormVarianceFloor = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

namespace detail {

inline void require_rank(const Tensor& t, std::size_t rank, const char* op) {
    if (t.rank() != rank)
        throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                             shape_string(t.shape()));
}

inline double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace detail

/// out[i,j] = sum_k input[i,k] * weights[k,j] + bias[j]
inline Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    detail::require_rank(input, 2, "dense");
    detail::require_rank(weights, 2, "dense");
    const std::size_t n = input.dim(0), din = input.dim(1), dout = weights.dim(1);
    if (weights.dim(0) != din || bias.numel() != dout)
        throw DimensionError("dense: input " + shape_string(input.shape()) + ", weights " +
                             shape_string(weights.shape()) + ", bias " + shape_string(bias.shape()));

    std::vector<double> out(n * dout);
    const double* x = input.values().data();
    const double* w = weights.values().data();
    const double* b = bias.values().data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dout; ++j) out[i * dout + j] = b[j];
    // k-outer so each weight row is read once for the whole batch
    for (std::size_t k = 0; k < din; ++k) {
        const double* wk = w + k * dout;
        for (std::size_t i = 0; i < n; ++i) {
            const double xik = x[i * din + k];
            if (xik == 0.0) continue;
            double* o = out.data() + i * dout;
            for (std::size_t j = 0; j < dout; ++j) o[j] += xik * wk[j];
        }
    }

    return Tensor::make_result({n, dout}, std::move(out), {input, weights, bias}, [n, din, dout](detail::Node& self) {
        auto& in = *self.parents[0];
        auto& wt = *self.parents[1];
        auto& bs = *self.parents[2];
        const double* g = self.grad.data();
        if (bs.requires_grad) {
            auto& gb = bs.ensure_grad();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < dout; ++j) gb[j] += g[i * dout + j];
        }
        if (wt.requires_grad) {
            auto& gw = wt.ensure_grad();
            for (std::size_t k = 0; k < din; ++k) {
                double* gwk = gw.data() + k * dout;
                for (std::size_t i = 0; i < n; ++i) {
                    const double xik = in.value[i * din + k];
                    if (xik == 0.0) continue;
                    const double* gi = g + i * dout;
                    for (std::size_t j = 0; j < dout; ++j) gwk[j] += xik * gi[j];
                }
            }
        }
        if (in.requires_grad) {
            auto& gx = in.ensure_grad();
            for (std::size_t k = 0; k < din; ++k) {
                const double* wk = wt.value.data() + k * dout;
                for (std::size_t i = 0; i < n; ++i) {
                    const double* gi = g + i * dout;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < dout; ++j) acc += wk[j] * gi[j];
                    gx[i * din + k] += acc;
                }
            }
        }
    });
}

/// Stride-1 cross-correlation along the length axis with zero "same" padding.
/// input [c_in, L], kernels [c_out, c_in, K] (K odd), bias [c_out] -> [c_out, L].
inline Tensor conv1d(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
    detail::require_rank(input, 2, "conv1d");
    detail::require_rank(kernels, 3, "conv1d");
    const std::size_t cin = input.dim(0), len = input.dim(1);
    const std::size_t cout = kernels.dim(0), width = kernels.dim(2);
    if (width % 2 == 0) throw ConfigError("conv1d: kernel width must be odd, got " + std::to_string(width));
    if (kernels.dim(1) != cin || bias.numel() != cout)
        throw DimensionError("conv1d: input " + shape_string(input.shape()) + ", kernels " +
                             shape_string(kernels.shape()) + ", bias " + shape_string(bias.shape()));
    const long half = static_cast<long>(width / 2);
    const long L = static_cast<long>(len);

    std::vector<double> out(cout * len);
    const double* x = input.values().data();
    const double* kw = kernels.values().data();
    for (std::size_t o = 0; o < cout; ++o) {
        double* row = out.data() + o * len;
        for (std::size_t t = 0; t < len; ++t) row[t] = bias[o];
        for (std::size_t c = 0; c < cin; ++c) {
            const double* xc = x + c * len;
            for (std::size_t k = 0; k < width; ++k) {
                const double wv = kw[(o * cin + c) * width + k];
                const long shift = static_cast<long>(k) - half;
                const long t0 = std::max(0L, -shift), t1 = std::min(L, L - shift);
                for (long t = t0; t < t1; ++t) row[t] += wv * xc[t + shift];
            }
        }
    }

    return Tensor::make_result(
        {cout, len}, std::move(out), {input, kernels, bias}, [cin, cout, width, len, half, L](detail::Node& self) {
            auto& in = *self.parents[0];
            auto& kn = *self.parents[1];
            auto& bs = *self.parents[2];
            const double* g = self.grad.data();
            if (bs.requires_grad) {
                auto& gb = bs.ensure_grad();
                for (std::size_t o = 0; o < cout; ++o)
                    for (std::size_t t = 0; t < len; ++t) gb[o] += g[o * len + t];
            }
            double* gk = kn.requires_grad ? kn.ensure_grad().data() : nullptr;
            double* gx = in.requires_grad ? in.ensure_grad().data() : nullptr;
            for (std::size_t o = 0; o < cout; ++o) {
                const double* go = g + o * len;
                for (std::size_t c = 0; c < cin; ++c) {
                    const double* xc = in.value.data() + c * len;
                    for (std::size_t k = 0; k < width; ++k) {
                        const std::size_t widx = (o * cin + c) * width + k;
                        const long shift = static_cast<long>(k) - half;
                        const long t0 = std::max(0L, -shift), t1 = std::min(L, L - shift);
                        if (gk) {
                            double acc = 0.0;
                            for (long t = t0; t < t1; ++t) acc += go[t] * xc[t + shift];
                            gk[widx] += acc;
                        }
                        if (gx) {
                            const double wv = kn.value[widx];
                            double* gxc = gx + c * len;
                            for (long t = t0; t < t1; ++t) gxc[t + shift] += wv * go[t];
                        }
                    }
                }
            }
        });
}

inline Tensor relu(const Tensor& x) {
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    return Tensor::make_result(x.shape(), std::move(out), {x}, [](detail::Node& self) {
        auto& p = *self.parents[0];
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i)
            if (p.value[i] > 0.0) g[i] += self.grad[i];
    });
}

inline Tensor leaky_relu(const Tensor& x, double slope = kLeakySlope) {
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : slope * x[i];
    return Tensor::make_result(x.shape(), std::move(out), {x}, [slope](detail::Node& self) {
        auto& p = *self.parents[0];
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += (p.value[i] > 0.0 ? 1.0 : slope) * self.grad[i];
    });
}

inline Tensor sigmoid(const Tensor& x) {
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = detail::sigmoid(x[i]);
    return Tensor::make_result(x.shape(), std::move(out), {x}, [](detail::Node& self) {
        auto& g = self.parents[0]->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double s = self.value[i];
            g[i] += s * (1.0 - s) * self.grad[i];
        }
    });
}

inline Tensor activation(const Tensor& x, ActivationKind kind) {
    switch (kind) {
        case ActivationKind::relu: return relu(x);
        case ActivationKind::leaky_relu: return leaky_relu(x);
        case ActivationKind::sigmoid: return sigmoid(x);
        case ActivationKind::none: break;
    }
    return x;
}

struct BatchNormStats {
    std::vector<double> running_mean;
    std::vector<double> running_var;

    explicit BatchNormStats(std::size_t features = 0) : running_mean(features, 0.0), running_var(features, 1.0) {}
};

/// Per-column normalization of input [n, f]. Train mode uses batch moments
/// (biased variance, floored) and updates the running stats; eval mode uses
/// the running stats.
inline Tensor batchnorm1d(const Tensor& input, const Tensor& gamma, const Tensor& beta, Mode mode,
                          BatchNormStats& stats) {
    detail::require_rank(input, 2, "batchnorm1d");
    const std::size_t n = input.dim(0), f = input.dim(1);
    if (gamma.numel() != f || beta.numel() != f || stats.running_mean.size() != f)
        throw DimensionError("batchnorm1d: feature count mismatch for input " + shape_string(input.shape()));
    if (mode == Mode::train && n < 2)
        throw DegenerateBatchError("batchnorm1d: train mode needs a batch of at least 2, got " + std::to_string(n));

    std::vector<double> mean(f, 0.0), scale(f), xhat(n * f);
    std::vector<char> floored(f, 0);
    if (mode == Mode::train) {
        std::vector<double> var(f, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < f; ++j) mean[j] += input[i * f + j];
        for (std::size_t j = 0; j < f; ++j) mean[j] /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < f; ++j) {
                const double d = input[i * f + j] - mean[j];
                var[j] += d * d;
            }
        for (std::size_t j = 0; j < f; ++j) {
            var[j] /= static_cast<double>(n);
            floored[j] = var[j] < kBatchNormVarianceFloor;
            scale[j] = 1.0 / std::sqrt(std::max(var[j], kBatchNormVarianceFloor));
            stats.running_mean[j] = (1.0 - kBatchNormMomentum) * stats.running_mean[j] + kBatchNormMomentum * mean[j];
            stats.running_var[j] = (1.0 - kBatchNormMomentum) * stats.running_var[j] + kBatchNormMomentum * var[j];
        }
    } else {
        for (std::size_t j = 0; j < f; ++j) {
            mean[j] = stats.running_mean[j];
            scale[j] = 1.0 / std::sqrt(std::max(stats.running_var[j], kBatchNormVarianceFloor));
        }
    }

    std::vector<double> out(n * f);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < f; ++j) {
            const double h = (input[i * f + j] - mean[j]) * scale[j];
            xhat[i * f + j] = h;
            out[i * f + j] = gamma[j] * h + beta[j];
        }

    const bool batch_stats = mode == Mode::train;
    return Tensor::make_result(
        {n, f}, std::move(out), {input, gamma, beta},
        [n, f, batch_stats, scale = std::move(scale), xhat = std::move(xhat),
         floored = std::move(floored)](detail::Node& self) {
            auto& in = *self.parents[0];
            auto& ga = *self.parents[1];
            auto& be = *self.parents[2];
            const double* g = self.grad.data();
            if (be.requires_grad) {
                auto& gb = be.ensure_grad();
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < f; ++j) gb[j] += g[i * f + j];
            }
            if (ga.requires_grad) {
                auto& gg = ga.ensure_grad();
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < f; ++j) gg[j] += g[i * f + j] * xhat[i * f + j];
            }
            if (!in.requires_grad) return;
            auto& gx = in.ensure_grad();
            for (std::size_t j = 0; j < f; ++j) {
                if (!batch_stats) {
                    for (std::size_t i = 0; i < n; ++i) gx[i * f + j] += g[i * f + j] * ga.value[j] * scale[j];
                    continue;
                }
                double mean_d = 0.0, mean_dh = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = g[i * f + j] * ga.value[j];
                    mean_d += d;
                    mean_dh += d * xhat[i * f + j];
                }
                mean_d /= static_cast<double>(n);
                mean_dh /= static_cast<double>(n);
                // A floored variance is a constant, so only the mean carries gradient.
                if (floored[j]) mean_dh = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = g[i * f + j] * ga.value[j];
                    gx[i * f + j] += scale[j] * (d - mean_d - xhat[i * f + j] * mean_dh);
                }
            }
        });
}

/// Inverted dropout: in train mode each element is zeroed with probability
/// `rate` and survivors are scaled by 1/(1-rate). Eval mode is the identity.
inline Tensor dropout(const Tensor& x, double rate, Mode mode, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout: rate must be in [0,1), got " + std::to_string(rate));
    if (mode == Mode::eval || rate == 0.0) return x;
    const double keep_scale = 1.0 / (1.0 - rate);
    std::vector<double> mask(x.numel());
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        mask[i] = rng.uniform() < rate ? 0.0 : keep_scale;
        out[i] = x[i] * mask[i];
    }
    return Tensor::make_result(x.shape(), std::move(out), {x}, [mask = std::move(mask)](detail::Node& self) {
        auto& g = self.parents[0]->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += mask[i] * self.grad[i];
    });
}

/// [r, c] -> [c, r]
inline Tensor transpose(const Tensor& x) {
    detail::require_rank(x, 2, "transpose");
    const std::size_t r = x.dim(0), c = x.dim(1);
    std::vector<double> out(r * c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[j * r + i] = x[i * c + j];
    return Tensor::make_result({c, r}, std::move(out), {x}, [r, c](detail::Node& self) {
        auto& g = self.parents[0]->ensure_grad();
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) g[i * c + j] += self.grad[j * r + i];
    });
}

inline Tensor flatten(const Tensor& x) { return x.reshaped({1, x.numel()}); }

inline Tensor add(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw DimensionError("add: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
    return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
        for (auto& p : self.parents) {
            if (!p->requires_grad) continue;
            auto& g = p->ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
    });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw DimensionError("mul: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
    return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad) {
            auto& g = pa.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += pb.value[i] * self.grad[i];
        }
        if (pb.requires_grad) {
            auto& g = pb.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += pa.value[i] * self.grad[i];
        }
    });
}

inline Tensor square(const Tensor& x) {
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * x[i];
    return Tensor::make_result(x.shape(), std::move(out), {x}, [](detail::Node& self) {
        auto& p = *self.parents[0];
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * p.value[i] * self.grad[i];
    });
}

/// Elementwise a*x + b.
inline Tensor affine(const Tensor& x, double a, double b) {
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x[i] + b;
    return Tensor::make_result(x.shape(), std::move(out), {x}, [a](detail::Node& self) {
        auto& g = self.parents[0]->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += a * self.grad[i];
    });
}

inline Tensor sum(const Tensor& x) {
    double s = 0.0;
    for (double v : x.values()) s += v;
    return Tensor::make_result({1}, {s}, {x}, [](detail::Node& self) {
        auto& g = self.parents[0]->ensure_grad();
        for (auto& gi : g) gi += self.grad[0];
    });
}

inline Tensor mean(const Tensor& x) { return affine(sum(x), 1.0 / static_cast<double>(x.numel()), 0.0); }

/// Mean squared error between same-shaped prediction and constant target.
inline Tensor mse(const Tensor& prediction, std::span<const double> target) {
    if (target.size() != prediction.numel())
        throw DimensionError("mse: " + std::to_string(target.size()) + " targets for " +
                             shape_string(prediction.shape()));
    Tensor t(prediction.shape(), std::vector<double>(target.begin(), target.end()));
    return mean(square(add(prediction, affine(t, -1.0, 0.0))));
}

}  // namespace dragan::nn
