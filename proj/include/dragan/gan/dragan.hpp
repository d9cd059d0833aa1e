#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "dragan/classify/logistic.hpp"
#include "dragan/data/scaler.hpp"
#include "dragan/gan/config.hpp"
#include "dragan/metrics/metrics.hpp"
#include "dragan/nn/layers.hpp"
#include "dragan/rng.hpp"

namespace dragan::gan {

using nn::Tensor;

/// m rows of d features plus one soft-label column, all in (0,1).
struct GeneratedBatch {
    Matrix features;
    std::vector<double> soft_labels;
    std::optional<double> achieved_score;

    std::size_t rows() const { return soft_labels.size(); }

    /// Row-major [m, d+1] with the label last, as the Generator emits it.
    std::vector<double> flattened() const {
        const std::size_t d = features.cols();
        std::vector<double> out;
        out.reserve(rows() * (d + 1));
        for (std::size_t r = 0; r < rows(); ++r) {
            auto row = features.row(r);
            out.insert(out.end(), row.begin(), row.end());
            out.push_back(soft_labels[r]);
        }
        return out;
    }

    static GeneratedBatch from_output(std::span<const double> values, std::size_t m, std::size_t d) {
        if (values.size() != m * (d + 1)) throw DimensionError("generated batch: size does not match [m, d+1]");
        GeneratedBatch b{Matrix(m, d), std::vector<double>(m), std::nullopt};
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c = 0; c < d; ++c) b.features(r, c) = values[r * (d + 1) + c];
            b.soft_labels[r] = values[r * (d + 1) + d];
        }
        return b;
    }
};

/// noise [1, z] -> dense -> [1, m*h] -> dropout -> reshape [h, m]
/// -> conv1d (h -> d+1, same padding) -> transpose [m, d+1] -> sigmoid.
class Generator {
public:
    Generator(const DraganConfig& config, std::size_t d, std::size_t m, Rng& rng)
        : d_(d), m_(m), channels_(config.gen_channels), dropout_rate_(config.gen_dropout ? config.gen_dropout_rate : 0.0),
          dense_(config.z_size, m * config.gen_channels, rng),
          conv_(config.gen_channels, d + 1, config.gen_kernel, rng) {
        if (d < 1) throw ConfigError("generator: feature count must be >= 1");
        if (m < 2) throw ConfigError("generator: batch must have at least 2 rows");
        if (config.gen_batchnorm) norm_.emplace(d + 1);
    }

    Tensor forward(const Tensor& noise, nn::Mode mode, Rng& rng) {
        if (noise.numel() != dense_.weights().dim(0))
            throw DimensionError("generator: noise length " + std::to_string(noise.numel()) + ", expected " +
                                 std::to_string(dense_.weights().dim(0)));
        Tensor h = nn::dense(noise.reshaped({1, noise.numel()}), dense_.weights(), dense_.bias());
        if (dropout_rate_ > 0.0) h = nn::dropout(h, dropout_rate_, mode, rng);
        Tensor y = nn::transpose(conv_.forward(h.reshaped({channels_, m_}), mode, rng));
        if (norm_) y = norm_->forward(y, mode, rng);
        return nn::sigmoid(y);
    }

    std::vector<Tensor> parameters() {
        std::vector<Tensor> p{dense_.weights(), dense_.bias(), conv_.kernels(), conv_.bias()};
        if (norm_)
            for (auto& t : norm_->parameters()) p.push_back(t);
        return p;
    }

    std::size_t rows() const { return m_; }
    std::size_t dims() const { return d_; }

private:
    std::size_t d_, m_, channels_;
    double dropout_rate_;
    nn::Dense dense_;
    nn::Conv1d conv_;
    std::optional<nn::BatchNorm1d> norm_;
};

/// flatten([m, d+1]) -> hidden layers -> dense 1 -> sigmoid. Input rows are
/// flattened batches, so a forward pass scores several batches at once.
class Critic {
public:
    Critic(const DraganConfig& config, std::size_t d, std::size_t m, Rng& rng) : inputs_(m * (d + 1)) {
        std::vector<nn::LayerSpec> specs;
        std::size_t prev = inputs_;
        for (std::size_t i = 0; i < config.critic_layers.size(); ++i) {
            const std::size_t w = config.critic_layers[i];
            specs.push_back(nn::LayerSpec::make_dense(prev, w));
            specs.push_back(nn::LayerSpec::make_activation(config.critic_activations[i]));
            if (i < config.critic_batchnorm.size() && config.critic_batchnorm[i])
                specs.push_back(nn::LayerSpec::make_batchnorm(w));
            if (i < config.critic_dropout.size() && config.critic_dropout[i])
                specs.push_back(nn::LayerSpec::make_dropout(config.critic_dropout_rate));
            prev = w;
        }
        specs.push_back(nn::LayerSpec::make_dense(prev, 1));
        specs.push_back(nn::LayerSpec::make_activation(nn::ActivationKind::sigmoid));
        net_ = nn::Sequential(specs, rng);
    }

    /// [k, m*(d+1)] -> [k, 1]
    Tensor forward(const Tensor& flat_batches, nn::Mode mode, Rng& rng) const {
        if (flat_batches.rank() != 2 || flat_batches.dim(1) != inputs_)
            throw DimensionError("critic: expected [k, " + std::to_string(inputs_) + "], got " +
                                 nn::shape_string(flat_batches.shape()));
        return net_.forward(flat_batches, mode, rng);
    }

    std::vector<Tensor> parameters() const { return net_.parameters(); }
    std::size_t inputs() const { return inputs_; }

private:
    std::size_t inputs_;
    nn::Sequential net_;
};

inline Generator build_generator(const DraganConfig& config, std::size_t d, std::size_t m, Rng& rng) {
    config.validate();
    return Generator(config, d, m, rng);
}

inline Critic build_critic(const DraganConfig& config, std::size_t d, std::size_t m, Rng& rng) {
    config.validate();
    if (d < 1 || m < 2) throw ConfigError("critic: needs d >= 1 and m >= 2");
    return Critic(config, d, m, rng);
}

/// Bounded store of (flattened batch, achieved score). When full, a
/// uniformly drawn resident entry is evicted before the new one is stored.
class ReplayMemory {
public:
    struct Entry {
        std::vector<double> batch;
        double score;
    };

    explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {
        if (capacity < 1) throw ConfigError("replay memory capacity must be >= 1");
    }

    /// Returns the evicted slot, if any.
    std::optional<std::size_t> push(std::vector<double> batch, double score, Rng& rng) {
        if (entries_.size() < capacity_) {
            entries_.push_back({std::move(batch), score});
            return std::nullopt;
        }
        const std::size_t victim = rng.index(entries_.size());
        entries_[victim] = {std::move(batch), score};
        return victim;
    }

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Entry& operator[](std::size_t i) const { return entries_.at(i); }

private:
    std::size_t capacity_;
    std::vector<Entry> entries_;
};

/// Trains a fresh inner classifier on the batch (soft labels as targets, or
/// labels rounded at 0.5) and scores it on the real training rows.
inline double evaluate_batch(GeneratedBatch& batch, const Dataset& real_train, ScoreMetric metric,
                             const classify::LogisticConfig& inner = classify::LogisticConfig::inner(),
                             bool round_labels = false) {
    if (batch.features.cols() != real_train.dims())
        throw DimensionError("evaluate_batch: batch has " + std::to_string(batch.features.cols()) +
                             " features, real data has " + std::to_string(real_train.dims()));
    std::vector<double> targets = batch.soft_labels;
    if (round_labels)
        for (auto& y : targets) y = y >= 0.5 ? 1.0 : 0.0;
    auto model = classify::train_logreg(batch.features, targets, inner);
    metrics::ScoredPredictions sp{classify::decision_function(model, real_train.features), real_train.labels, {}};
    double score = 0.0;
    if (metric == ScoreMetric::auc) {
        score = metrics::auc(sp);
    } else {
        const double t = metrics::youden_threshold(sp);
        const auto c = metrics::confusion(sp, t);
        score = metric == ScoreMetric::f1 ? metrics::f1(c) : metrics::g_score(c);
    }
    batch.achieved_score = score;
    return score;
}

struct EpochTelemetry {
    std::size_t epoch;
    double achieved_score;
    double critic_loss;  // NaN when memory was too small to train on
    double generator_loss;
    double best_score;
};

struct DraganState {
    Generator generator;
    Critic critic;
    ReplayMemory memory;
    GeneratedBatch best_batch;
    double best_score = -std::numeric_limits<double>::infinity();
    std::size_t epochs_since_improvement = 0;
    std::size_t epoch = 0;
    std::vector<double> score_history;
    std::vector<EpochTelemetry> telemetry;
};

namespace detail {

inline Tensor draw_noise(std::size_t z, Rng& rng) {
    std::vector<double> v(z);
    for (auto& x : v) x = rng.normal();
    return Tensor({1, z}, std::move(v));
}

/// One Critic update on a minibatch drawn uniformly (with replacement) from
/// memory. Returns the minibatch MSE before the update.
inline double critic_step(DraganState& s, std::size_t batch_size, nn::OptimizerState& opt, Rng& rng) {
    const std::size_t k = std::min(batch_size, s.memory.size());
    const std::size_t width = s.critic.inputs();
    std::vector<double> x(k * width);
    std::vector<double> y(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& e = s.memory[rng.index(s.memory.size())];
        std::copy(e.batch.begin(), e.batch.end(), x.begin() + static_cast<long>(i * width));
        y[i] = e.score;
    }
    auto params = s.critic.parameters();
    nn::zero_grad(params);
    Tensor pred = s.critic.forward(Tensor({k, width}, std::move(x)), nn::Mode::train, rng);
    Tensor loss = nn::mse(pred, y);
    nn::backward(loss);
    nn::optimizer_step(params, opt);
    return loss.item();
}

/// One Generator update minimizing (1 - critic(generator(z)))^2 with the
/// Critic frozen and in eval mode.
inline double generator_step(DraganState& s, const Tensor& noise, nn::OptimizerState& opt, Rng& rng) {
    auto gen_params = s.generator.parameters();
    auto critic_params = s.critic.parameters();
    nn::zero_grad(gen_params);
    nn::set_requires_grad(critic_params, false);
    Tensor batch = s.generator.forward(noise, nn::Mode::train, rng);
    Tensor score = s.critic.forward(nn::flatten(batch), nn::Mode::eval, rng);
    Tensor loss = nn::sum(nn::square(nn::affine(score, -1.0, 1.0)));
    nn::backward(loss);
    nn::set_requires_grad(critic_params, true);
    nn::optimizer_step(gen_params, opt);
    return loss.item();
}

}  // namespace detail

/// Per-epoch observer; may be empty.
using EpochCallback = std::function<void(const DraganState&)>;

/// Runs the draGAN loop on min-max scaled training data until total-epochs
/// or until patience epochs pass without a new best score.
inline DraganState train_dragan(const Dataset& real_train, const DraganConfig& config, const EpochCallback& on_epoch = {}) {
    config.validate();
    real_train.validate(true);
    const std::size_t d = real_train.dims();
    const std::size_t m = config.batch_rows(real_train.size());
    if (m < 2) throw ConfigError("train_dragan: sample-factor yields fewer than 2 rows");

    const Rng root(config.seed);
    Rng init = root.split("init");
    Rng noise_rng = root.split("noise");
    Rng gen_rng = root.split("generator");
    Rng critic_rng = root.split("critic");
    Rng memory_rng = root.split("memory");

    Generator generator(config, d, m, init);
    Critic critic(config, d, m, init);
    DraganState s{std::move(generator), std::move(critic), ReplayMemory(config.memory_capacity()), {}, 0.0, 0, 0, {}, {}};
    s.best_score = -std::numeric_limits<double>::infinity();

    auto gen_opt = nn::OptimizerState::for_parameters(config.gen_optimizer, config.gen_lr, s.generator.parameters());
    auto critic_opt =
        nn::OptimizerState::for_parameters(config.critic_optimizer, config.critic_lr, s.critic.parameters());

    Tensor noise = detail::draw_noise(config.z_size, noise_rng);
    for (std::size_t e = 0; e < config.total_epochs; ++e) {
        if (config.redraw_noise && e > 0) noise = detail::draw_noise(config.z_size, noise_rng);

        Tensor out = s.generator.forward(noise, nn::Mode::train, gen_rng);
        auto batch = GeneratedBatch::from_output(out.values(), m, d);
        const double score = evaluate_batch(batch, real_train, config.metric, classify::LogisticConfig::inner(),
                                            config.round_inner_labels);
        s.memory.push(batch.flattened(), score, memory_rng);

        double critic_loss = std::numeric_limits<double>::quiet_NaN();
        if (s.memory.size() >= 2) {
            double total = 0.0;
            for (std::size_t c = 0; c < config.critic_epochs; ++c)
                total += detail::critic_step(s, config.critic_batch_size, critic_opt, critic_rng);
            if (config.critic_epochs > 0) critic_loss = total / static_cast<double>(config.critic_epochs);
        }
        const double gen_loss = detail::generator_step(s, noise, gen_opt, gen_rng);

        s.epoch = e + 1;
        s.score_history.push_back(score);
        if (score > s.best_score) {
            s.best_score = score;
            s.best_batch = std::move(batch);
            s.epochs_since_improvement = 0;
        } else {
            ++s.epochs_since_improvement;
        }
        s.telemetry.push_back({s.epoch, score, critic_loss, gen_loss, s.best_score});
        if (on_epoch) on_epoch(s);
        if (s.epochs_since_improvement >= config.patience) break;
    }
    return s;
}

inline void write_telemetry_csv(std::span<const EpochTelemetry> rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "epoch,achieved_score,critic_loss,generator_loss,best_score\n";
    for (const auto& r : rows)
        out << r.epoch << ',' << dragan::detail::format_double(r.achieved_score) << ','
            << (std::isnan(r.critic_loss) ? std::string("nan") : dragan::detail::format_double(r.critic_loss)) << ','
            << dragan::detail::format_double(r.generator_loss) << ',' << dragan::detail::format_double(r.best_score)
            << '\n';
}

/// Best batch as a dataset in the scaled space: labels rounded at 0.5, an
/// exact half going to the minority class.
inline Dataset best_batch_dataset(const DraganState& state, const Dataset& real_train) {
    Dataset out{real_train.name, state.best_batch.features, {}, real_train.feature_names, real_train.scaling};
    out.labels.reserve(state.best_batch.rows());
    for (double y : state.best_batch.soft_labels) out.labels.push_back(y >= 0.5 ? 1 : 0);
    return out;
}

/// Generated rows only, in original units. Data that already carries a
/// min-max scaling is trained on as-is and the output is mapped back through
/// that scaler; unscaled data is scaled here first.
inline Dataset resample_with_dragan(const Dataset& real_train, const DraganConfig& config,
                                    const EpochCallback& on_epoch = {}) {
    MinMaxScaler scaler;
    Dataset scaled;
    if (const auto* s = std::get_if<MinMaxScaler>(&real_train.scaling)) {
        scaler = *s;
        scaled = real_train;
    } else {
        scaler = fit_minmax(real_train);
        scaled = apply_minmax(scaler, real_train);
    }
    auto state = train_dragan(scaled, config, on_epoch);
    Dataset out = best_batch_dataset(state, scaled);
    out.features = invert_minmax(scaler, out.features);
    out.scaling = Unscaled{};
    return out;
}

}  // namespace dragan::gan
