#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dragan/data/csv.hpp"
#include "dragan/nn/layers.hpp"
#include "dragan/nn/optim.hpp"

namespace dragan::gan {

enum class ScoreMetric { auc, f1, g };

inline std::string to_string(ScoreMetric m) {
    switch (m) {
        case ScoreMetric::auc: return "auc";
        case ScoreMetric::f1: return "f1";
        case ScoreMetric::g: return "g";
    }
    return "auc";
}

inline ScoreMetric parse_metric(const std::string& s) {
    if (s == "auc") return ScoreMetric::auc;
    if (s == "f1") return ScoreMetric::f1;
    if (s == "g" || s == "g-score" || s == "gmean") return ScoreMetric::g;
    throw ConfigError("unknown metric '" + s + "'");
}

struct DraganConfig {
    std::size_t z_size = 512;
    double gen_lr = 0.000266;
    nn::OptimizerKind gen_optimizer = nn::OptimizerKind::rmsprop;
    nn::ActivationKind gen_activation = nn::ActivationKind::sigmoid;
    bool gen_batchnorm = false;
    bool gen_dropout = true;
    double gen_dropout_rate = 0.5;
    std::size_t gen_channels = 8;
    std::size_t gen_kernel = 3;

    double critic_lr = 0.036284;
    std::size_t critic_epochs = 2;  // minibatch steps per epoch
    nn::OptimizerKind critic_optimizer = nn::OptimizerKind::adam;
    std::vector<std::size_t> critic_layers{64, 128, 64};
    std::vector<nn::ActivationKind> critic_activations{nn::ActivationKind::relu, nn::ActivationKind::relu,
                                                       nn::ActivationKind::leaky_relu};
    std::vector<bool> critic_batchnorm{true, false};
    std::vector<bool> critic_dropout{false, true};
    double critic_dropout_rate = 0.5;

    double sample_factor = 1.793469;
    std::size_t total_epochs = 1750;
    std::size_t critic_batch_size = 16;
    std::size_t max_memory_factor = 124;
    std::size_t patience = 921;
    bool redraw_noise = true;
    bool round_inner_labels = false;  // inner classifier on rounded instead of soft labels
    ScoreMetric metric = ScoreMetric::auc;
    std::uint64_t seed = 0;

    std::size_t memory_capacity() const { return max_memory_factor * critic_batch_size; }

    std::size_t batch_rows(std::size_t n_train) const {
        return static_cast<std::size_t>(std::llround(sample_factor * static_cast<double>(n_train)));
    }

    void validate() const {
        if (z_size < 1) throw ConfigError("z-size must be >= 1");
        if (!(gen_lr > 0.0) || !(critic_lr > 0.0)) throw ConfigError("learning rates must be positive");
        if (gen_activation != nn::ActivationKind::sigmoid)
            throw ConfigError("gen-activation must be sigmoid: batch features and soft labels live in (0,1)");
        if (!(gen_dropout_rate >= 0.0 && gen_dropout_rate < 1.0)) throw ConfigError("gen-dropout rate must be in [0,1)");
        if (!(critic_dropout_rate >= 0.0 && critic_dropout_rate < 1.0))
            throw ConfigError("critic-dropout rate must be in [0,1)");
        if (gen_channels < 1) throw ConfigError("gen-channels must be >= 1");
        if (gen_kernel % 2 == 0) throw ConfigError("gen-kernel must be odd");
        if (critic_layers.empty()) throw ConfigError("critic-layers must not be empty");
        if (critic_activations.size() != critic_layers.size())
            throw ConfigError("critic-activations needs one entry per critic layer");
        if (critic_batchnorm.size() > critic_layers.size() || critic_dropout.size() > critic_layers.size())
            throw ConfigError("critic-batchnorm/critic-dropout list longer than critic-layers");
        for (auto w : critic_layers)
            if (w < 1) throw ConfigError("critic layer widths must be >= 1");
        if (!(sample_factor > 0.0)) throw ConfigError("sample-factor must be positive");
        if (total_epochs < 1) throw ConfigError("total-epochs must be >= 1");
        if (patience > total_epochs) throw ConfigError("patience must not exceed total-epochs");
        if (critic_batch_size < 2) throw ConfigError("critic-batch-size must be >= 2 (batchnorm)");
        if (max_memory_factor < 1) throw ConfigError("max-memory-factor must be >= 1");
    }
};

namespace detail {

inline std::string normalize_key(std::string k) {
    for (auto& c : k)
        if (c == '_') c = '-';
    return k;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("'" + key + "': expected on/off, got '" + v + "'");
}

inline double parse_real(const std::string& v, const std::string& key) {
    auto d = dragan::detail::parse_double(v);
    if (!d) throw ConfigError("'" + key + "': expected a number, got '" + v + "'");
    return *d;
}

inline std::size_t parse_count(const std::string& v, const std::string& key) {
    const double d = parse_real(v, key);
    if (d < 0 || d != std::floor(d)) throw ConfigError("'" + key + "': expected a non-negative integer, got '" + v + "'");
    return static_cast<std::size_t>(d);
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::string s = v;
    if (!s.empty() && s.front() == '[') s.erase(0, 1);
    if (!s.empty() && s.back() == ']') s.pop_back();
    std::vector<std::string> out;
    for (auto& item : dragan::detail::split_csv_line(s))
        if (!item.empty()) out.push_back(item);
    return out;
}

}  // namespace detail

/// Applies one key=value setting. Keys use the field names with '-' or '_'.
/// Returns false for keys that are not draGAN settings.
inline bool apply_setting(DraganConfig& c, const std::string& raw_key, const std::string& value) {
    using namespace detail;
    const std::string key = normalize_key(raw_key);
    if (key == "z-size") c.z_size = parse_count(value, key);
    else if (key == "gen-lr") c.gen_lr = parse_real(value, key);
    else if (key == "gen-optimizer") c.gen_optimizer = nn::parse_optimizer(value);
    else if (key == "gen-activation") c.gen_activation = nn::parse_activation(value);
    else if (key == "gen-batchnorm") c.gen_batchnorm = parse_bool(value, key);
    else if (key == "gen-dropout") {
        // "on", "off" or a rate
        if (auto d = dragan::detail::parse_double(value)) {
            c.gen_dropout = *d > 0.0;
            if (*d > 0.0) c.gen_dropout_rate = *d;
        } else {
            c.gen_dropout = parse_bool(value, key);
        }
    } else if (key == "gen-dropout-rate") c.gen_dropout_rate = parse_real(value, key);
    else if (key == "gen-channels") c.gen_channels = parse_count(value, key);
    else if (key == "gen-kernel") c.gen_kernel = parse_count(value, key);
    else if (key == "critic-lr") c.critic_lr = parse_real(value, key);
    else if (key == "critic-epochs" || key == "critic-epochs-per-iter") c.critic_epochs = parse_count(value, key);
    else if (key == "critic-optimizer") c.critic_optimizer = nn::parse_optimizer(value);
    else if (key == "critic-layers") {
        c.critic_layers.clear();
        for (auto& s : split_list(value)) c.critic_layers.push_back(parse_count(s, key));
    } else if (key == "critic-activations") {
        c.critic_activations.clear();
        for (auto& s : split_list(value)) c.critic_activations.push_back(nn::parse_activation(s));
    } else if (key == "critic-batchnorm") {
        c.critic_batchnorm.clear();
        for (auto& s : split_list(value)) c.critic_batchnorm.push_back(parse_bool(s, key));
    } else if (key == "critic-dropout") {
        c.critic_dropout.clear();
        for (auto& s : split_list(value)) c.critic_dropout.push_back(parse_bool(s, key));
    } else if (key == "critic-dropout-rate") c.critic_dropout_rate = parse_real(value, key);
    else if (key == "sample-factor") c.sample_factor = parse_real(value, key);
    else if (key == "total-epochs") c.total_epochs = parse_count(value, key);
    else if (key == "critic-batch-size") c.critic_batch_size = parse_count(value, key);
    else if (key == "max-memory-factor") c.max_memory_factor = parse_count(value, key);
    else if (key == "early-stopping-patience" || key == "patience") c.patience = parse_count(value, key);
    else if (key == "redraw-noise") c.redraw_noise = parse_bool(value, key);
    else if (key == "inner-labels") {
        if (value != "soft" && value != "rounded") throw ConfigError("'inner-labels': expected soft or rounded");
        c.round_inner_labels = value == "rounded";
    }
    else if (key == "metric") c.metric = parse_metric(value);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_count(value, key));
    else return false;
    return true;
}

/// Flat key=value text; '#' starts a comment. Returns the settings in file
/// order so callers can route keys that are not draGAN settings.
inline std::vector<std::pair<std::string, std::string>> read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto t = dragan::detail::trim(line);
        if (t.empty()) continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(lineno) + ": expected key=value", lineno, 0);
        out.emplace_back(dragan::detail::trim(std::string_view(t).substr(0, eq)),
                         dragan::detail::trim(std::string_view(t).substr(eq + 1)));
    }
    return out;
}

inline DraganConfig load_config(const std::filesystem::path& path, DraganConfig base = {}) {
    for (const auto& [k, v] : read_key_values(path))
        if (!apply_setting(base, k, v)) throw ConfigError("unknown config key '" + k + "'");
    base.validate();
    return base;
}

}  // namespace dragan::gan
