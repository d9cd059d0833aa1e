#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "dragan/data/matrix.hpp"
#include "dragan/errors.hpp"

namespace dragan {

/// Per-column min/max fitted on a training split. Constant columns map to 0.5.
struct MinMaxScaler {
    std::vector<double> min;
    std::vector<double> max;
};

struct ZScoreScaler {
    std::vector<double> mean;
    std::vector<double> stddev;
};

struct Unscaled {};

using ScalingState = std::variant<Unscaled, MinMaxScaler, ZScoreScaler>;

/// Labeled tabular data with binary targets (1 = minority / positive).
struct Dataset {
    std::string name;
    Matrix features;
    std::vector<int> labels;
    std::vector<std::string> feature_names;
    ScalingState scaling = Unscaled{};

    std::size_t size() const { return labels.size(); }
    std::size_t dims() const { return features.cols(); }

    std::size_t n_positive() const { return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1)); }
    std::size_t n_negative() const { return size() - n_positive(); }

    double minority_fraction() const { return size() ? static_cast<double>(n_positive()) / static_cast<double>(size()) : 0.0; }

    std::vector<std::size_t> indices_of(int label) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label) out.push_back(i);
        return out;
    }

    std::vector<double> labels_as_double() const { return {labels.begin(), labels.end()}; }

    Dataset subset(std::span<const std::size_t> idx) const {
        Dataset out{name, features.select_rows(idx), {}, feature_names, scaling};
        out.labels.reserve(idx.size());
        for (auto i : idx) out.labels.push_back(labels[i]);
        return out;
    }

    void append(std::span<const double> row, int label) {
        features.append_row(row);
        labels.push_back(label);
    }

    void append(const Dataset& other) {
        if (other.dims() != dims()) throw DimensionError("dataset append: column count mismatch");
        for (std::size_t r = 0; r < other.size(); ++r) append(other.features.row(r), other.labels[r]);
    }

    /// Shape, label domain, finiteness. `require_both_classes` adds the
    /// N+ >= 1 and N- >= 1 check.
    void validate(bool require_both_classes = true) const {
        if (features.rows() != labels.size())
            throw DimensionError("dataset '" + name + "': " + std::to_string(features.rows()) + " rows but " +
                                 std::to_string(labels.size()) + " labels");
        if (!feature_names.empty() && feature_names.size() != features.cols())
            throw DimensionError("dataset '" + name + "': feature name count mismatch");
        for (int y : labels)
            if (y != 0 && y != 1) throw LabelError("dataset '" + name + "': labels must be 0 or 1");
        for (double v : features.data())
            if (!std::isfinite(v)) throw ContractError("dataset '" + name + "': non-finite feature value");
        if (require_both_classes && (n_positive() == 0 || n_negative() == 0))
            throw DegenerateDatasetError("dataset '" + name + "' needs both classes (N+=" + std::to_string(n_positive()) +
                                         ", N-=" + std::to_string(n_negative()) + ")");
    }
};

/// N- / N+.
inline double imbalance_ratio(const Dataset& ds) {
    const auto pos = ds.n_positive();
    if (pos == 0) throw DegenerateDatasetError("imbalance ratio undefined: dataset '" + ds.name + "' has no minority rows");
    return static_cast<double>(ds.n_negative()) / static_cast<double>(pos);
}

}  // namespace dragan
