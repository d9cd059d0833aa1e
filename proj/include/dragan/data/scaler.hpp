#pragma once

#include <cmath>
#include <limits>

#include "dragan/data/dataset.hpp"

namespace dragan {

inline MinMaxScaler fit_minmax(const Matrix& features) {
    MinMaxScaler s{std::vector<double>(features.cols(), std::numeric_limits<double>::infinity()),
                   std::vector<double>(features.cols(), -std::numeric_limits<double>::infinity())};
    for (std::size_t r = 0; r < features.rows(); ++r)
        for (std::size_t c = 0; c < features.cols(); ++c) {
            s.min[c] = std::min(s.min[c], features(r, c));
            s.max[c] = std::max(s.max[c], features(r, c));
        }
    return s;
}

inline MinMaxScaler fit_minmax(const Dataset& ds) { return fit_minmax(ds.features); }

/// Maps fitted columns into [0,1]. Values outside the fitted range are kept
/// as-is (no clipping), so held-out rows may land outside the unit box.
inline Matrix apply_minmax(const MinMaxScaler& s, const Matrix& features) {
    if (features.cols() != s.min.size()) throw DimensionError("apply_minmax: column count mismatch");
    Matrix out(features.rows(), features.cols());
    for (std::size_t r = 0; r < features.rows(); ++r)
        for (std::size_t c = 0; c < features.cols(); ++c) {
            const double span = s.max[c] - s.min[c];
            out(r, c) = span > 0.0 ? (features(r, c) - s.min[c]) / span : 0.5;
        }
    return out;
}

/// Inverse of apply_minmax. Constant columns return their fitted value.
inline Matrix invert_minmax(const MinMaxScaler& s, const Matrix& scaled) {
    if (scaled.cols() != s.min.size()) throw DimensionError("invert_minmax: column count mismatch");
    Matrix out(scaled.rows(), scaled.cols());
    for (std::size_t r = 0; r < scaled.rows(); ++r)
        for (std::size_t c = 0; c < scaled.cols(); ++c) {
            const double span = s.max[c] - s.min[c];
            out(r, c) = span > 0.0 ? s.min[c] + scaled(r, c) * span : s.min[c];
        }
    return out;
}

inline Dataset apply_minmax(const MinMaxScaler& s, const Dataset& ds) {
    Dataset out = ds;
    out.features = apply_minmax(s, ds.features);
    out.scaling = s;
    return out;
}

inline ZScoreScaler fit_zscore(const Matrix& features) {
    const std::size_t n = features.rows(), d = features.cols();
    ZScoreScaler s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) s.mean[c] += features(r, c);
    for (auto& m : s.mean) m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) s.stddev[c] += std::pow(features(r, c) - s.mean[c], 2);
    for (auto& v : s.stddev) v = std::sqrt(v / static_cast<double>(n));
    return s;
}

inline Matrix apply_zscore(const ZScoreScaler& s, const Matrix& features) {
    if (features.cols() != s.mean.size()) throw DimensionError("apply_zscore: column count mismatch");
    Matrix out(features.rows(), features.cols());
    for (std::size_t r = 0; r < features.rows(); ++r)
        for (std::size_t c = 0; c < features.cols(); ++c)
            out(r, c) = s.stddev[c] > 0.0 ? (features(r, c) - s.mean[c]) / s.stddev[c] : 0.0;
    return out;
}

}  // namespace dragan
