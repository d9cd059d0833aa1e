#pragma once

#include <algorithm>
#include <concepts>
#include <numeric>
#include <string>
#include <vector>

#include "dragan/data/dataset.hpp"
#include "dragan/rng.hpp"

namespace dragan::oversample {

/// Source of the random draws the samplers consume. `Rng` models it; tests
/// substitute fixed draws to pin interpolation parameters.
template <class S>
concept DrawSource = requires(S s, std::size_t n, double a) {
    { s.uniform() } -> std::convertible_to<double>;
    { s.index(n) } -> std::convertible_to<std::size_t>;
    { s.beta(a, a) } -> std::convertible_to<double>;
    s.shuffle(std::declval<std::size_t*>(), std::declval<std::size_t*>());
};

enum class Method { vanilla, smote, polyfit_star, mixup, dragan };

inline std::string to_string(Method m) {
    switch (m) {
        case Method::vanilla: return "vanilla";
        case Method::smote: return "smote";
        case Method::polyfit_star: return "polyfit";
        case Method::mixup: return "mixup";
        case Method::dragan: return "dragan";
    }
    return "vanilla";
}

inline Method parse_method(const std::string& s) {
    if (s == "vanilla") return Method::vanilla;
    if (s == "smote") return Method::smote;
    if (s == "polyfit" || s == "polyfit-star" || s == "polynom_fit_smote") return Method::polyfit_star;
    if (s == "mixup") return Method::mixup;
    if (s == "dragan") return Method::dragan;
    throw ConfigError("unknown method '" + s + "'");
}

struct ResamplePlan {
    Method method = Method::vanilla;
    std::size_t target_count = 0;
    std::size_t k_neighbors = 0;  // 0 = min(5, N+ - 1)
    double alpha = 0.2;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(alpha > 0.0)) throw ConfigError("mixup alpha must be positive");
    }
};

/// N- - N+: rows to synthesize so that the classes are equal in size.
inline std::size_t target_count_balance(const Dataset& ds) {
    ds.validate();
    const auto pos = ds.n_positive(), neg = ds.n_negative();
    return neg > pos ? neg - pos : 0;
}

/// x_i + t * (x_j - x_i)
inline std::vector<double> interpolate(std::span<const double> xi, std::span<const double> xj, double t) {
    std::vector<double> out(xi.size());
    for (std::size_t c = 0; c < xi.size(); ++c) out[c] = xi[c] + t * (xj[c] - xi[c]);
    return out;
}

/// Indices (into `rows`) of the k nearest other rows by Euclidean distance,
/// ties broken by index.
inline std::vector<std::vector<std::size_t>> nearest_neighbors(const Matrix& x, std::span<const std::size_t> rows,
                                                               std::size_t k) {
    const std::size_t n = rows.size();
    std::vector<std::vector<std::size_t>> out(n);
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t a = 0; a < n; ++a) {
        dist.clear();
        auto ra = x.row(rows[a]);
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            auto rb = x.row(rows[b]);
            double d = 0.0;
            for (std::size_t c = 0; c < ra.size(); ++c) d += (ra[c] - rb[c]) * (ra[c] - rb[c]);
            dist.emplace_back(d, b);
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
        for (std::size_t i = 0; i < k; ++i) out[a].push_back(dist[i].second);
    }
    return out;
}

namespace detail {

inline std::vector<std::size_t> minority_rows(const Dataset& ds, const char* who) {
    ds.validate(false);
    auto rows = ds.indices_of(1);
    if (rows.size() < 2)
        throw InsufficientMinorityError(std::string(who) + ": needs at least 2 minority rows, got " +
                                        std::to_string(rows.size()));
    return rows;
}

}  // namespace detail

/// Appends `target_count` minority rows, each x_i + eps * (x_j - x_i) with
/// x_i a uniformly drawn minority row, x_j one of its k nearest minority
/// neighbours and eps ~ U(0,1).
template <DrawSource Source>
Dataset smote(const Dataset& ds, std::size_t target_count, std::size_t k, Source& draws) {
    auto minority = detail::minority_rows(ds, "smote");
    if (k == 0) k = std::min<std::size_t>(5, minority.size() - 1);
    if (k > minority.size() - 1)
        throw ConfigError("smote: k=" + std::to_string(k) + " exceeds minority count - 1 (" +
                          std::to_string(minority.size() - 1) + ")");
    auto nn = nearest_neighbors(ds.features, minority, k);

    Dataset out = ds;
    out.features.reserve_rows(ds.size() + target_count);
    for (std::size_t s = 0; s < target_count; ++s) {
        const std::size_t a = draws.index(minority.size());
        const std::size_t b = nn[a][draws.index(k)];
        const double eps = draws.uniform();
        out.append(interpolate(ds.features.row(minority[a]), ds.features.row(minority[b]), eps), 1);
    }
    return out;
}

/// Mean of the minority rows.
inline std::vector<double> minority_centroid(const Dataset& ds) {
    auto rows = ds.indices_of(1);
    std::vector<double> c(ds.dims(), 0.0);
    for (auto r : rows)
        for (std::size_t j = 0; j < ds.dims(); ++j) c[j] += ds.features(r, j);
    for (auto& v : c) v /= static_cast<double>(rows.size());
    return c;
}

/// polynom-fit-SMOTE with the star topology: points drawn uniformly on the
/// segments centroid -> x_i, visiting minority rows in a shuffled cycle.
template <DrawSource Source>
Dataset polyfit_star(const Dataset& ds, std::size_t target_count, Source& draws) {
    auto minority = detail::minority_rows(ds, "polyfit_star");
    const auto center = minority_centroid(ds);

    Dataset out = ds;
    out.features.reserve_rows(ds.size() + target_count);
    std::vector<std::size_t> order;
    for (std::size_t s = 0; s < target_count; ++s) {
        const std::size_t pos = s % minority.size();
        if (pos == 0) {
            order = minority;
            draws.shuffle(order.data(), order.data() + order.size());
        }
        const double t = draws.uniform();
        out.append(interpolate(center, ds.features.row(order[pos]), t), 1);
    }
    return out;
}

/// Label rule for mixed rows: round(lambda*y_i + (1-lambda)*y_j), an exact
/// half going to the minority class.
inline int mixup_label(double lambda, int yi, int yj) {
    const double y = lambda * yi + (1.0 - lambda) * yj;
    return y >= 0.5 ? 1 : 0;
}

/// MixUp over all rows: distinct i, j, lambda ~ Beta(alpha, alpha).
template <DrawSource Source>
Dataset mixup(const Dataset& ds, std::size_t target_count, double alpha, Source& draws) {
    ds.validate(false);
    if (!(alpha > 0.0)) throw ConfigError("mixup: alpha must be positive");
    if (ds.size() < 2) throw InsufficientMinorityError("mixup: needs at least 2 rows");

    Dataset out = ds;
    out.features.reserve_rows(ds.size() + target_count);
    const std::size_t n = ds.size();
    for (std::size_t s = 0; s < target_count; ++s) {
        const std::size_t i = draws.index(n);
        std::size_t j = draws.index(n - 1);
        if (j >= i) ++j;
        const double lambda = draws.beta(alpha, alpha);
        // x_new = lambda*x_i + (1-lambda)*x_j = x_j + lambda*(x_i - x_j)
        out.append(interpolate(ds.features.row(j), ds.features.row(i), lambda),
                   mixup_label(lambda, ds.labels[i], ds.labels[j]));
    }
    return out;
}

/// Runs one of the non-generative resamplers described by `plan`.
inline Dataset resample(const Dataset& ds, const ResamplePlan& plan) {
    plan.validate();
    Rng rng(plan.seed);
    switch (plan.method) {
        case Method::vanilla: return ds;
        case Method::smote: return smote(ds, plan.target_count, plan.k_neighbors, rng);
        case Method::polyfit_star: return polyfit_star(ds, plan.target_count, rng);
        case Method::mixup: return mixup(ds, plan.target_count, plan.alpha, rng);
        case Method::dragan: break;
    }
    throw ConfigError("resample: dragan is run through gan::resample_with_dragan");
}

}  // namespace dragan::oversample
