#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "dragan/errors.hpp"

namespace dragan::metrics {

struct ScoredPredictions {
    std::vector<double> scores;  // higher = more positive
    std::vector<int> labels;     // 0/1
    std::optional<double> threshold = std::nullopt;

    std::size_t positives() const { return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1)); }
    std::size_t negatives() const { return labels.size() - positives(); }
};

namespace detail {

inline void require_both_classes(const ScoredPredictions& sp, const char* what) {
    if (sp.scores.size() != sp.labels.size()) throw DimensionError(std::string(what) + ": scores/labels length mismatch");
    if (sp.positives() == 0 || sp.negatives() == 0)
        throw UndefinedMetricError(std::string(what) + " is undefined without both classes");
}

/// Indices sorted by descending score (stable on index for equal scores).
inline std::vector<std::size_t> order_desc(std::span<const double> scores) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return idx;
}

}  // namespace detail

/// Area under the ROC curve by trapezoidal integration over all distinct
/// thresholds. Equal scores form one ROC step, which makes the result equal
/// to the Mann-Whitney statistic with half credit for ties.
inline double auc(const ScoredPredictions& sp) {
    detail::require_both_classes(sp, "AUC");
    const double P = static_cast<double>(sp.positives());
    const double N = static_cast<double>(sp.negatives());
    auto idx = detail::order_desc(sp.scores);
    double area = 0.0, tp = 0.0, fp = 0.0;
    for (std::size_t i = 0; i < idx.size();) {
        double dtp = 0.0, dfp = 0.0;
        const double s = sp.scores[idx[i]];
        for (; i < idx.size() && sp.scores[idx[i]] == s; ++i) (sp.labels[idx[i]] == 1 ? dtp : dfp) += 1.0;
        area += dfp * (tp + 0.5 * dtp);
        tp += dtp;
        fp += dfp;
    }
    return area / (P * N);
}

/// Counts may be fractional (continuous confusion matrices).
struct Confusion {
    double tp = 0, fp = 0, tn = 0, fn = 0;

    double total() const { return tp + fp + tn + fn; }
};

/// Predicts positive iff score > threshold.
inline Confusion confusion(const ScoredPredictions& sp, double threshold) {
    if (sp.scores.size() != sp.labels.size()) throw DimensionError("confusion: scores/labels length mismatch");
    Confusion c;
    for (std::size_t i = 0; i < sp.scores.size(); ++i) {
        const bool pred = sp.scores[i] > threshold;
        if (sp.labels[i] == 1)
            (pred ? c.tp : c.fn) += 1.0;
        else
            (pred ? c.fp : c.tn) += 1.0;
    }
    return c;
}

/// 0 when nothing is predicted positive.
inline double precision(const Confusion& c) { return c.tp + c.fp > 0 ? c.tp / (c.tp + c.fp) : 0.0; }

inline double recall(const Confusion& c) {
    if (c.tp + c.fn <= 0) throw UndefinedMetricError("recall is undefined without positives");
    return c.tp / (c.tp + c.fn);
}

inline double f1(const Confusion& c) {
    const double p = precision(c);
    const double r = recall(c);
    return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
}

/// sqrt(TP/P * TN/N)
inline double g_score(const Confusion& c) {
    const double P = c.tp + c.fn, N = c.tn + c.fp;
    if (P <= 0 || N <= 0) throw UndefinedMetricError("G-score is undefined without both classes");
    return std::sqrt((c.tp / P) * (c.tn / N));
}

inline double true_positive_rate(const Confusion& c) { return recall(c); }

inline double false_positive_rate(const Confusion& c) {
    if (c.fp + c.tn <= 0) throw UndefinedMetricError("FPR is undefined without negatives");
    return c.fp / (c.fp + c.tn);
}

/// Candidate thresholds: below-min sentinel, midpoints of adjacent distinct
/// scores, above-max sentinel (ascending). Sentinels are min-1 and max+1 so
/// every threshold stays finite.
inline std::vector<double> candidate_thresholds(std::span<const double> scores) {
    std::vector<double> s(scores.begin(), scores.end());
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    std::vector<double> out;
    out.reserve(s.size() + 1);
    out.push_back(s.front() - 1.0);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) out.push_back(0.5 * (s[i] + s[i + 1]));
    out.push_back(s.back() + 1.0);
    return out;
}

/// Threshold maximizing TPR - FPR over the candidate set; the smallest
/// threshold wins ties. Runs in O(n log n) by sweeping the sorted scores.
inline double youden_threshold(const ScoredPredictions& sp) {
    detail::require_both_classes(sp, "Youden threshold");
    const double P = static_cast<double>(sp.positives());
    const double N = static_cast<double>(sp.negatives());
    auto cand = candidate_thresholds(sp.scores);

    std::vector<std::size_t> idx(sp.scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return sp.scores[a] < sp.scores[b]; });

    // Threshold cand[0] predicts everything positive. Each later candidate
    // removes one more distinct score level from the positive side.
    // Compare J scaled by P*N so equal counts tie exactly.
    double tp = P, fp = N;
    double best_j = tp * N - fp * P;
    double best_t = cand[0];
    std::size_t i = 0;
    for (std::size_t c = 1; c < cand.size(); ++c) {
        const double level = sp.scores[idx[i]];
        for (; i < idx.size() && sp.scores[idx[i]] == level; ++i) (sp.labels[idx[i]] == 1 ? tp : fp) -= 1.0;
        const double j = tp * N - fp * P;
        if (j > best_j) {
            best_j = j;
            best_t = cand[c];
        }
    }
    return best_t;
}

/// Constant predictor whose output equals the minority fraction.
struct TrivialSolution {
    double epsilon = 0.0;
    double loss = 0.0;
    double f1 = 0.0;
};

/// NLL of a constant prediction `epsilon` on data with minority fraction `fraction`.
inline double constant_predictor_loss(double fraction, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("constant predictor output must be in (0,1)");
    return -(fraction * std::log(epsilon) + (1.0 - fraction) * std::log(1.0 - epsilon));
}

/// Continuous confusion matrix of the trivial solution for minority fraction
/// epsilon over `n` rows: half of each class predicted positive in proportion
/// to the minority share.
inline Confusion trivial_confusion(double epsilon, double n = 1.0) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("minority fraction must be in (0,1)");
    Confusion c;
    c.tp = 0.5 * epsilon * n;
    c.fn = 0.5 * (1.0 - epsilon) * n;
    c.fp = 0.5 * epsilon * n;
    c.tn = 0.5 * (1.0 - epsilon) * n;
    return c;
}

/// F1 = epsilon / (0.5 + epsilon)
inline double trivial_f1(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("minority fraction must be in (0,1)");
    return epsilon / (0.5 + epsilon);
}

inline TrivialSolution trivial_solution(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw DomainError("trivial_solution: epsilon must be in (0,1), got " + std::to_string(epsilon));
    return {epsilon, constant_predictor_loss(epsilon, epsilon), trivial_f1(epsilon)};
}

struct CurvePoint {
    double epsilon;
    double loss;
    double f1;
};

/// Loss of the constant predictor at each grid point under the true minority
/// fraction, and the trivial-solution F1 at that point.
inline std::vector<CurvePoint> loss_f1_curve(double minority_fraction, std::span<const double> grid) {
    if (!(minority_fraction > 0.0 && minority_fraction < 1.0))
        throw DomainError("loss_f1_curve: minority fraction must be in (0,1)");
    std::vector<CurvePoint> out;
    out.reserve(grid.size());
    for (double e : grid) out.push_back({e, constant_predictor_loss(minority_fraction, e), trivial_f1(e)});
    return out;
}

/// Uniform grid step, 2*step, ..., 1-step.
inline std::vector<double> epsilon_grid(double step = 0.001) {
    std::vector<double> g;
    const auto n = static_cast<std::size_t>(std::llround(1.0 / step));
    for (std::size_t i = 1; i < n; ++i) g.push_back(static_cast<double>(i) * step);
    return g;
}

inline void write_curve_csv(std::span<const CurvePoint> curve, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.precision(17);
    out << "epsilon,loss,f1\n";
    for (const auto& p : curve) out << p.epsilon << ',' << p.loss << ',' << p.f1 << '\n';
}

/// Sample Pearson correlation.
inline double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw DimensionError("pearson: length mismatch");
    if (xs.size() < 2) throw UndefinedMetricError("pearson needs at least two points");
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw UndefinedMetricError("pearson is undefined for a constant series");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// 1 + corr(F1, loss): 0 when the loss is a perfect inverse proxy for F1.
inline double performance_error(std::span<const double> f1_series, std::span<const double> loss_series) {
    return 1.0 + pearson(f1_series, loss_series);
}

/// Test loss minus training loss.
inline double generalization_error(double loss_test, double loss_train) { return loss_test - loss_train; }

/// Test F1 minus training F1.
inline double generalization_error_f1(double f1_test, double f1_train) { return f1_test - f1_train; }

/// Least-squares slope sum((x-mx)(y-my)) / sum((x-mx)^2).
inline std::optional<double> least_squares_slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw DimensionError("least_squares_slope: length mismatch");
    if (xs.size() < 2) return std::nullopt;
    if (std::adjacent_find(xs.begin(), xs.end(), std::not_equal_to<>()) == xs.end()) return std::nullopt;
    // exact zero for a flat series; the centered sum would leave rounding residue
    if (std::adjacent_find(ys.begin(), ys.end(), std::not_equal_to<>()) == ys.end()) return 0.0;
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx == 0.0) return std::nullopt;
    return sxy / sxx;
}

}  // namespace dragan::metrics
