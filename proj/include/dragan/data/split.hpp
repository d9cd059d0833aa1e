#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "dragan/data/dataset.hpp"
#include "dragan/rng.hpp"

namespace dragan {

struct Fold {
    std::size_t repeat = 0;
    std::size_t fold = 0;
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Repeated stratified k-fold plan; `folds` is ordered repeat-major.
struct SplitPlan {
    std::size_t n_splits = 5;
    std::size_t n_repeats = 3;
    std::uint64_t seed = 0;
    std::vector<Fold> folds;
};

/// Per repeat: shuffle each class, then deal minority rows followed by
/// majority rows round-robin into folds with one running counter. Fold
/// sizes differ by at most one and each fold holds floor or ceil of its
/// share of every class.
inline SplitPlan stratified_kfold(const Dataset& ds, std::size_t n_splits, std::size_t n_repeats, std::uint64_t seed) {
    if (n_splits < 2) throw ConfigError("stratified_kfold: n_splits must be >= 2");
    if (n_repeats < 1) throw ConfigError("stratified_kfold: n_repeats must be >= 1");
    auto pos = ds.indices_of(1);
    auto neg = ds.indices_of(0);
    if (pos.size() < n_splits || neg.size() < n_splits)
        throw StratificationError("stratified_kfold: each class needs at least " + std::to_string(n_splits) +
                                  " members (N+=" + std::to_string(pos.size()) + ", N-=" + std::to_string(neg.size()) +
                                  ")");

    SplitPlan plan{n_splits, n_repeats, seed, {}};
    Rng root(seed);
    for (std::size_t r = 0; r < n_repeats; ++r) {
        Rng rng = root.split(r);
        auto p = pos;
        auto q = neg;
        rng.shuffle(p.begin(), p.end());
        rng.shuffle(q.begin(), q.end());

        std::vector<std::size_t> fold_of(ds.size());
        std::size_t counter = 0;
        for (auto i : p) fold_of[i] = counter++ % n_splits;
        for (auto i : q) fold_of[i] = counter++ % n_splits;

        for (std::size_t f = 0; f < n_splits; ++f) {
            Fold fold{r, f, {}, {}};
            for (std::size_t i = 0; i < ds.size(); ++i) (fold_of[i] == f ? fold.test : fold.train).push_back(i);
            plan.folds.push_back(std::move(fold));
        }
    }
    return plan;
}

/// Audit export: one row per (repeat, fold, index) with its role.
inline void write_split_csv(const SplitPlan& plan, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "repeat,fold,index,role\n";
    for (const auto& f : plan.folds) {
        for (auto i : f.train) out << f.repeat << ',' << f.fold << ',' << i << ",train\n";
        for (auto i : f.test) out << f.repeat << ',' << f.fold << ',' << i << ",test\n";
    }
}

/// Stratified random subset of round(fraction * n) rows. Each class keeps
/// round(fraction * class size) rows, floored at one; rows come back in
/// shuffled order.
inline Dataset subsample_fraction(const Dataset& ds, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw DomainError("subsample_fraction: fraction must be in (0,1], got " + std::to_string(fraction));
    Rng rng(seed);
    std::vector<std::size_t> keep;
    for (int label : {1, 0}) {
        auto idx = ds.indices_of(label);
        if (idx.empty())
            throw DegenerateDatasetError("subsample_fraction: dataset '" + ds.name + "' has an empty class");
        rng.shuffle(idx.begin(), idx.end());
        auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
        k = std::clamp<std::size_t>(k, 1, idx.size());
        keep.insert(keep.end(), idx.begin(), idx.begin() + static_cast<long>(k));
    }
    rng.shuffle(keep.begin(), keep.end());
    return ds.subset(keep);
}

}  // namespace dragan
