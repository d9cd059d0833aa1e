#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dragan/classify/logistic.hpp"
#include "dragan/data/csv.hpp"
#include "dragan/data/scaler.hpp"
#include "dragan/data/split.hpp"
#include "dragan/gan/dragan.hpp"
#include "dragan/metrics/metrics.hpp"
#include "dragan/oversample/oversample.hpp"

namespace dragan::bench {

using oversample::Method;

struct BenchOptions {
    std::vector<Method> methods{Method::vanilla, Method::smote, Method::polyfit_star, Method::mixup, Method::dragan};
    std::size_t splits = 5;
    std::size_t repeats = 3;
    std::uint64_t seed = 0;
    gan::DraganConfig dragan;
    classify::LogisticConfig downstream = classify::LogisticConfig::downstream();
    double mixup_alpha = 0.2;
    std::size_t smote_k = 0;  // 0 = min(5, N+ - 1)
    bool pooled = false;      // metrics on pooled test predictions per repeat
    bool augment = false;     // draGAN: train downstream on generated + real
    std::size_t jobs = 1;
    std::string label_column;
    std::filesystem::path telemetry_dir;  // empty = no draGAN telemetry files
    std::function<void(const std::string&)> log;
};

struct EvalRecord {
    std::string dataset;
    std::string method;
    std::size_t repeat = 0;
    std::size_t fold = 0;
    double auc = 0.0;
    double f1 = 0.0;
    double g = 0.0;
    double threshold = 0.0;
    double wall_time_seconds = 0.0;
    std::uint64_t seed = 0;
    std::size_t train_rows = 0;
    std::size_t resampled_rows = 0;
    std::vector<double> test_scores;
    std::vector<int> test_labels;
    std::vector<std::size_t> resampler_input;  // original row indices handed to the resampler
};

struct Failure {
    std::string dataset;
    std::string method;  // empty for dataset-level failures
    std::string message;
};

struct BenchmarkReport {
    std::vector<std::string> datasets;  // successfully evaluated, in input order
    std::vector<std::string> methods;
    std::vector<EvalRecord> records;    // dataset, method, repeat, fold order
    std::vector<Failure> failures;
    std::map<std::string, SplitPlan> splits;
    bool pooled = false;
};

/// Independent seed for one (dataset, method, repeat, fold) task.
inline std::uint64_t task_seed(std::uint64_t seed, const std::string& dataset, Method m, std::size_t repeat,
                               std::size_t fold) {
    return Rng(seed).split(dataset).split(oversample::to_string(m)).split(repeat).split(fold).seed();
}

inline std::uint64_t split_seed(std::uint64_t seed, const std::string& dataset) {
    return Rng(seed).split("folds").split(dataset).seed();
}

/// Training rows for the downstream classifier, in the scaled space.
inline Dataset resample_train(const Dataset& scaled_train, Method method, std::uint64_t seed, const BenchOptions& opt,
                              std::vector<gan::EpochTelemetry>* telemetry = nullptr) {
    if (method == Method::dragan) {
        auto config = opt.dragan;
        config.seed = seed;
        auto state = gan::train_dragan(scaled_train, config);
        if (telemetry) *telemetry = state.telemetry;
        Dataset out = gan::best_batch_dataset(state, scaled_train);
        if (opt.augment) out.append(scaled_train);
        return out;
    }
    oversample::ResamplePlan plan{method, oversample::target_count_balance(scaled_train), opt.smote_k, opt.mixup_alpha,
                                  seed};
    return oversample::resample(scaled_train, plan);
}

/// Scale on train, resample train, fit the downstream classifier, score the
/// untouched test fold.
inline EvalRecord evaluate_fold(const Dataset& ds, const Fold& fold, Method method, const BenchOptions& opt) {
    EvalRecord rec;
    rec.dataset = ds.name;
    rec.method = oversample::to_string(method);
    rec.repeat = fold.repeat;
    rec.fold = fold.fold;
    rec.seed = task_seed(opt.seed, ds.name, method, fold.repeat, fold.fold);

    const Dataset train = ds.subset(fold.train);
    const Dataset test = ds.subset(fold.test);
    const auto scaler = fit_minmax(train);
    const Dataset scaled_train = apply_minmax(scaler, train);
    const Matrix scaled_test = apply_minmax(scaler, test.features);
    rec.train_rows = train.size();
    rec.resampler_input = fold.train;

    std::vector<gan::EpochTelemetry> telemetry;
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset fit_on = resample_train(scaled_train, method, rec.seed, opt, &telemetry);
    const auto model = classify::train_logreg(fit_on.features, std::span<const int>(fit_on.labels), opt.downstream);
    rec.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.resampled_rows = fit_on.size();

    if (!opt.telemetry_dir.empty() && method == Method::dragan) {
        std::filesystem::create_directories(opt.telemetry_dir);
        gan::write_telemetry_csv(telemetry, opt.telemetry_dir / ("telemetry_" + ds.name + "_r" +
                                                                 std::to_string(fold.repeat) + "_f" +
                                                                 std::to_string(fold.fold) + ".csv"));
    }

    rec.test_scores = classify::decision_function(model, scaled_test);
    rec.test_labels = test.labels;
    metrics::ScoredPredictions sp{rec.test_scores, rec.test_labels, {}};
    rec.auc = metrics::auc(sp);
    rec.threshold = metrics::youden_threshold(sp);
    const auto c = metrics::confusion(sp, rec.threshold);
    rec.f1 = metrics::f1(c);
    rec.g = metrics::g_score(c);
    return rec;
}

namespace detail {

/// Runs `n` independent tasks on up to `jobs` threads.
inline void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& task) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) task(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace detail

inline BenchmarkReport run_benchmark(const std::vector<Dataset>& datasets, const BenchOptions& opt) {
    if (opt.methods.empty()) throw ConfigError("run_benchmark: no methods given");
    opt.dragan.validate();
    BenchmarkReport report;
    report.pooled = opt.pooled;
    for (auto m : opt.methods) report.methods.push_back(oversample::to_string(m));

    struct Task {
        const Dataset* ds;
        const Fold* fold;
        Method method;
    };
    std::vector<Task> tasks;
    for (const auto& ds : datasets) {
        try {
            ds.validate(true);
            report.splits.emplace(ds.name, stratified_kfold(ds, opt.splits, opt.repeats, split_seed(opt.seed, ds.name)));
            report.datasets.push_back(ds.name);
        } catch (const Error& e) {
            report.failures.push_back({ds.name, "", e.what()});
            if (opt.log) opt.log("skipping dataset " + ds.name + ": " + e.what());
        }
    }
    for (const auto& ds : datasets) {
        auto it = report.splits.find(ds.name);
        if (it == report.splits.end()) continue;
        for (auto m : opt.methods)
            for (const auto& f : it->second.folds) tasks.push_back({&ds, &f, m});
    }

    std::vector<std::optional<EvalRecord>> results(tasks.size());
    std::vector<std::string> errors(tasks.size());
    std::mutex log_mutex;
    detail::parallel_for(tasks.size(), opt.jobs, [&](std::size_t i) {
        const auto& t = tasks[i];
        try {
            results[i] = evaluate_fold(*t.ds, *t.fold, t.method, opt);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
        if (opt.log) {
            std::lock_guard lock(log_mutex);
            opt.log(t.ds->name + " " + oversample::to_string(t.method) + " r" + std::to_string(t.fold->repeat) + " f" +
                    std::to_string(t.fold->fold) + (errors[i].empty() ? " done" : " failed: " + errors[i]));
        }
    });

    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (results[i]) {
            report.records.push_back(std::move(*results[i]));
        } else {
            const auto& name = tasks[i].ds->name;
            const auto method = oversample::to_string(tasks[i].method);
            const bool seen = std::any_of(report.failures.begin(), report.failures.end(),
                                          [&](const Failure& f) { return f.dataset == name && f.method == method; });
            if (!seen) report.failures.push_back({name, method, errors[i]});
        }
    }
    return report;
}

/// Loads every *.csv under `dir` (sorted by file name). Unloadable files are
/// reported as dataset failures by the caller through `failures`.
inline std::vector<Dataset> load_directory(const std::filesystem::path& dir, const std::string& label_column,
                                           std::vector<Failure>& failures) {
    if (!std::filesystem::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<Dataset> out;
    for (const auto& f : files) {
        try {
            out.push_back(load_csv(f, label_column));
        } catch (const Error& e) {
            failures.push_back({f.stem().string(), "", e.what()});
        }
    }
    return out;
}

/// Records for one (dataset, method) cell.
inline std::vector<const EvalRecord*> cell(const BenchmarkReport& r, const std::string& dataset,
                                           const std::string& method) {
    std::vector<const EvalRecord*> out;
    for (const auto& rec : r.records)
        if (rec.dataset == dataset && rec.method == method) out.push_back(&rec);
    return out;
}

enum class Metric { auc, f1, g };

inline std::string to_string(Metric m) {
    switch (m) {
        case Metric::auc: return "auc";
        case Metric::f1: return "f1";
        case Metric::g: return "g";
    }
    return "auc";
}

/// Per-fold values of a metric, or per-repeat values on pooled test
/// predictions when the report was run pooled.
inline std::vector<double> cell_values(const BenchmarkReport& r, const std::string& dataset, const std::string& method,
                                       Metric metric) {
    auto recs = cell(r, dataset, method);
    std::vector<double> out;
    if (!r.pooled) {
        for (auto* rec : recs) out.push_back(metric == Metric::auc ? rec->auc : metric == Metric::f1 ? rec->f1 : rec->g);
        return out;
    }
    std::map<std::size_t, metrics::ScoredPredictions> by_repeat;
    for (auto* rec : recs) {
        auto& sp = by_repeat[rec->repeat];
        sp.scores.insert(sp.scores.end(), rec->test_scores.begin(), rec->test_scores.end());
        sp.labels.insert(sp.labels.end(), rec->test_labels.begin(), rec->test_labels.end());
    }
    for (auto& [rep, sp] : by_repeat) {
        if (metric == Metric::auc) {
            out.push_back(metrics::auc(sp));
            continue;
        }
        const auto c = metrics::confusion(sp, metrics::youden_threshold(sp));
        out.push_back(metric == Metric::f1 ? metrics::f1(c) : metrics::g_score(c));
    }
    return out;
}

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for a single value
    std::size_t count = 0;
};

inline MeanStd mean_std(std::span<const double> xs) {
    MeanStd m;
    m.count = xs.size();
    if (xs.empty()) return m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return m;
}

inline std::optional<MeanStd> cell_summary(const BenchmarkReport& r, const std::string& dataset,
                                           const std::string& method, Metric metric) {
    auto v = cell_values(r, dataset, method, metric);
    if (v.empty()) return std::nullopt;
    return mean_std(v);
}

}  // namespace dragan::bench
