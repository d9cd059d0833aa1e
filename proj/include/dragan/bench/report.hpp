#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dragan/bench/benchmark.hpp"

namespace dragan::bench {

inline std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    if (std::string_view(buf) == "-0.0000") return "0.0000";
    return buf;
}

inline std::string fixed4(const std::optional<double>& v) { return v ? fixed4(*v) : "NA"; }

/// Rectangular text table; the first column labels the rows.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::vector<bool>> bold;  // markdown emphasis per cell, optional
};

inline void write_table_csv(const Table& t, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
}

inline void write_table_markdown(const Table& t, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << '|';
    for (const auto& h : t.header) out << ' ' << h << " |";
    out << "\n|";
    for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? " ---: |" : " --- |");
    out << '\n';
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out << '|';
        for (std::size_t c = 0; c < t.rows[r].size(); ++c) {
            const bool b = r < t.bold.size() && c < t.bold[r].size() && t.bold[r][c];
            out << ' ' << (b ? "**" + t.rows[r][c] + "**" : t.rows[r][c]) << " |";
        }
        out << '\n';
    }
}

namespace detail {

/// Marks the cells holding the row maximum (after rounding) among `values`.
inline std::vector<bool> row_max_mask(const std::vector<std::optional<double>>& values) {
    std::optional<std::string> best;
    double best_v = 0.0;
    for (const auto& v : values)
        if (v && (!best || *v > best_v)) {
            best_v = *v;
            best = fixed4(*v);
        }
    std::vector<bool> mask{false};
    for (const auto& v : values) mask.push_back(v && best && fixed4(*v) == *best);
    return mask;
}

}  // namespace detail

/// Per-dataset mean (and std) of a metric per method, with an Average row of
/// the per-dataset means. CSV cells hold means; std gets its own columns.
struct ResultsTable {
    Table csv;
    Table markdown;
};

inline ResultsTable results_table(const BenchmarkReport& r, Metric metric) {
    ResultsTable out;
    out.csv.header = {"dataset"};
    for (const auto& m : r.methods) {
        out.csv.header.push_back(m + "_mean");
        out.csv.header.push_back(m + "_std");
    }
    out.markdown.header = {"dataset"};
    for (const auto& m : r.methods) out.markdown.header.push_back(m);

    std::vector<std::vector<double>> column_means(r.methods.size());
    for (const auto& ds : r.datasets) {
        std::vector<std::string> csv_row{ds}, md_row{ds};
        std::vector<std::optional<double>> means;
        for (std::size_t j = 0; j < r.methods.size(); ++j) {
            auto s = cell_summary(r, ds, r.methods[j], metric);
            if (s) {
                csv_row.push_back(fixed4(s->mean));
                csv_row.push_back(fixed4(s->stddev));
                md_row.push_back(fixed4(s->mean) + " ± " + fixed4(s->stddev));
                column_means[j].push_back(s->mean);
                means.emplace_back(s->mean);
            } else {
                csv_row.insert(csv_row.end(), {"NA", "NA"});
                md_row.push_back("NA");
                means.emplace_back(std::nullopt);
            }
        }
        out.csv.rows.push_back(std::move(csv_row));
        out.markdown.rows.push_back(std::move(md_row));
        out.markdown.bold.push_back(detail::row_max_mask(means));
    }
    std::vector<std::string> csv_avg{"Average"}, md_avg{"Average"};
    std::vector<std::optional<double>> avgs;
    for (const auto& col : column_means) {
        if (col.empty()) {
            csv_avg.insert(csv_avg.end(), {"NA", "NA"});
            md_avg.push_back("NA");
            avgs.emplace_back(std::nullopt);
            continue;
        }
        const auto s = mean_std(col);
        csv_avg.push_back(fixed4(s.mean));
        csv_avg.push_back(fixed4(s.stddev));
        md_avg.push_back(fixed4(s.mean));
        avgs.emplace_back(s.mean);
    }
    out.csv.rows.push_back(std::move(csv_avg));
    out.markdown.rows.push_back(std::move(md_avg));
    out.markdown.bold.push_back(detail::row_max_mask(avgs));
    return out;
}

/// Strict-max wins per method; datasets whose maximum is shared are counted
/// as ties for every method sharing it.
struct BestCounts {
    std::vector<std::string> methods;
    std::vector<std::size_t> wins;
    std::vector<std::size_t> ties;
};

inline BestCounts best_counts(const BenchmarkReport& r, Metric metric) {
    BestCounts b{r.methods, std::vector<std::size_t>(r.methods.size(), 0), std::vector<std::size_t>(r.methods.size(), 0)};
    for (const auto& ds : r.datasets) {
        std::vector<std::optional<double>> means;
        for (const auto& m : r.methods) {
            auto s = cell_summary(r, ds, m, metric);
            means.emplace_back(s ? std::optional<double>(s->mean) : std::nullopt);
        }
        std::optional<double> best;
        for (const auto& v : means)
            if (v && (!best || *v > *best)) best = v;
        if (!best) continue;
        std::vector<std::size_t> at_max;
        for (std::size_t j = 0; j < means.size(); ++j)
            if (means[j] && *means[j] == *best) at_max.push_back(j);
        if (at_max.size() == 1)
            ++b.wins[at_max[0]];
        else
            for (auto j : at_max) ++b.ties[j];
    }
    return b;
}

struct CorrelationRow {
    std::string method;
    std::optional<double> pearson;  // nullopt = NA
    std::string note;
};

/// Pearson correlation between each method's per-dataset mean AUC and
/// vanilla's.
inline std::vector<CorrelationRow> correlation_report(const BenchmarkReport& r) {
    if (std::find(r.methods.begin(), r.methods.end(), "vanilla") == r.methods.end())
        throw ConfigError("correlation_report: vanilla must be among the methods");
    std::vector<CorrelationRow> out;
    for (const auto& m : r.methods) {
        std::vector<double> xs, ys;
        for (const auto& ds : r.datasets) {
            auto a = cell_summary(r, ds, m, Metric::auc);
            auto v = cell_summary(r, ds, "vanilla", Metric::auc);
            if (a && v) {
                xs.push_back(a->mean);
                ys.push_back(v->mean);
            }
        }
        CorrelationRow row{m, std::nullopt, ""};
        try {
            row.pearson = metrics::pearson(xs, ys);
        } catch (const UndefinedMetricError& e) {
            row.note = e.what();
        }
        out.push_back(std::move(row));
    }
    return out;
}

struct Gain {
    std::string dataset;
    double gain;
};

struct TopGains {
    std::string method;
    std::vector<Gain> gains;  // non-increasing
    double average = 0.0;
    std::size_t available = 0;  // datasets with both method and vanilla results
};

/// Largest k per-dataset mean-AUC gains over vanilla per method.
inline std::vector<TopGains> top_gains(const BenchmarkReport& r, std::size_t k = 10) {
    if (std::find(r.methods.begin(), r.methods.end(), "vanilla") == r.methods.end())
        throw ConfigError("top_gains: vanilla must be among the methods");
    std::vector<TopGains> out;
    for (const auto& m : r.methods) {
        TopGains t{m, {}, 0.0, 0};
        for (const auto& ds : r.datasets) {
            auto a = cell_summary(r, ds, m, Metric::auc);
            auto v = cell_summary(r, ds, "vanilla", Metric::auc);
            if (a && v) t.gains.push_back({ds, a->mean - v->mean});
        }
        t.available = t.gains.size();
        std::stable_sort(t.gains.begin(), t.gains.end(), [](const Gain& a, const Gain& b) { return a.gain > b.gain; });
        if (t.gains.size() > k) t.gains.resize(k);
        for (const auto& g : t.gains) t.average += g.gain;
        if (!t.gains.empty()) t.average /= static_cast<double>(t.gains.size());
        out.push_back(std::move(t));
    }
    return out;
}

/// Mean wall time (resample + downstream fit) per dataset and method.
inline Table timing_table(const BenchmarkReport& r) {
    Table t;
    t.header = {"dataset"};
    for (const auto& m : r.methods) t.header.push_back(m);
    std::vector<std::vector<double>> cols(r.methods.size());
    for (const auto& ds : r.datasets) {
        std::vector<std::string> row{ds};
        for (std::size_t j = 0; j < r.methods.size(); ++j) {
            std::vector<double> ts;
            for (auto* rec : cell(r, ds, r.methods[j])) ts.push_back(rec->wall_time_seconds);
            if (ts.empty()) {
                row.push_back("NA");
                continue;
            }
            const double mu = mean_std(ts).mean;
            cols[j].push_back(mu);
            row.push_back(fixed4(mu));
        }
        t.rows.push_back(std::move(row));
    }
    std::vector<std::string> avg{"Average"};
    for (const auto& c : cols) avg.push_back(c.empty() ? "NA" : fixed4(mean_std(c).mean));
    t.rows.push_back(std::move(avg));
    return t;
}

struct AblationResult {
    std::vector<double> fractions;  // fractions actually run
    std::vector<std::string> methods;
    std::vector<std::vector<std::optional<double>>> mean_auc;  // [fraction][method]
    std::vector<std::optional<double>> slopes;                 // per method; nullopt = NA
    std::vector<std::string> skipped;                          // warnings for infeasible fractions

    /// Method with the smallest absolute slope, if any slope is defined.
    std::optional<std::string> flattest() const {
        std::optional<std::size_t> best;
        for (std::size_t j = 0; j < slopes.size(); ++j)
            if (slopes[j] && (!best || std::abs(*slopes[j]) < std::abs(*slopes[*best]))) best = j;
        return best ? std::optional<std::string>(methods[*best]) : std::nullopt;
    }
};

/// Slope of mean AUC against fraction per method, over the fractions where
/// the method produced a result.
inline std::vector<std::optional<double>> ablation_slopes(std::span<const double> fractions,
                                                          const std::vector<std::vector<std::optional<double>>>& means,
                                                          std::size_t n_methods) {
    std::vector<std::optional<double>> out;
    for (std::size_t j = 0; j < n_methods; ++j) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < fractions.size(); ++i)
            if (means[i][j]) {
                xs.push_back(fractions[i]);
                ys.push_back(*means[i][j]);
            }
        out.push_back(metrics::least_squares_slope(xs, ys));
    }
    return out;
}

/// Subsamples the dataset at each fraction and benchmarks every subset.
inline AblationResult ablate_data_fraction(const Dataset& ds, std::span<const double> fractions,
                                           const BenchOptions& opt) {
    AblationResult res;
    for (auto m : opt.methods) res.methods.push_back(oversample::to_string(m));
    for (double f : fractions) {
        Dataset sub;
        try {
            sub = subsample_fraction(ds, f, Rng(opt.seed).split("ablation").split(fixed4(f)).seed());
        } catch (const Error& e) {
            res.skipped.push_back("fraction " + fixed4(f) + ": " + e.what());
            continue;
        }
        if (sub.n_positive() < opt.splits || sub.n_negative() < opt.splits) {
            res.skipped.push_back("fraction " + fixed4(f) + ": leaves " + std::to_string(sub.n_positive()) +
                                  " minority rows, fewer than " + std::to_string(opt.splits) + " splits");
            continue;
        }
        auto report = run_benchmark({sub}, opt);
        std::vector<std::optional<double>> row;
        for (const auto& m : res.methods) {
            auto s = cell_summary(report, sub.name, m, Metric::auc);
            row.push_back(s ? std::optional<double>(s->mean) : std::nullopt);
        }
        res.fractions.push_back(f);
        res.mean_auc.push_back(std::move(row));
    }
    res.slopes = ablation_slopes(res.fractions, res.mean_auc, res.methods.size());
    for (const auto& w : res.skipped)
        if (opt.log) opt.log("ablation: skipped " + w);
    return res;
}

inline Table ablation_table(const AblationResult& a) {
    Table t;
    t.header = {"fraction"};
    for (const auto& m : a.methods) t.header.push_back(m);
    for (std::size_t i = 0; i < a.fractions.size(); ++i) {
        std::vector<std::string> row{fixed4(a.fractions[i])};
        for (const auto& v : a.mean_auc[i]) row.push_back(fixed4(v));
        t.rows.push_back(std::move(row));
    }
    std::vector<std::string> slope{"slope"};
    for (const auto& s : a.slopes) slope.push_back(fixed4(s));
    t.rows.push_back(std::move(slope));
    return t;
}

inline void emit_ablation(const AblationResult& a, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto t = ablation_table(a);
    write_table_csv(t, dir / "ablation.csv");
    write_table_markdown(t, dir / "ablation.md");
}

struct EmitOptions {
    bool timing = true;  // timing tables vary run to run
};

/// Writes every report table as CSV plus a markdown mirror.
inline void emit_report(const BenchmarkReport& r, const std::filesystem::path& dir, const EmitOptions& opt = {}) {
    std::filesystem::create_directories(dir);
    for (auto metric : {Metric::auc, Metric::f1, Metric::g}) {
        const auto t = results_table(r, metric);
        write_table_csv(t.csv, dir / ("results_" + to_string(metric) + ".csv"));
        write_table_markdown(t.markdown, dir / ("results_" + to_string(metric) + ".md"));
    }

    Table best;
    best.header = {"metric", "method", "wins", "ties"};
    for (auto metric : {Metric::auc, Metric::f1, Metric::g}) {
        const auto b = best_counts(r, metric);
        for (std::size_t j = 0; j < b.methods.size(); ++j)
            best.rows.push_back({to_string(metric), b.methods[j], std::to_string(b.wins[j]), std::to_string(b.ties[j])});
    }
    write_table_csv(best, dir / "best_counts.csv");
    write_table_markdown(best, dir / "best_counts.md");

    const bool has_vanilla = std::find(r.methods.begin(), r.methods.end(), "vanilla") != r.methods.end();
    if (has_vanilla) {
        Table corr;
        corr.header = {"method", "pearson_vs_vanilla"};
        for (const auto& row : correlation_report(r)) corr.rows.push_back({row.method, fixed4(row.pearson)});
        write_table_csv(corr, dir / "correlation.csv");
        write_table_markdown(corr, dir / "correlation.md");

        Table gains;
        gains.header = {"method", "rank", "dataset", "gain"};
        for (const auto& tg : top_gains(r)) {
            for (std::size_t i = 0; i < tg.gains.size(); ++i)
                gains.rows.push_back({tg.method, std::to_string(i + 1), tg.gains[i].dataset, fixed4(tg.gains[i].gain)});
            gains.rows.push_back({tg.method, "average", std::to_string(tg.gains.size()) + " datasets", fixed4(tg.average)});
        }
        write_table_csv(gains, dir / "top_gains.csv");
        write_table_markdown(gains, dir / "top_gains.md");
    }

    if (opt.timing) {
        const auto t = timing_table(r);
        write_table_csv(t, dir / "timing.csv");
        write_table_markdown(t, dir / "timing.md");
    }

    std::ofstream rec(dir / "records.csv");
    if (!rec) throw IoError("cannot write '" + (dir / "records.csv").string() + "'");
    rec << "dataset,method,repeat,fold,seed,train_rows,resampled_rows,auc,f1,g,threshold\n";
    for (const auto& e : r.records)
        rec << e.dataset << ',' << e.method << ',' << e.repeat << ',' << e.fold << ',' << e.seed << ',' << e.train_rows
            << ',' << e.resampled_rows << ',' << dragan::detail::format_double(e.auc) << ','
            << dragan::detail::format_double(e.f1) << ',' << dragan::detail::format_double(e.g) << ','
            << dragan::detail::format_double(e.threshold) << '\n';

    if (!r.failures.empty()) {
        std::ofstream f(dir / "failures.csv");
        f << "dataset,method,message\n";
        for (const auto& x : r.failures) f << x.dataset << ',' << x.method << ",\"" << x.message << "\"\n";
    }
}

}  // namespace dragan::bench
