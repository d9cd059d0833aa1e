#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dragan/bench/report.hpp"

using namespace dragan;

namespace {

struct Common {
    std::string config_file;
    std::string methods;
    std::size_t splits = 5;
    std::size_t repeats = 3;
    std::uint64_t seed = 0;
    std::string label_col;
    bool pooled = false;
    bool augment = false;
    std::size_t jobs = 1;
    bool no_timing = false;
    bool quiet = false;
    std::string telemetry;
    std::vector<std::string> dragan_overrides;
    std::size_t epochs = 0;
    std::size_t patience = 0;
};

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (auto t = dragan::detail::trim(item); !t.empty()) out.push_back(t);
    return out;
}

std::vector<double> parse_fractions(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_commas(s)) {
        auto v = dragan::detail::parse_double(item);
        if (!v) throw ConfigError("bad fraction '" + item + "'");
        out.push_back(*v);
    }
    return out;
}

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_file, "key=value file; flags given on the command line win");
    cmd->add_option("--methods", c.methods, "comma list of vanilla,smote,polyfit,mixup,dragan");
    cmd->add_option("--splits", c.splits, "folds per repeat")->check(CLI::Range(2, 1000));
    cmd->add_option("--repeats", c.repeats, "cross-validation repeats")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "master seed");
    cmd->add_option("--label-col", c.label_col, "label column name (default: last column)");
    cmd->add_flag("--pooled", c.pooled, "metrics on pooled test predictions per repeat");
    cmd->add_flag("--augment", c.augment, "draGAN: train on generated plus real rows");
    cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_flag("--no-timing", c.no_timing, "omit wall-clock tables so outputs are reproducible byte for byte");
    cmd->add_flag("--quiet", c.quiet, "no progress lines on stderr");
    cmd->add_option("--telemetry", c.telemetry, "directory for per-fold draGAN telemetry CSVs");
    cmd->add_option("--dragan", c.dragan_overrides, "draGAN setting KEY=VALUE (repeatable)");
    cmd->add_option("--epochs", c.epochs, "draGAN total-epochs");
    cmd->add_option("--patience", c.patience, "draGAN early-stopping-patience");
}

bool given(CLI::App* cmd, const char* flag) { return cmd->count(flag) > 0; }

/// Config file first, then explicit flags.
bench::BenchOptions build_options(CLI::App* cmd, const Common& c) {
    bench::BenchOptions opt;
    std::string methods = "vanilla,smote,polyfit,mixup,dragan";
    auto bench_setting = [&](const std::string& raw, const std::string& v) {
        const auto key = gan::detail::normalize_key(raw);
        if (key == "methods") methods = v;
        else if (key == "splits") opt.splits = gan::detail::parse_count(v, key);
        else if (key == "repeats") opt.repeats = gan::detail::parse_count(v, key);
        else if (key == "label-col") opt.label_column = v;
        else if (key == "pooled") opt.pooled = gan::detail::parse_bool(v, key);
        else if (key == "augment") opt.augment = gan::detail::parse_bool(v, key);
        else if (key == "jobs") opt.jobs = gan::detail::parse_count(v, key);
        else if (key == "mixup-alpha") opt.mixup_alpha = gan::detail::parse_real(v, key);
        else if (key == "smote-k") opt.smote_k = gan::detail::parse_count(v, key);
        else if (key == "downstream-steps") opt.downstream.steps = gan::detail::parse_count(v, key);
        else if (key == "downstream-lr") opt.downstream.learning_rate = gan::detail::parse_real(v, key);
        else return false;
        return true;
    };
    if (!c.config_file.empty()) {
        for (const auto& [k, v] : gan::read_key_values(c.config_file)) {
            if (gan::detail::normalize_key(k) == "seed") {
                opt.seed = gan::detail::parse_count(v, "seed");
                continue;
            }
            if (!bench_setting(k, v) && !gan::apply_setting(opt.dragan, k, v))
                throw ConfigError("unknown config key '" + k + "'");
        }
    }
    if (given(cmd, "--methods")) methods = c.methods;
    if (given(cmd, "--splits")) opt.splits = c.splits;
    if (given(cmd, "--repeats")) opt.repeats = c.repeats;
    if (given(cmd, "--seed")) opt.seed = c.seed;
    if (given(cmd, "--label-col")) opt.label_column = c.label_col;
    if (c.pooled) opt.pooled = true;
    if (c.augment) opt.augment = true;
    if (given(cmd, "--jobs")) opt.jobs = c.jobs;
    for (const auto& kv : c.dragan_overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--dragan expects KEY=VALUE, got '" + kv + "'");
        if (!gan::apply_setting(opt.dragan, kv.substr(0, eq), kv.substr(eq + 1)))
            throw ConfigError("unknown draGAN setting '" + kv.substr(0, eq) + "'");
    }
    if (given(cmd, "--epochs")) {
        opt.dragan.total_epochs = c.epochs;
        opt.dragan.patience = std::min(opt.dragan.patience, c.epochs);
    }
    if (given(cmd, "--patience")) opt.dragan.patience = c.patience;
    opt.methods.clear();
    for (const auto& m : split_commas(methods)) opt.methods.push_back(oversample::parse_method(m));
    if (!c.telemetry.empty()) opt.telemetry_dir = c.telemetry;
    if (!c.quiet) opt.log = [](const std::string& s) { std::cerr << s << '\n'; };
    opt.dragan.validate();
    return opt;
}

void print_failures(const std::vector<bench::Failure>& failures) {
    for (const auto& f : failures)
        std::cerr << "failed: " << f.dataset << (f.method.empty() ? "" : " / " + f.method) << ": " << f.message << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Oversampling benchmark for imbalanced binary classification"};
    app.require_subcommand(1);

    Common run_c, ablate_c, resample_c;
    std::string data_dir, out_dir = "results";
    auto* run = app.add_subcommand("run", "cross-validated benchmark over every CSV in a directory");
    run->add_option("--data", data_dir, "directory of CSV datasets")->required();
    run->add_option("--out", out_dir, "output directory");
    add_common(run, run_c);

    std::string ablate_file, fractions = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0", ablate_out = "results";
    auto* ablate = app.add_subcommand("ablate", "mean AUC against training-data fraction");
    ablate->add_option("--data", ablate_file, "CSV dataset")->required();
    ablate->add_option("--fractions", fractions, "comma list in (0,1]");
    ablate->add_option("--out", ablate_out, "output directory");
    add_common(ablate, ablate_c);

    double minority_fraction = 0.1, step = 0.001;
    std::string curve_out;
    auto* curve = app.add_subcommand("curve", "loss and F1 of constant predictors over epsilon");
    curve->add_option("--minority-fraction", minority_fraction, "true minority fraction")->required();
    curve->add_option("--step", step, "epsilon grid step");
    curve->add_option("--out", curve_out, "CSV file")->required();

    std::string method_name, in_file, out_file;
    auto* resample = app.add_subcommand("resample", "oversample one CSV to class balance");
    resample->add_option("--method", method_name, "smote, polyfit, mixup, dragan or vanilla")->required();
    resample->add_option("--in", in_file, "input CSV")->required();
    resample->add_option("--out", out_file, "output CSV")->required();
    add_common(resample, resample_c);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto opt = build_options(run, run_c);
            std::vector<bench::Failure> load_failures;
            auto datasets = bench::load_directory(data_dir, opt.label_column, load_failures);
            auto report = bench::run_benchmark(datasets, opt);
            report.failures.insert(report.failures.begin(), load_failures.begin(), load_failures.end());
            bench::emit_report(report, out_dir, {!run_c.no_timing});
            print_failures(report.failures);
            std::cout << "wrote " << report.records.size() << " records for " << report.datasets.size()
                      << " datasets to " << out_dir << '\n';
            return report.datasets.empty() ? 1 : 0;
        }
        if (*ablate) {
            auto opt = build_options(ablate, ablate_c);
            auto ds = load_csv(ablate_file, opt.label_column);
            auto res = bench::ablate_data_fraction(ds, parse_fractions(fractions), opt);
            bench::emit_ablation(res, ablate_out);
            for (std::size_t j = 0; j < res.methods.size(); ++j)
                std::cout << res.methods[j] << " slope " << bench::fixed4(res.slopes[j]) << '\n';
            if (auto f = res.flattest()) std::cout << "smallest absolute slope: " << *f << '\n';
            return 0;
        }
        if (*curve) {
            auto grid = metrics::epsilon_grid(step);
            metrics::write_curve_csv(metrics::loss_f1_curve(minority_fraction, grid), curve_out);
            return 0;
        }
        if (*resample) {
            auto opt = build_options(resample, resample_c);
            auto ds = load_csv(in_file, opt.label_column);
            const auto method = oversample::parse_method(method_name);
            const auto scaler = fit_minmax(ds);
            const auto scaled = apply_minmax(scaler, ds);
            Dataset out;
            if (method == oversample::Method::dragan) {
                auto cfg = opt.dragan;
                cfg.seed = opt.seed;
                out = gan::resample_with_dragan(scaled, cfg);
                if (opt.augment) out.append(ds);
            } else {
                out = bench::resample_train(scaled, method, opt.seed, opt);
                out.features = invert_minmax(scaler, out.features);
            }
            write_csv(out, out_file);
            std::cout << "wrote " << out.size() << " rows (" << out.n_positive() << " minority) to " << out_file
                      << '\n';
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
