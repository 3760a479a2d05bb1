#include "airkit/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "airkit/data_io.hpp"
#include "airkit/rng.hpp"

namespace airkit {

namespace {

// Relative output paths land in $AIRKIT_OUTPUT_DIR when it is set.
std::string resolve_output(const std::string& path) {
    if (path.empty()) return path;
    const char* dir = std::getenv("AIRKIT_OUTPUT_DIR");
    if (!dir || *dir == '\0') return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(dir) / p).string();
}

struct ScenarioFlags {
    std::string kind = "awgn";
    double snr = 12.0;
    std::uint64_t n = 200000;
    std::uint64_t seed = 1;
    double rho_intra = 0.0;
    double rho_cross = 0.0;
    double energy_alpha = 0.0;
    double phase_std = 0.0;
    double gamma = 0.0;

    ChannelScenario build() const {
        std::ostringstream os;
        os << kind << " snr=" << format_double(snr);
        if (kind == "corr_gauss")
            os << " rho_intra=" << format_double(rho_intra)
               << " rho_cross=" << format_double(rho_cross)
               << " energy_alpha=" << format_double(energy_alpha);
        else if (kind == "phase_noise")
            os << " phase_std=" << format_double(phase_std);
        else if (kind == "nl_phase")
            os << " gamma=" << format_double(gamma)
               << " phase_std=" << format_double(phase_std);
        os << " n=" << n << " seed=" << seed;
        return ChannelScenario::parse(os.str());
    }

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--scenario", kind, "Channel kind: awgn, corr_gauss, phase_noise, nl_phase");
        cmd->add_option("--snr", snr, "Per-2D SNR in dB");
        cmd->add_option("--n", n, "Samples per batch");
        cmd->add_option("--seed", seed, "Generator seed");
        cmd->add_option("--rho-intra", rho_intra, "corr_gauss: I/Q noise correlation");
        cmd->add_option("--rho-cross", rho_cross, "corr_gauss: cross-polarization correlation");
        cmd->add_option("--energy-alpha", energy_alpha, "corr_gauss: per-point variance vs energy");
        cmd->add_option("--phase-std", phase_std, "phase_noise / nl_phase: phase std (rad)");
        cmd->add_option("--gamma", gamma, "nl_phase: rotation per unit 4D energy (rad)");
    }
};

std::vector<ModelKind> parse_models(const std::string& spec) {
    std::vector<ModelKind> kinds;
    if (spec == "all") {
        const auto all = ModelKind::table1();
        kinds.assign(all.begin(), all.end());
        return kinds;
    }
    std::istringstream is(spec);
    std::string name;
    while (std::getline(is, name, ',')) kinds.push_back(ModelKind::parse(name));
    if (kinds.empty()) throw CLI::ValidationError("--models", "no model kinds given");
    return kinds;
}

std::vector<std::pair<int, MeanMode>> gmi_variants(const std::string& means) {
    std::vector<std::pair<int, MeanMode>> v;
    if (means == "static" || means == "both")
        v.insert(v.end(), {{2, MeanMode::Static}, {4, MeanMode::Static}});
    if (means == "adaptive" || means == "both")
        v.insert(v.end(), {{2, MeanMode::Adaptive}, {4, MeanMode::Adaptive}});
    if (v.empty())
        throw CLI::ValidationError("--gmi-means", "expected static, adaptive or both");
    return v;
}

void print_rows(std::span<const ResultRow> rows, std::ostream& os) {
    os << std::left << std::setw(20) << "model" << std::setw(6) << "est" << std::setw(10)
       << "means" << std::setw(12) << "rate" << std::setw(12) << "stderr"
       << "scenario\n";
    for (const auto& r : rows) {
        std::ostringstream rate, se;
        rate << std::fixed << std::setprecision(4) << r.rate;
        se << std::fixed << std::setprecision(4) << r.stderr_rate;
        os << std::left << std::setw(20) << r.model << std::setw(6) << r.estimator
           << std::setw(10) << r.mean_mode << std::setw(12) << rate.str() << std::setw(12)
           << se.str() << r.scenario << "\n";
    }
}

std::vector<double> parse_grid(const std::string& spec) {
    // "start:step:stop", inclusive ends.
    std::istringstream is(spec);
    std::string a, b, c;
    if (!std::getline(is, a, ':') || !std::getline(is, b, ':') || !std::getline(is, c))
        throw CLI::ValidationError("grid", "expected start:step:stop, got '" + spec + "'");
    const double start = std::stod(a), step = std::stod(b), stop = std::stod(c);
    if (step <= 0.0) throw CLI::ValidationError("grid", "step must be positive");
    std::vector<double> grid;
    for (double x = start; x <= stop + 1e-12; x += step) grid.push_back(x);
    if (grid.empty()) throw CLI::ValidationError("grid", "grid '" + spec + "' is empty");
    return grid;
}

int run_selftest(std::ostream& os);

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"airkit: achievable information rate estimation for PM-QAM symbol streams"};
    app.require_subcommand(1);

    // ---- simulate ----
    auto* sim = app.add_subcommand("simulate", "Generate synthetic symbol batches");
    ScenarioFlags sim_flags;
    sim_flags.add_flags(sim);
    std::string sim_constellation = "16QAM";
    int sim_batches = 1;
    std::string sim_output = "batch";
    sim->add_option("--constellation", sim_constellation, "Constellation name (e.g. 16QAM)");
    sim->add_option("--batches", sim_batches, "Number of batches to write")
        ->check(CLI::PositiveNumber);
    sim->add_option("--output", sim_output, "Output file prefix (writes <prefix>.b<k>.bin)");

    // ---- fit ----
    auto* fit_cmd = app.add_subcommand("fit", "Fit an auxiliary channel model on a batch file");
    std::string fit_input, fit_output = "model.txt", fit_model = "4D-CG", fit_means;
    int fit_min_samples = 0;
    fit_cmd->add_option("--input", fit_input, "Batch file")->required();
    fit_cmd->add_option("--model", fit_model, "Model kind (e.g. 2D-iidG, 4D-CG)");
    fit_cmd->add_option("--mean-mode", fit_means, "Override mean mode: static or adaptive");
    fit_cmd->add_option("--min-samples", fit_min_samples, "Minimum training samples per point");
    fit_cmd->add_option("--output", fit_output, "Model output path");

    // ---- estimate ----
    auto* est = app.add_subcommand("estimate", "Estimate achievable rates");
    ScenarioFlags est_flags;
    est_flags.add_flags(est);
    std::vector<std::string> est_inputs;
    std::string est_models = "all", est_estimators = "mi,gmi", est_gmi_means = "static";
    std::string est_csv, est_config;
    int est_batches = 4;
    double est_split_ratio = 0.5;
    std::uint64_t est_split_seed = 17;
    bool est_train_eval = false;
    int est_min_samples = 0;
    est->add_option("--config", est_config, "Run configuration file (overrides other flags)");
    est->add_option("--input", est_inputs, "Batch file(s); omit to simulate --scenario");
    est->add_option("--models", est_models, "Comma list of model kinds, or 'all'");
    est->add_option("--estimators", est_estimators, "Comma list out of mi,gmi");
    est->add_option("--gmi-means", est_gmi_means, "GMI mean mode: static, adaptive or both");
    est->add_option("--batches", est_batches, "Batches to simulate when no --input is given");
    est->add_option("--split-ratio", est_split_ratio, "Train fraction of each batch");
    est->add_option("--split-seed", est_split_seed, "Seed of the train/eval permutation");
    est->add_flag("--train-equals-eval", est_train_eval,
                  "Diagnostic: fit and evaluate on the same samples");
    est->add_option("--min-samples", est_min_samples, "Minimum training samples per point");
    est->add_option("--csv", est_csv, "Write results CSV to this path");

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "Evaluate rate tables over a parameter grid");
    ScenarioFlags sweep_flags;
    sweep_flags.add_flags(sweep);
    std::string sweep_snr_grid, sweep_gamma_grid, sweep_models = "all";
    std::string sweep_estimators = "mi", sweep_gmi_means = "static", sweep_csv;
    int sweep_batches = 4;
    double sweep_split_ratio = 0.5;
    std::uint64_t sweep_split_seed = 17;
    int sweep_min_samples = 0;
    bool sweep_serial = false;
    sweep->add_option("--snr-grid", sweep_snr_grid, "SNR grid start:step:stop (dB)");
    sweep->add_option("--gamma-grid", sweep_gamma_grid, "nl_phase gamma grid start:step:stop");
    sweep->add_option("--models", sweep_models, "Comma list of model kinds, or 'all'");
    sweep->add_option("--estimators", sweep_estimators, "Comma list out of mi,gmi");
    sweep->add_option("--gmi-means", sweep_gmi_means, "GMI mean mode: static, adaptive or both");
    sweep->add_option("--batches", sweep_batches, "Batches per grid point");
    sweep->add_option("--split-ratio", sweep_split_ratio, "Train fraction of each batch");
    sweep->add_option("--split-seed", sweep_split_seed, "Seed of the train/eval permutation");
    sweep->add_option("--min-samples", sweep_min_samples, "Minimum training samples per point");
    sweep->add_flag("--serial", sweep_serial, "Run grid points sequentially");
    sweep->add_option("--csv", sweep_csv, "Write results CSV to this path");

    // ---- report ----
    auto* report = app.add_subcommand("report", "Inspect results, batches and constellations");
    std::string report_input, report_batch, report_constellation;
    report->add_option("--input", report_input, "Results CSV to pretty-print");
    report->add_option("--batch", report_batch, "Batch file to summarize");
    report->add_option("--constellation", report_constellation,
                       "Print a constellation as 'index x y label' lines");

    // ---- selftest ----
    auto* selftest = app.add_subcommand("selftest", "Run the built-in oracle suite");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*sim) {
            const Constellation c = constellation_from_name(sim_constellation);
            const ChannelScenario sc = sim_flags.build();
            for (int b = 0; b < sim_batches; ++b) {
                const SymbolBatch batch = simulate(c, sc, static_cast<std::uint32_t>(b));
                const std::string path =
                    resolve_output(sim_output + ".b" + std::to_string(b) + ".bin");
                write_batch(batch, c, path);
                std::cout << "wrote " << path << "  [" << sc.text() << " batch=" << b << "]\n";
            }
            return 0;
        }

        if (*fit_cmd) {
            const LoadedBatch loaded = read_batch(fit_input);
            FitOptions opts;
            opts.min_samples_per_point = fit_min_samples;
            if (fit_means == "static")
                opts.mean_mode_override = MeanMode::Static;
            else if (fit_means == "adaptive")
                opts.mean_mode_override = MeanMode::Adaptive;
            else if (!fit_means.empty())
                throw std::runtime_error("--mean-mode must be static or adaptive");
            const AuxChannelModel model =
                fit(ModelKind::parse(fit_model), loaded.constellation, loaded.batch, opts);
            const std::string path = resolve_output(fit_output);
            write_model(model, path);
            std::cout << "wrote " << path << "  [" << model.kind().name() << " fitted on "
                      << loaded.batch.size() << " samples of " << loaded.batch.meta.scenario
                      << "]\n";
            return 0;
        }

        if (*est) {
            Constellation c = build_qam(16);
            std::vector<SymbolBatch> batches;
            std::vector<ModelKind> kinds;
            bool want_mi = true, want_gmi = true;
            std::vector<std::pair<int, MeanMode>> gmis;
            EstimateOptions opts;
            std::vector<std::string> echo;
            std::string csv_path = est_csv;

            if (!est_config.empty()) {
                const RunConfig cfg = load_config(est_config);
                c = constellation_from_name(cfg.constellation);
                for (const auto& path : cfg.inputs) {
                    LoadedBatch loaded = read_batch(path);
                    if (loaded.constellation.size_2d() != c.size_2d())
                        throw std::runtime_error(path + ": constellation does not match config");
                    batches.push_back(std::move(loaded.batch));
                }
                for (const auto& sc : cfg.scenarios)
                    for (int b = 0; b < cfg.batches; ++b)
                        batches.push_back(simulate(c, sc, static_cast<std::uint32_t>(b)));
                kinds = cfg.models;
                want_mi = cfg.estimate_mi;
                want_gmi = cfg.estimate_gmi;
                gmis = gmi_variants(cfg.gmi_means);
                opts.split_ratio = cfg.split_ratio;
                opts.split_seed = cfg.split_seed;
                if (csv_path.empty()) csv_path = cfg.output_csv;
                echo.push_back("config=" + est_config);
            } else {
                kinds = parse_models(est_models);
                want_mi = false;
                want_gmi = false;
                std::istringstream es(est_estimators);
                std::string name;
                while (std::getline(es, name, ',')) {
                    if (name == "mi")
                        want_mi = true;
                    else if (name == "gmi")
                        want_gmi = true;
                    else
                        throw std::runtime_error("unknown estimator '" + name +
                                                 "' (expected mi or gmi)");
                }
                gmis = gmi_variants(est_gmi_means);
                opts.split_ratio = est_split_ratio;
                opts.split_seed = est_split_seed;
                opts.train_equals_eval = est_train_eval;
                opts.fit.min_samples_per_point = est_min_samples;

                if (!est_inputs.empty()) {
                    bool first = true;
                    for (const auto& path : est_inputs) {
                        LoadedBatch loaded = read_batch(path);
                        if (first) {
                            c = loaded.constellation;
                            first = false;
                        } else if (loaded.constellation.size_2d() != c.size_2d()) {
                            throw std::runtime_error(path +
                                                     ": constellation differs from the first input");
                        }
                        batches.push_back(std::move(loaded.batch));
                        echo.push_back("input=" + path);
                    }
                } else {
                    const ChannelScenario sc = est_flags.build();
                    for (int b = 0; b < est_batches; ++b)
                        batches.push_back(simulate(c, sc, static_cast<std::uint32_t>(b)));
                    echo.push_back("scenario=" + sc.text());
                    echo.push_back("batches=" + std::to_string(est_batches));
                }
            }
            if (batches.empty()) throw std::runtime_error("estimate: no input data");

            echo.push_back("constellation=" + c.name);
            echo.push_back("split_ratio=" + format_double(opts.split_ratio));
            echo.push_back("split_seed=" + std::to_string(opts.split_seed));
            if (opts.train_equals_eval) echo.push_back("train_equals_eval=1");

            std::vector<ResultRow> rows;
            std::vector<std::string> failures;
            auto run_one = [&](const ModelKind& kind, Estimator estimator) {
                try {
                    const RateEstimate e = double_monte_carlo(batches, kind, estimator, c, opts);
                    rows.push_back(to_row(e, batches[0].meta.scenario, e.train_counts[0],
                                          e.eval_counts[0], batches[0].meta.seed));
                    if (e.negative)
                        std::cerr << "warning: " << kind.name() << "/" << to_string(estimator)
                                  << " produced a negative rate (strong model mismatch)\n";
                } catch (const std::exception& ex) {
                    failures.push_back(kind.name() + "/" + to_string(estimator) + ": " +
                                       ex.what());
                }
            };
            if (want_mi)
                for (const auto& kind : kinds) run_one(kind, Estimator::Mi);
            if (want_gmi)
                for (const auto& [d, mode] : gmis)
                    run_one(ModelKind{d, mode, CovMode::Iid}, Estimator::Gmi);

            print_rows(rows, std::cout);
            if (!csv_path.empty()) {
                const std::string path = resolve_output(csv_path);
                write_results_csv(rows, echo, path);
                std::cout << "wrote " << path << "\n";
            }
            if (!failures.empty()) {
                std::cerr << failures.size() << " estimate(s) failed:\n";
                for (const auto& f : failures) std::cerr << "  " << f << "\n";
                return 1;
            }
            return 0;
        }

        if (*sweep) {
            if (sweep_snr_grid.empty() == sweep_gamma_grid.empty())
                throw std::runtime_error("sweep: give exactly one of --snr-grid, --gamma-grid");
            const Constellation c = build_qam(16);
            SweepSpec spec;
            spec.mi_kinds.clear();
            std::istringstream es(sweep_estimators);
            std::string name;
            bool want_mi = false, want_gmi = false;
            while (std::getline(es, name, ',')) {
                if (name == "mi")
                    want_mi = true;
                else if (name == "gmi")
                    want_gmi = true;
                else
                    throw std::runtime_error("unknown estimator '" + name + "'");
            }
            if (want_mi) spec.mi_kinds = parse_models(sweep_models);
            if (want_gmi) spec.gmi_variants = gmi_variants(sweep_gmi_means);
            spec.n_batches = sweep_batches;
            spec.options.split_ratio = sweep_split_ratio;
            spec.options.split_seed = sweep_split_seed;
            spec.options.fit.min_samples_per_point = sweep_min_samples;
            spec.parallel = !sweep_serial;

            const bool over_snr = !sweep_snr_grid.empty();
            const auto grid = parse_grid(over_snr ? sweep_snr_grid : sweep_gamma_grid);
            for (double v : grid) {
                ScenarioFlags f = sweep_flags;
                if (over_snr)
                    f.snr = v;
                else {
                    f.kind = "nl_phase";
                    f.gamma = v;
                }
                spec.scenarios.push_back(f.build());
            }

            const std::vector<ResultRow> rows = rate_sweep(c, spec);
            print_rows(rows, std::cout);
            std::vector<std::string> echo = {
                "sweep=" + std::string(over_snr ? "snr" : "gamma"),
                "grid=" + (over_snr ? sweep_snr_grid : sweep_gamma_grid),
                "batches=" + std::to_string(sweep_batches),
                "split_ratio=" + format_double(sweep_split_ratio),
                "split_seed=" + std::to_string(sweep_split_seed)};
            if (!sweep_csv.empty()) {
                const std::string path = resolve_output(sweep_csv);
                write_results_csv(rows, echo, path);
                std::cout << "wrote " << path << "\n";
            }
            return 0;
        }

        if (*report) {
            if (!report_constellation.empty()) {
                std::cout << export_text(constellation_from_name(report_constellation));
                return 0;
            }
            if (!report_batch.empty()) {
                const LoadedBatch loaded = read_batch(report_batch);
                std::cout << "file         " << report_batch << "\n"
                          << "constellation " << loaded.constellation.name << "\n"
                          << "samples      " << loaded.batch.size() << "\n"
                          << "seed         " << loaded.batch.meta.seed << "\n"
                          << "batch id     " << loaded.batch.meta.batch_id << "\n"
                          << "scenario     " << loaded.batch.meta.scenario << "\n"
                          << "split        "
                          << (loaded.batch.meta.split.empty() ? "-" : loaded.batch.meta.split)
                          << "\n";
                return 0;
            }
            if (!report_input.empty()) {
                std::ifstream in(report_input);
                if (!in) throw std::runtime_error(report_input + ": cannot open");
                std::vector<std::vector<std::string>> table;
                std::vector<std::size_t> widths;
                std::string line;
                while (std::getline(in, line)) {
                    if (line.empty() || line[0] == '#') continue;
                    std::istringstream is(line);
                    std::string field;
                    std::vector<std::string> row;
                    while (std::getline(is, field, ',')) {
                        if (widths.size() <= row.size()) widths.push_back(0);
                        widths[row.size()] = std::max(widths[row.size()], field.size());
                        row.push_back(field);
                    }
                    table.push_back(std::move(row));
                }
                for (const auto& row : table) {
                    for (std::size_t i = 0; i < row.size(); ++i)
                        std::cout << std::left
                                  << std::setw(static_cast<int>(widths[i]) + 2) << row[i];
                    std::cout << "\n";
                }
                return 0;
            }
            throw std::runtime_error("report: give one of --input, --batch, --constellation");
        }

        if (*selftest) return run_selftest(std::cout);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}

namespace {

int run_selftest(std::ostream& os) {
    int failures = 0;
    const auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
        os << (ok ? "[PASS] " : "[FAIL] ") << name;
        if (!detail.empty()) os << "  (" << detail << ")";
        os << "\n";
        if (!ok) ++failures;
    };

    // Counter RNG known-answer vectors.
    {
        const auto r0 = philox4x32({0, 0, 0, 0}, {0, 0});
        const auto r1 = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                   {0xffffffffu, 0xffffffffu});
        check("philox known-answer vectors",
              r0 == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu,
                                                 0x9b00dbd8u} &&
                  r1 == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u,
                                                     0x6d5451fdu});
    }

    // Constellation energy and Gray adjacency.
    {
        const Constellation c = build_qam(16);
        bool gray_ok = true;
        int pairs = 0;
        for (int i = 0; i < 4; ++i)
            for (int q = 0; q < 4; ++q) {
                const int j = i * 4 + q;
                if (q + 1 < 4) {
                    ++pairs;
                    gray_ok &= __builtin_popcount(c.labels[static_cast<std::size_t>(j)] ^
                                                  c.labels[static_cast<std::size_t>(j) + 1]) == 1;
                }
                if (i + 1 < 4) {
                    ++pairs;
                    gray_ok &= __builtin_popcount(c.labels[static_cast<std::size_t>(j)] ^
                                                  c.labels[static_cast<std::size_t>(j + 4)]) == 1;
                }
            }
        check("16QAM unit energy", std::abs(c.average_energy_2d() - 1.0) < 1e-12);
        check("16QAM Gray adjacency", gray_ok && pairs == 24,
              std::to_string(pairs) + " pairs");
    }

    // Quadrature oracle against an independently computed constant.
    {
        ChannelScenario sc;
        sc.snr_db_per_2d = 12.0;
        const double mi = true_rate_oracle(build_qam(16), sc) / 2.0;
        check("awgn quadrature oracle at 12 dB", std::abs(mi - 3.579405679) < 1e-6,
              "got " + format_double(mi));
    }

    // Parameter estimators on a hand-computed micro-batch.
    {
        const std::vector<int> cls = {0, 0, 1, 1};
        const std::vector<double> y = {1, 2, 3, 4, -2, 5, 2, 5};
        const auto means = conditional_means(2, 2, cls, y);
        const double s2 = pooled_variance(2, 2, cls, y, means);
        const auto covs = conditional_covariances(2, 2, cls, y, means);
        check("conditional mean / pooled variance / covariance fixtures",
              means[0] == 2.0 && means[1] == 3.0 && means[2] == 0.0 && means[3] == 5.0 &&
                  s2 == 2.0 && covs[0] == 2.0 && covs[1] == 2.0 && covs[3] == 2.0 &&
                  covs[4] == 8.0 && covs[5] == 0.0 && covs[7] == 0.0);
    }

    // Degrees of freedom of the five model kinds.
    {
        const auto report = dof_report(build_qam(16));
        check("model degrees of freedom",
              report.at("1D-iidG") == 20 && report.at("2D-iidG") == 2 &&
                  report.at("2D-CG") == 160 && report.at("4D-iidG") == 1025 &&
                  report.at("4D-CG") == 3584);
    }

    // End-to-end estimate against the oracle on a small batch.
    {
        const Constellation c = build_qam(16);
        ChannelScenario sc;
        sc.snr_db_per_2d = 12.0;
        sc.n = 40000;
        sc.seed = 99;
        std::vector<SymbolBatch> batches = {simulate(c, sc, 0)};
        const RateEstimate est =
            double_monte_carlo(batches, ModelKind::parse("2D-iidG"), Estimator::Mi, c);
        const double truth = true_rate_oracle(c, sc);
        check("2D-iidG estimate vs oracle (40k samples)",
              std::abs(est.rate_bit_per_4d - truth) < 0.05,
              "estimate " + format_double(est.rate_bit_per_4d) + ", oracle " +
                  format_double(truth));
    }

    os << (failures == 0 ? "selftest: all checks passed\n"
                         : "selftest: " + std::to_string(failures) + " check(s) FAILED\n");
    return failures == 0 ? 0 : 1;
}

}  // namespace

}  // namespace airkit
