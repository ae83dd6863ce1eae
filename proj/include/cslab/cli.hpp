#pragma once

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cslab/certificates.hpp"
#include "cslab/ensembles.hpp"
#include "cslab/experiments.hpp"
#include "cslab/l1solver.hpp"
#include "cslab/signals.hpp"

namespace cslab {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Command {
    none,
    recover,
    audit_uup,
    audit_erp,
    audit_werp,
    phase,
    scaling,
    concentration,
    encode_decode,
};

struct RunConfig {
    Command command = Command::none;
    std::string out_dir = ".";
    std::string output = "out.csv";
    std::uint64_t seed = 0;
    std::size_t workers = 1;

    // solver tolerance overrides
    double feas_tol = 1e-9;
    double gap_tol = 1e-9;
    int max_iterations = 200;
    double presolve_tol = 1e-10;

    // ensemble / grid parameters
    std::string ensemble = "gaussian";
    std::size_t n = 0;
    std::vector<std::size_t> k_values;
    double tau = 0.0;  // 0 means derive from K/N
    std::vector<std::size_t> sparsities;
    std::vector<double> p_values;
    double radius = 1.0;
    std::size_t trials = 100;

    // audit parameters
    double alpha = 1.0;
    double lambda_factor = 1.0;
    double lower = 0.5, upper = 1.5;
    bool check_lower = true;
    std::string mode = "auto";
    std::size_t support_size = 1;
    double threshold = 0.5;
    double gamma = 1.0;

    // io + encode-decode parameters
    std::string matrix_file;
    std::string measurements_file;
    std::string signal_file;
    std::string csv_ensemble = "gaussian";
    double expected_k = 0.0;
    double q = 0.0;
    double drop = 0.0;

    // concentration suite
    std::string suite = "sv";
    std::size_t rows_n = 200;
    std::size_t cols_p = 50;

    nlohmann::json echo;  // full effective configuration for the manifest
};

namespace detail {

// "2..24..2" expands to {2, 4, ..., 24}; plain comma lists pass through.
inline std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    if (text.find("..") != std::string::npos) {
        std::size_t first = 0, last = 0, step = 1;
        const auto a = text.find("..");
        const auto b = text.find("..", a + 2);
        first = std::stoul(text.substr(0, a));
        if (b == std::string::npos) {
            last = std::stoul(text.substr(a + 2));
        } else {
            last = std::stoul(text.substr(a + 2, b - a - 2));
            step = std::stoul(text.substr(b + 2));
        }
        if (step == 0) throw UsageError("range step must be positive: " + text);
        for (std::size_t v = first; v <= last; v += step) out.push_back(v);
    } else {
        std::stringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) out.push_back(std::stoul(tok));
    }
    if (out.empty()) throw UsageError("empty size list: " + text);
    return out;
}

inline std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    if (out.empty()) throw UsageError("empty list: " + text);
    return out;
}

inline EnsembleKind parse_ensemble(const std::string& name) {
    if (name == "gaussian") return EnsembleKind::gaussian;
    if (name == "binary") return EnsembleKind::binary;
    if (name == "fourier") return EnsembleKind::fourier;
    throw UsageError("unknown ensemble: " + name);
}

inline std::string joined_path(const std::string& dir, const std::string& name) {
    if (name.empty()) throw UsageError("empty output path");
    if (name.front() == '/') return name;
    if (dir.empty() || dir == ".") return name;
    return dir + "/" + name;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    return os;
}

}  // namespace detail

// Builds the full CLI, parses, and validates. Throws UsageError on bad
// input; the caller maps that to exit code 2.
inline RunConfig parse_config(const std::vector<std::string>& args) {
    RunConfig cfg;
    CLI::App app{"compressed-sensing recovery experiments"};
    app.require_subcommand(1);

    std::string k_list_text, sparsity_text, p_list_text, config_file;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_file,
                        "flat key=value file with keys matching the long options; flags win");
        sub->add_option("--out-dir", cfg.out_dir, "output directory")->envname("CSLAB_OUT_DIR");
        sub->add_option("-o,--output", cfg.output, "output file");
        sub->add_option("--seed", cfg.seed, "base seed");
        sub->add_option("--workers", cfg.workers, "worker threads (results identical for any value)");
        sub->add_option("--feas-tol", cfg.feas_tol, "interior-point feasibility tolerance");
        sub->add_option("--gap-tol", cfg.gap_tol, "interior-point relative gap tolerance");
        sub->add_option("--max-iter", cfg.max_iterations, "interior-point iteration cap");
        sub->add_option("--presolve-tol", cfg.presolve_tol, "rank presolve tolerance");
    };
    auto add_ensemble = [&](CLI::App* sub, bool with_k = true) {
        sub->add_option("--ensemble", cfg.ensemble, "gaussian | binary | fourier");
        sub->add_option("-N,--signal-length", cfg.n, "signal length")->check(CLI::PositiveNumber);
        if (with_k) sub->add_option("-K,--measurements-count", k_list_text, "measurement count (list or a..b..step)");
        sub->add_option("--tau", cfg.tau, "fourier sampling fraction (defaults to K/N)");
    };

    CLI::App* recover = app.add_subcommand("recover", "basis-pursuit decode of stored measurements");
    add_common(recover);
    recover->add_option("--matrix", cfg.matrix_file, "measurement matrix (.bin, or .csv)")->required();
    recover->add_option("--measurements", cfg.measurements_file, "measurement vector CSV")->required();
    recover->add_option("--csv-ensemble", cfg.csv_ensemble, "ensemble kind when --matrix is CSV");
    recover->add_option("--expected-k", cfg.expected_k, "expected measurement count for CSV matrices");

    CLI::App* uup = app.add_subcommand("audit-uup", "subset-spectrum audit");
    add_common(uup);
    add_ensemble(uup);
    uup->add_option("--alpha", cfg.alpha, "support-size multiplier");
    uup->add_option("--lambda-factor", cfg.lambda_factor, "oversampling factor in the size cap");
    uup->add_option("--lower", cfg.lower, "lower spectral bound (a)");
    uup->add_option("--upper", cfg.upper, "upper spectral bound (b)");
    uup->add_flag("--no-lower-check,!--lower-check", cfg.check_lower,
                  "report the lower edge without counting violations");
    uup->add_option("--mode", cfg.mode, "auto | exhaustive | sampled");
    uup->add_option("--trials", cfg.trials, "sampled subsets per size");

    CLI::App* erp = app.add_subcommand("audit-erp", "sign-interpolation certificate audit");
    add_common(erp);
    add_ensemble(erp);
    erp->add_option("--support-size", cfg.support_size, "support size per trial");
    erp->add_option("--trials", cfg.trials, "Monte-Carlo trials");
    erp->add_option("--threshold", cfg.threshold, "off-support bound");

    CLI::App* werp = app.add_subcommand("audit-werp", "column-correlation audit");
    add_common(werp);
    add_ensemble(werp);
    werp->add_option("--support-size", cfg.support_size, "support size per trial");
    werp->add_option("--trials", cfg.trials, "Monte-Carlo trials");
    werp->add_option("--gamma", cfg.gamma, "correlation bound multiplier");

    CLI::App* phase = app.add_subcommand("phase", "exact-recovery probability curve");
    add_common(phase);
    add_ensemble(phase);
    phase->add_option("--sparsity", sparsity_text, "sparsity grid (list or a..b..step)")->required();
    phase->add_option("--trials", cfg.trials, "trials per cell");

    CLI::App* scaling = app.add_subcommand("scaling", "weak-lp error scaling and slope fit");
    add_common(scaling);
    add_ensemble(scaling);
    scaling->add_option("--p", p_list_text, "weak-lp exponents, comma list")->required();
    scaling->add_option("-R,--radius", cfg.radius, "weak-lp radius");
    scaling->add_option("--trials", cfg.trials, "trials per cell");

    CLI::App* conc = app.add_subcommand("concentration", "concentration suites");
    add_common(conc);
    conc->add_option("--suite", cfg.suite, "sv | omega | xnorm")->required();
    conc->add_option("-n,--rows", cfg.rows_n, "matrix rows (sv suite)");
    conc->add_option("-p,--cols", cfg.cols_p, "matrix columns (sv suite)");
    conc->add_option("--tau", cfg.tau, "sampling fraction (omega suite)");
    conc->add_option("-N,--signal-length", cfg.n, "signal length (omega and xnorm suites)");
    conc->add_option("--trials", cfg.trials, "Monte-Carlo trials");

    CLI::App* codec = app.add_subcommand("encode-decode",
                                         "measure, quantize, optionally drop coefficients, decode");
    add_common(codec);
    add_ensemble(codec);
    codec->add_option("--signal", cfg.signal_file, "input signal CSV")->required();
    codec->add_option("--q", cfg.q, "quantization step")->required()->check(CLI::PositiveNumber);
    codec->add_option("--drop", cfg.drop, "fraction of (k, y_k) pairs to drop")
        ->check(CLI::Range(0.0, 0.999));

    // Flat key=value config merge: file values only fill options the command
    // line left unset, and unknown keys are rejected by name.
    std::vector<std::string> merged = args;
    {
        std::string file;
        for (std::size_t i = 1; i < args.size(); ++i) {
            if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
            else if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
        }
        if (!file.empty()) {
            if (args.empty() || args[0].empty() || args[0][0] == '-')
                throw UsageError("--config requires a leading subcommand");
            CLI::App* sub = app.get_subcommand_no_throw(args[0]);
            if (sub == nullptr) throw UsageError("unknown command: " + args[0]);
            std::ifstream is(file);
            if (!is) throw UsageError("cannot open config file: " + file);
            std::vector<std::string> injected;
            std::string line;
            while (std::getline(is, line)) {
                if (line.empty() || line[0] == '#' || line[0] == ';') continue;
                const auto eq = line.find('=');
                if (eq == std::string::npos) throw UsageError("malformed config line: " + line);
                const std::string key = line.substr(0, eq);
                const std::string value = line.substr(eq + 1);
                const CLI::Option* opt = sub->get_option_no_throw("--" + key);
                if (opt == nullptr) throw UsageError("unknown config key: " + key);
                bool overridden = false;
                for (std::size_t i = 1; i < args.size() && !overridden; ++i) {
                    for (const auto& lname : opt->get_lnames())
                        if (args[i] == "--" + lname || args[i].rfind("--" + lname + "=", 0) == 0)
                            overridden = true;
                    for (const auto& sname : opt->get_snames())
                        if (args[i] == "-" + sname || args[i].rfind("-" + sname + "=", 0) == 0)
                            overridden = true;
                }
                if (!overridden) injected.push_back("--" + key + "=" + value);
            }
            merged.clear();
            merged.push_back(args[0]);
            merged.insert(merged.end(), injected.begin(), injected.end());
            merged.insert(merged.end(), args.begin() + 1, args.end());
        }
    }

    std::vector<const char*> argv;
    argv.push_back("cslab");
    for (const auto& a : merged) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        std::stringstream help;
        help << app.help();
        throw UsageError(help.str());
    } catch (const CLI::ParseError& e) {
        std::stringstream msg;
        msg << e.what() << "\n\n" << app.help();
        throw UsageError(msg.str());
    }

    if (recover->parsed()) cfg.command = Command::recover;
    if (uup->parsed()) cfg.command = Command::audit_uup;
    if (erp->parsed()) cfg.command = Command::audit_erp;
    if (werp->parsed()) cfg.command = Command::audit_werp;
    if (phase->parsed()) cfg.command = Command::phase;
    if (scaling->parsed()) cfg.command = Command::scaling;
    if (conc->parsed()) cfg.command = Command::concentration;
    if (codec->parsed()) cfg.command = Command::encode_decode;

    if (!k_list_text.empty()) cfg.k_values = detail::parse_size_list(k_list_text);
    if (!sparsity_text.empty()) cfg.sparsities = detail::parse_size_list(sparsity_text);
    if (!p_list_text.empty()) cfg.p_values = detail::parse_double_list(p_list_text);

    const bool needs_ensemble = cfg.command == Command::audit_uup || cfg.command == Command::audit_erp ||
                                cfg.command == Command::audit_werp || cfg.command == Command::phase ||
                                cfg.command == Command::scaling || cfg.command == Command::encode_decode;
    if (needs_ensemble) {
        detail::parse_ensemble(cfg.ensemble);  // validate name
        if (cfg.command != Command::encode_decode && cfg.n == 0)
            throw UsageError("missing or invalid -N (signal length)");
        if (cfg.k_values.empty() && cfg.tau <= 0.0)
            throw UsageError("need -K or --tau");
        for (std::size_t k : cfg.k_values)
            if (cfg.n > 0 && (k == 0 || k > cfg.n)) throw UsageError("K out of range");
    }
    if (cfg.command == Command::concentration && cfg.suite != "sv" && cfg.suite != "omega" &&
        cfg.suite != "xnorm")
        throw UsageError("unknown suite: " + cfg.suite);
    if (cfg.trials == 0) throw UsageError("--trials must be positive");

    cfg.echo = {{"out_dir", cfg.out_dir},
                {"output", cfg.output},
                {"seed", cfg.seed},
                {"workers", cfg.workers},
                {"feas_tol", cfg.feas_tol},
                {"gap_tol", cfg.gap_tol},
                {"max_iterations", cfg.max_iterations},
                {"presolve_tol", cfg.presolve_tol},
                {"ensemble", cfg.ensemble},
                {"N", cfg.n},
                {"K", cfg.k_values},
                {"tau", cfg.tau},
                {"sparsities", cfg.sparsities},
                {"p", cfg.p_values},
                {"radius", cfg.radius},
                {"trials", cfg.trials},
                {"alpha", cfg.alpha},
                {"lambda_factor", cfg.lambda_factor},
                {"bounds", {cfg.lower, cfg.upper}},
                {"check_lower", cfg.check_lower},
                {"mode", cfg.mode},
                {"support_size", cfg.support_size},
                {"threshold", cfg.threshold},
                {"gamma", cfg.gamma},
                {"q", cfg.q},
                {"drop", cfg.drop},
                {"suite", cfg.suite}};
    return cfg;
}

namespace detail {

inline BpOptions bp_options(const RunConfig& cfg) {
    BpOptions opts;
    opts.ip.feas_tol = cfg.feas_tol;
    opts.ip.gap_tol = cfg.gap_tol;
    opts.ip.max_iterations = cfg.max_iterations;
    opts.presolve_tol = cfg.presolve_tol;
    return opts;
}

inline Measurement draw_for(const RunConfig& cfg, std::size_t n, std::size_t k, Seed seed) {
    const EnsembleKind kind = parse_ensemble(cfg.ensemble);
    if (kind == EnsembleKind::fourier) {
        const double tau = cfg.tau > 0 ? cfg.tau : static_cast<double>(k) / static_cast<double>(n);
        return fourier_ensemble(n, tau, seed);
    }
    return kind == EnsembleKind::gaussian ? gaussian_ensemble(n, k, seed) : binary_ensemble(n, k, seed);
}

inline CVector read_measurement_csv(const std::string& path, bool complex_rows) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open measurements file: " + path);
    CVector y;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        Vector fields;
        while (std::getline(ss, tok, ',')) fields.push_back(std::stod(tok));
        if (complex_rows) {
            if (fields.size() != 2) throw std::runtime_error("expected re,im per measurement row");
            y.push_back({fields[0], fields[1]});
        } else {
            if (fields.size() != 1) throw std::runtime_error("expected one field per measurement row");
            y.push_back({fields[0], 0.0});
        }
    }
    return y;
}

inline void write_manifest(const RunConfig& cfg, const std::string& command, double wall_seconds,
                           const std::vector<std::string>& outputs) {
    nlohmann::json params = cfg.echo;
    params["outputs"] = outputs;
    nlohmann::json manifest = make_manifest(command, params, Seed{cfg.seed, 0}, wall_seconds);
    auto os = open_out(joined_path(cfg.out_dir, cfg.output) + ".manifest.json");
    os << manifest.dump(2) << "\n";
}

inline int run_recover(const RunConfig& cfg) {
    Measurement m;
    if (cfg.matrix_file.size() > 4 && cfg.matrix_file.substr(cfg.matrix_file.size() - 4) == ".csv") {
        std::ifstream is(cfg.matrix_file);
        if (!is) throw std::runtime_error("cannot open matrix file: " + cfg.matrix_file);
        m = read_matrix_csv(is, parse_ensemble(cfg.csv_ensemble), cfg.expected_k);
    } else {
        std::ifstream is(cfg.matrix_file, std::ios::binary);
        if (!is) throw std::runtime_error("cannot open matrix file: " + cfg.matrix_file);
        m = read_matrix_binary(is);
    }
    CVector y = read_measurement_csv(cfg.measurements_file, m.complex_rows());
    Recovery rec = solve_bp(m, y, bp_options(cfg));

    const std::string out_path = joined_path(cfg.out_dir, cfg.output);
    auto os = open_out(out_path);
    write_signal_csv(os, rec.fsharp);
    std::cout << "status=" << status_name(rec.status) << "\n"
              << "l1_value=" << format_double(rec.l1_value) << "\n"
              << "duality_gap=" << format_double(rec.duality_gap) << "\n"
              << "primal_residual=" << format_double(rec.primal_residual) << "\n";
    return rec.status == SolveStatus::optimal ? 0 : 1;
}

inline int run_audit_uup(const RunConfig& cfg) {
    const std::size_t k = cfg.k_values.empty()
                              ? static_cast<std::size_t>(cfg.tau * static_cast<double>(cfg.n))
                              : cfg.k_values.front();
    Measurement m = draw_for(cfg, cfg.n, k, Seed{cfg.seed, 0});
    UupOptions opts;
    opts.alpha = cfg.alpha;
    opts.lambda_factor = cfg.lambda_factor;
    opts.lower = cfg.lower;
    opts.upper = cfg.upper;
    opts.check_lower = cfg.check_lower;
    opts.sample_trials = cfg.trials;
    opts.workers = cfg.workers;
    opts.mode = cfg.mode == "exhaustive" ? AuditMode::exhaustive
                : cfg.mode == "sampled"  ? AuditMode::sampled
                                         : AuditMode::automatic;
    UupReport rep = uup_audit(m, opts, Seed{cfg.seed, 1});

    const std::string out_path = joined_path(cfg.out_dir, cfg.output);
    {
        auto os = open_out(out_path);
        write_uup_csv(os, rep);
    }
    {
        auto os = open_out(out_path + ".summary.json");
        write_uup_summary_json(os, rep);
    }
    std::cout << "subsets=" << rep.per_subset.size() << " violations=" << rep.violations
              << " min_normalized=" << format_double(rep.min_normalized)
              << " max_normalized=" << format_double(rep.max_normalized) << "\n";
    return 0;
}

inline int run_audit_erp(const RunConfig& cfg) {
    const std::size_t k = cfg.k_values.empty()
                              ? static_cast<std::size_t>(cfg.tau * static_cast<double>(cfg.n))
                              : cfg.k_values.front();
    ResultTable table;
    std::size_t passes = 0, failures = 0;
    std::vector<double> margins(cfg.trials, 0.0);
    std::vector<int> ok(cfg.trials, 0);
    parallel_for(cfg.trials, cfg.workers, [&](std::size_t trial) {
        Seed seed{cfg.seed, trial};
        Measurement m = draw_for(cfg, cfg.n, k, seed);
        CounterRng rng(seed.derived(0xe7000000u));
        auto support = rng.sample_without_replacement(cfg.n, cfg.support_size);
        Vector signs(cfg.support_size);
        for (auto& s : signs) s = rng.next_sign();
        try {
            ErpCertificate cert = erp_certificate(m, support, signs);
            ErpAudit audit = erp_audit(cert, cfg.threshold);
            margins[trial] = audit.margin;
            ok[trial] = audit.pass ? 1 : 0;
        } catch (const SingularGram&) {
            ok[trial] = -1;
        }
    });
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        std::ostringstream cell;
        cell << "trial=" << t;
        table.add(cell.str(), "margin", margins[t]);
        table.add(cell.str(), "pass", ok[t] == 1 ? 1.0 : 0.0);
        if (ok[t] == 1) ++passes;
        if (ok[t] == -1) ++failures;
    }
    std::ostringstream summary;
    summary << "ensemble=" << cfg.ensemble << ";N=" << cfg.n << ";K=" << k
            << ";support=" << cfg.support_size;
    const double rate = static_cast<double>(passes) / static_cast<double>(cfg.trials);
    table.add(summary.str(), "pass_rate", rate, detail::binomial_stderr(rate, cfg.trials));
    table.add(summary.str(), "singular_gram_failures", static_cast<double>(failures));

    auto os = open_out(joined_path(cfg.out_dir, cfg.output));
    write_result_csv(os, table);
    std::cout << "pass_rate=" << format_double(rate) << "\n";
    return 0;
}

inline int run_audit_werp(const RunConfig& cfg) {
    const std::size_t k = cfg.k_values.empty()
                              ? static_cast<std::size_t>(cfg.tau * static_cast<double>(cfg.n))
                              : cfg.k_values.front();
    ResultTable table;
    std::vector<double> ratios(cfg.trials, 0.0);
    std::vector<int> ok(cfg.trials, 0);
    parallel_for(cfg.trials, cfg.workers, [&](std::size_t trial) {
        Seed seed{cfg.seed, trial};
        Measurement m = draw_for(cfg, cfg.n, k, seed);
        CounterRng rng(seed.derived(0x3e790000u));
        auto support = rng.sample_without_replacement(cfg.n, cfg.support_size);
        WerpReport rep = werp_audit(m, support, cfg.gamma);
        ratios[trial] = rep.worst_ratio;
        ok[trial] = rep.pass ? 1 : 0;
    });
    std::size_t passes = 0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        std::ostringstream cell;
        cell << "trial=" << t;
        table.add(cell.str(), "worst_ratio", ratios[t]);
        table.add(cell.str(), "pass", ok[t]);
        passes += ok[t] == 1;
    }
    std::ostringstream summary;
    summary << "ensemble=" << cfg.ensemble << ";N=" << cfg.n << ";K=" << k
            << ";support=" << cfg.support_size << ";gamma=" << format_double(cfg.gamma);
    const double rate = static_cast<double>(passes) / static_cast<double>(cfg.trials);
    table.add(summary.str(), "pass_rate", rate, detail::binomial_stderr(rate, cfg.trials));

    auto os = open_out(joined_path(cfg.out_dir, cfg.output));
    write_result_csv(os, table);
    std::cout << "pass_rate=" << format_double(rate) << "\n";
    return 0;
}

inline TrialGrid grid_from(const RunConfig& cfg) {
    TrialGrid grid;
    grid.ensemble = parse_ensemble(cfg.ensemble);
    grid.signal_length = cfg.n;
    grid.k_values = cfg.k_values;
    if (grid.k_values.empty() && cfg.tau > 0)
        grid.k_values = {static_cast<std::size_t>(cfg.tau * static_cast<double>(cfg.n))};
    grid.sparsities = cfg.sparsities;
    grid.p_values = cfg.p_values;
    grid.radius = cfg.radius;
    grid.trials_per_cell = cfg.trials;
    grid.base_seed = Seed{cfg.seed, 0};
    grid.workers = cfg.workers;
    grid.bp = bp_options(cfg);
    return grid;
}

inline int run_phase(const RunConfig& cfg) {
    ResultTable table = exact_recovery_curve(grid_from(cfg));
    auto os = open_out(joined_path(cfg.out_dir, cfg.output));
    write_result_csv(os, table);
    return 0;
}

inline int run_scaling(const RunConfig& cfg) {
    ResultTable table = error_scaling(grid_from(cfg));
    auto os = open_out(joined_path(cfg.out_dir, cfg.output));
    write_result_csv(os, table);
    return 0;
}

inline int run_concentration(const RunConfig& cfg) {
    ResultTable table;
    if (cfg.suite == "sv") {
        table = singular_value_concentration(cfg.rows_n, cfg.cols_p, cfg.trials, Seed{cfg.seed, 0},
                                             cfg.workers);
    } else if (cfg.suite == "omega") {
        if (cfg.n == 0 || cfg.tau <= 0) throw UsageError("omega suite needs -N and --tau");
        table = omega_concentration(cfg.n, cfg.tau, cfg.trials, Seed{cfg.seed, 0}, cfg.workers);
    } else {
        if (cfg.n == 0) throw UsageError("xnorm suite needs -N");
        Vector flat(cfg.n, 1.0 / std::sqrt(static_cast<double>(cfg.n)));
        table = xnorm_concentration(flat, cfg.trials, Seed{cfg.seed, 0}, cfg.workers);
    }
    auto os = open_out(joined_path(cfg.out_dir, cfg.output));
    write_result_csv(os, table);
    return 0;
}

inline int run_encode_decode(const RunConfig& cfg) {
    std::ifstream is(cfg.signal_file);
    if (!is) throw std::runtime_error("cannot open signal file: " + cfg.signal_file);
    Vector f = read_signal_csv(is);
    if (f.empty()) throw std::runtime_error("empty signal file");
    const std::size_t n = f.size();
    const std::size_t k = cfg.k_values.empty()
                              ? static_cast<std::size_t>(cfg.tau * static_cast<double>(n))
                              : cfg.k_values.front();
    Measurement m = draw_for(cfg, n, k, Seed{cfg.seed, 0});

    CVector y = measure(m, f);
    CVector y_q(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        y_q[i] = {std::round(y[i].real() / cfg.q) * cfg.q, std::round(y[i].imag() / cfg.q) * cfg.q};

    // simulated coefficient loss: drop an exact fraction of the (k, y_k)
    // pairs, uniformly at random
    Measurement carrier = m;
    if (cfg.drop > 0.0) {
        const std::size_t keep = m.row_count() - static_cast<std::size_t>(cfg.drop * m.row_count());
        if (keep == 0) throw UsageError("--drop leaves no measurements");
        CounterRng rng(Seed{cfg.seed, 0}.derived(0xd20b0000u));
        auto kept_rows = rng.sample_without_replacement(m.row_count(), keep);
        carrier = select_rows(m, kept_rows);
        CVector y_kept(keep);
        for (std::size_t i = 0; i < keep; ++i) y_kept[i] = y_q[kept_rows[i]];
        y_q = std::move(y_kept);
    }

    Recovery rec = solve_bp_quantized(carrier, y_q, cfg.q, bp_options(cfg));
    double err_sq = 0.0;
    for (std::size_t t = 0; t < n; ++t) err_sq += (rec.fsharp[t] - f[t]) * (rec.fsharp[t] - f[t]);
    const double distortion = std::sqrt(err_sq);

    ResultTable table;
    std::ostringstream cell;
    cell << "ensemble=" << cfg.ensemble << ";N=" << n << ";K=" << k << ";q=" << format_double(cfg.q)
         << ";drop=" << format_double(cfg.drop);
    table.add(cell.str(), "distortion_l2", distortion);
    table.add(cell.str(), "distortion_l2_relative", distortion / std::max(norm2(f), 1e-300));
    table.add(cell.str(), "received_measurements", static_cast<double>(y_q.size()));
    table.add(cell.str(), "l1_value", rec.l1_value);
    table.add(cell.str(), "duality_gap", rec.duality_gap);

    const std::string out_path = joined_path(cfg.out_dir, cfg.output);
    {
        auto os = open_out(out_path);
        write_result_csv(os, table);
    }
    {
        auto os = open_out(out_path + ".fsharp.csv");
        write_signal_csv(os, rec.fsharp);
    }
    std::cout << "distortion_l2=" << format_double(distortion) << "\n"
              << "status=" << status_name(rec.status) << "\n";
    return rec.status == SolveStatus::optimal ? 0 : 1;
}

}  // namespace detail

// Executes a parsed configuration. Returns the process exit code.
inline int dispatch(const RunConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    int code = 2;
    std::string name;
    switch (cfg.command) {
        case Command::recover: name = "recover"; code = detail::run_recover(cfg); break;
        case Command::audit_uup: name = "audit-uup"; code = detail::run_audit_uup(cfg); break;
        case Command::audit_erp: name = "audit-erp"; code = detail::run_audit_erp(cfg); break;
        case Command::audit_werp: name = "audit-werp"; code = detail::run_audit_werp(cfg); break;
        case Command::phase: name = "phase"; code = detail::run_phase(cfg); break;
        case Command::scaling: name = "scaling"; code = detail::run_scaling(cfg); break;
        case Command::concentration: name = "concentration"; code = detail::run_concentration(cfg); break;
        case Command::encode_decode: name = "encode-decode"; code = detail::run_encode_decode(cfg); break;
        case Command::none: throw UsageError("no command given");
    }
    const double wall =
        std::chrono::duration_cast<std::chrono::duration<double>>(std::chrono::steady_clock::now() - start)
            .count();
    detail::write_manifest(cfg, name, wall, {detail::joined_path(cfg.out_dir, cfg.output)});
    return code;
}

inline int run_cli(const std::vector<std::string>& args) {
    try {
        RunConfig cfg = parse_config(args);
        return dispatch(cfg);
    } catch (const UsageError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const InconsistentConstraints& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cslab
