#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cslab/certificates.hpp"
#include "cslab/common.hpp"
#include "cslab/ensembles.hpp"
#include "cslab/l1solver.hpp"
#include "cslab/parallel.hpp"
#include "cslab/signals.hpp"

namespace cslab {

inline constexpr const char* kVersion = "0.1.0";

struct ResultRow {
    std::string cell;
    std::string statistic;
    double value = 0.0;
    double stderr_value = 0.0;
};

struct ResultTable {
    std::vector<ResultRow> rows;

    void add(std::string cell, std::string statistic, double value, double se = 0.0) {
        rows.push_back({std::move(cell), std::move(statistic), value, se});
    }
};

inline void write_result_csv(std::ostream& os, const ResultTable& table) {
    os << "cell,statistic,value,stderr\n";
    for (const auto& r : table.rows)
        os << r.cell << "," << r.statistic << "," << format_double(r.value) << ","
           << format_double(r.stderr_value) << "\n";
}

struct TrialGrid {
    EnsembleKind ensemble = EnsembleKind::gaussian;
    std::size_t signal_length = 0;
    std::vector<std::size_t> k_values;   // Fourier cells use tau = K/N
    std::vector<std::size_t> sparsities; // recovery grid
    std::vector<double> p_values;        // weak-lp grid
    double radius = 1.0;
    std::size_t trials_per_cell = 1;
    Seed base_seed;
    std::size_t workers = 1;
    BpOptions bp;
};

namespace detail {

// Trial seeds depend only on the trial index, never on the grid cell, so
// signals and measurement draws are paired across cells (and nested across
// K, since generation fills row-major from a counter).
inline Seed signal_seed(Seed base, std::size_t trial) { return base.derived(0x51000000u + trial); }
inline Seed matrix_seed(Seed base, std::size_t trial) { return base.derived(0x3a000000u + trial); }

inline Measurement draw_measurement(EnsembleKind kind, std::size_t n, std::size_t k, Seed seed) {
    switch (kind) {
        case EnsembleKind::gaussian: return gaussian_ensemble(n, k, seed);
        case EnsembleKind::binary: return binary_ensemble(n, k, seed);
        case EnsembleKind::fourier:
            return fourier_ensemble(n, static_cast<double>(k) / static_cast<double>(n), seed);
    }
    throw std::invalid_argument("draw_measurement: unknown ensemble");
}

inline double median_of(Vector v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline double mean_of(const Vector& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double stderr_of_mean(const Vector& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// large-sample stderr of the sample median under approximate normality
inline double stderr_of_median(const Vector& v) { return 1.2533 * stderr_of_mean(v); }

inline double binomial_stderr(double p, std::size_t n) {
    if (n == 0) return 0.0;
    return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

}  // namespace detail

// --------------------------------------------------------------------------
// Exact-recovery phase curve: success frequency of basis pursuit per
// (K, sparsity) cell, success meaning sup-norm error at most 1e-6.

inline constexpr double kExactRecoveryThreshold = 1e-6;

inline ResultTable exact_recovery_curve(const TrialGrid& grid) {
    ResultTable table;
    const std::size_t n = grid.signal_length;
    for (std::size_t k : grid.k_values) {
        std::size_t transition = 0;  // first sparsity whose success rate drops below 1/2
        for (std::size_t sparsity : grid.sparsities) {
            std::vector<int> outcome(grid.trials_per_cell, 0);  // 1 success, -1 solver failure
            parallel_for(grid.trials_per_cell, grid.workers, [&](std::size_t trial) {
                auto [f, support] = sparse_signal(n, sparsity, detail::signal_seed(grid.base_seed, trial));
                Measurement m = detail::draw_measurement(grid.ensemble, n, k,
                                                         detail::matrix_seed(grid.base_seed, trial));
                Recovery rec = solve_bp(m, measure(m, f), grid.bp);
                if (rec.status != SolveStatus::optimal) {
                    outcome[trial] = -1;
                    return;
                }
                double dev = 0.0;
                for (std::size_t t = 0; t < n; ++t) dev = std::max(dev, std::abs(rec.fsharp[t] - f[t]));
                outcome[trial] = dev <= kExactRecoveryThreshold ? 1 : 0;
            });
            std::size_t successes = 0, failures = 0;
            for (int o : outcome) {
                if (o == 1) ++successes;
                if (o == -1) ++failures;
            }
            const double p = static_cast<double>(successes) / static_cast<double>(grid.trials_per_cell);
            std::ostringstream cell;
            cell << "ensemble=" << ensemble_name(grid.ensemble) << ";N=" << n << ";K=" << k
                 << ";sparsity=" << sparsity;
            table.add(cell.str(), "success_probability", p,
                      detail::binomial_stderr(p, grid.trials_per_cell));
            table.add(cell.str(), "solver_failures", static_cast<double>(failures));
            if (transition == 0 && p < 0.5 && sparsity > 0) transition = sparsity;
        }
        std::ostringstream kcell;
        kcell << "ensemble=" << ensemble_name(grid.ensemble) << ";N=" << n << ";K=" << k;
        table.add(kcell.str(), "phase_transition_sparsity", static_cast<double>(transition));
    }
    return table;
}

// --------------------------------------------------------------------------
// Weak-lp error scaling with the fitted log-log exponent per p.

inline ResultTable error_scaling(const TrialGrid& grid) {
    ResultTable table;
    const std::size_t n = grid.signal_length;
    const double log_n = std::log(static_cast<double>(n));
    for (double p : grid.p_values) {
        Vector log_abscissa, log_median;
        for (std::size_t k : grid.k_values) {
            Vector errs(grid.trials_per_cell, -1.0);
            Vector oracle_k(grid.trials_per_cell, 0.0), oracle_keff(grid.trials_per_cell, 0.0);
            const std::size_t k_eff = static_cast<std::size_t>(static_cast<double>(k) / log_n);
            parallel_for(grid.trials_per_cell, grid.workers, [&](std::size_t trial) {
                Vector f = weak_lp_signal(n, p, grid.radius, detail::signal_seed(grid.base_seed, trial));
                Measurement m = detail::draw_measurement(grid.ensemble, n, k,
                                                         detail::matrix_seed(grid.base_seed, trial));
                Recovery rec = solve_bp(m, measure(m, f), grid.bp);
                Vector diff_k = best_k_term(f, std::min(k, n));
                Vector diff_keff = best_k_term(f, std::min(k_eff, n));
                double ok = 0.0, oe = 0.0;
                for (std::size_t t = 0; t < n; ++t) {
                    ok += (f[t] - diff_k[t]) * (f[t] - diff_k[t]);
                    oe += (f[t] - diff_keff[t]) * (f[t] - diff_keff[t]);
                }
                oracle_k[trial] = std::sqrt(ok) / grid.radius;
                oracle_keff[trial] = std::sqrt(oe) / grid.radius;
                if (rec.status != SolveStatus::optimal) return;  // flagged by errs[trial] < 0
                double e2 = 0.0;
                for (std::size_t t = 0; t < n; ++t) e2 += (rec.fsharp[t] - f[t]) * (rec.fsharp[t] - f[t]);
                errs[trial] = std::sqrt(e2) / grid.radius;
            });
            Vector ok_errs;
            std::size_t failures = 0;
            for (double e : errs) {
                if (e < 0)
                    ++failures;
                else
                    ok_errs.push_back(e);
            }
            const double med = detail::median_of(ok_errs);
            std::ostringstream cell;
            cell << "ensemble=" << ensemble_name(grid.ensemble) << ";N=" << n << ";K=" << k
                 << ";p=" << format_double(p) << ";R=" << format_double(grid.radius);
            table.add(cell.str(), "median_rel_error", med, detail::stderr_of_median(ok_errs));
            table.add(cell.str(), "oracle_rel_error_at_k", detail::median_of(oracle_k));
            table.add(cell.str(), "oracle_rel_error_at_k_over_logn", detail::median_of(oracle_keff));
            table.add(cell.str(), "solver_failures", static_cast<double>(failures));
            if (med > 0) {
                log_abscissa.push_back(std::log(static_cast<double>(k) / log_n));
                log_median.push_back(std::log(med));
            }
        }
        // least-squares slope with its standard error
        if (log_abscissa.size() >= 2) {
            const double xbar = detail::mean_of(log_abscissa);
            const double ybar = detail::mean_of(log_median);
            double sxx = 0.0, sxy = 0.0;
            for (std::size_t i = 0; i < log_abscissa.size(); ++i) {
                sxx += (log_abscissa[i] - xbar) * (log_abscissa[i] - xbar);
                sxy += (log_abscissa[i] - xbar) * (log_median[i] - ybar);
            }
            const double slope = sxy / sxx;
            const double intercept = ybar - slope * xbar;
            double ss_res = 0.0;
            for (std::size_t i = 0; i < log_abscissa.size(); ++i) {
                const double r = log_median[i] - (intercept + slope * log_abscissa[i]);
                ss_res += r * r;
            }
            const double dof = static_cast<double>(log_abscissa.size()) - 2.0;
            const double slope_se = dof > 0 ? std::sqrt(ss_res / dof / sxx) : 0.0;
            std::ostringstream cell;
            cell << "ensemble=" << ensemble_name(grid.ensemble) << ";N=" << n << ";p="
                 << format_double(p) << ";R=" << format_double(grid.radius);
            table.add(cell.str(), "fitted_slope", slope, slope_se);
            table.add(cell.str(), "target_slope", -(1.0 / p - 0.5));
        }
    }
    return table;
}

// --------------------------------------------------------------------------
// l1 stability of a single recovery against the concentration bound
// ||fsharp 1_{T^c}||_1 <= 4 ||h||_1, h the off-T part of the signal, plus
// the tail-decay constant sup_{m > 2|T|} |fsharp|_(m) |T|^{1/p}.

struct StabilityReport {
    double off_support_l1 = 0.0;   // ||fsharp 1_{T^c}||_1
    double bound = 0.0;            // 4 ||h||_1
    double ratio = 0.0;            // off_support_l1 / bound (0 when both vanish)
    double tail_constant = 0.0;
    SolveStatus status = SolveStatus::numerical_failure;
};

inline StabilityReport l1_stability_check(const Measurement& m, const Vector& f,
                                          const std::vector<std::size_t>& support, double p,
                                          const BpOptions& opts = {}) {
    Vector h = f;
    for (std::size_t t : support) h[t] = 0.0;
    Recovery rec = solve_bp(m, measure(m, f), opts);

    StabilityReport rep;
    rep.status = rec.status;
    rep.bound = 4.0 * norm1(h);
    std::vector<bool> on_support(f.size(), false);
    for (std::size_t t : support) on_support[t] = true;
    for (std::size_t t = 0; t < f.size(); ++t)
        if (!on_support[t]) rep.off_support_l1 += std::abs(rec.fsharp[t]);
    rep.ratio = rep.bound > 0 ? rep.off_support_l1 / rep.bound
                              : (rep.off_support_l1 > 1e-9 ? std::numeric_limits<double>::infinity() : 0.0);

    Vector mags(rec.fsharp.size());
    for (std::size_t t = 0; t < mags.size(); ++t) mags[t] = std::abs(rec.fsharp[t]);
    std::sort(mags.begin(), mags.end(), std::greater<>());
    const double t_pow = std::pow(static_cast<double>(support.size()), 1.0 / p);
    for (std::size_t rank = 2 * support.size(); rank < mags.size(); ++rank)
        rep.tail_constant = std::max(rep.tail_constant, mags[rank] * t_pow);
    return rep;
}

// --------------------------------------------------------------------------
// Concentration suites.

// Tail frequencies of the extreme singular values of n x p matrices with
// N(0, 1/n) entries against exp(-n r^2 / 2).
inline ResultTable singular_value_concentration(std::size_t n, std::size_t p, std::size_t trials,
                                                Seed seed, std::size_t workers = 1,
                                                Vector margins = {0.1, 0.25, 0.5}) {
    if (p > n) throw std::invalid_argument("singular_value_concentration: need p <= n");
    Vector lo(trials), hi(trials);
    parallel_for(trials, workers, [&](std::size_t trial) {
        CounterRng rng(seed.derived(trial));
        RealMatrix x(n, p);
        const double scale = 1.0 / std::sqrt(static_cast<double>(n));
        for (auto& v : x.data()) v = scale * rng.next_gaussian();
        SubsetSpectrum s = detail::gram_extremes(x);
        lo[trial] = std::sqrt(std::max(s.lambda_min, 0.0));
        hi[trial] = std::sqrt(std::max(s.lambda_max, 0.0));
    });

    ResultTable table;
    const double edge = std::sqrt(static_cast<double>(p) / static_cast<double>(n));
    for (double r : margins) {
        std::size_t upper = 0, lower = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            if (hi[t] > 1.0 + edge + r) ++upper;
            if (lo[t] < 1.0 - edge - r) ++lower;
        }
        const double bound = std::exp(-static_cast<double>(n) * r * r / 2.0);
        const double fu = static_cast<double>(upper) / static_cast<double>(trials);
        const double fl = static_cast<double>(lower) / static_cast<double>(trials);
        const double band = bound + 3.0 * detail::binomial_stderr(std::min(bound, 1.0), trials);
        std::ostringstream cell;
        cell << "n=" << n << ";p=" << p << ";r=" << format_double(r);
        table.add(cell.str(), "upper_exceed_freq", fu, detail::binomial_stderr(fu, trials));
        table.add(cell.str(), "lower_exceed_freq", fl, detail::binomial_stderr(fl, trials));
        table.add(cell.str(), "bound", bound);
        table.add(cell.str(), "upper_pass", fu <= band ? 1.0 : 0.0);
        table.add(cell.str(), "lower_pass", fl <= band ? 1.0 : 0.0);
    }
    return table;
}

// |Omega| concentration for Bernoulli(tau) frequency draws against the
// Bernstein-type bound with lambda = K/2, a constant.
inline ResultTable omega_concentration(std::size_t n, double tau, std::size_t trials, Seed seed,
                                       std::size_t workers = 1) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("omega_concentration: tau in (0,1)");
    const double k = tau * static_cast<double>(n);
    std::vector<double> sizes(trials, 0.0);
    parallel_for(trials, workers, [&](std::size_t trial) {
        CounterRng rng(seed.derived(trial));
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (rng.next_unit() < tau) ++count;
        sizes[trial] = static_cast<double>(count);
    });

    std::size_t violations = 0;
    for (double s : sizes)
        if (s < k / 2.0 || s > 2.0 * k) ++violations;
    const double freq = static_cast<double>(violations) / static_cast<double>(trials);
    const double lambda = k / 2.0;
    const double sigma_sq = static_cast<double>(n) * tau * (1.0 - tau);
    const double bound =
        std::min(1.0, 4.0 * std::exp(-lambda * lambda / (4.0 * (sigma_sq + lambda / (3.0 * std::sqrt(2.0))))));
    const double band = bound + 3.0 * detail::binomial_stderr(bound, trials);
    const double mean = detail::mean_of(sizes);
    const double mean_se = std::sqrt(sigma_sq / static_cast<double>(trials));

    ResultTable table;
    std::ostringstream cell;
    cell << "N=" << n << ";tau=" << format_double(tau);
    table.add(cell.str(), "violation_freq", freq, detail::binomial_stderr(freq, trials));
    table.add(cell.str(), "bound", bound);
    table.add(cell.str(), "pass", freq <= band ? 1.0 : 0.0);
    table.add(cell.str(), "mean_size", mean, mean_se);
    table.add(cell.str(), "mean_within_3sigma", std::abs(mean - k) <= 3.0 * mean_se ? 1.0 : 0.0);
    return table;
}

// Spectral-flatness statistic E ||Z f||_X / (sqrt(log N) ||f||_2) for
// Gaussian and Bernoulli sign multipliers.
inline ResultTable xnorm_concentration(const Vector& f, std::size_t trials, Seed seed,
                                       std::size_t workers = 1) {
    const double f_norm = norm2(f);
    if (!(f_norm > 0)) throw std::invalid_argument("xnorm_concentration: zero signal");
    const std::size_t n = f.size();
    const double denom = std::sqrt(std::log(static_cast<double>(n))) * f_norm;
    Vector gauss(trials), bern(trials);
    parallel_for(trials, workers, [&](std::size_t trial) {
        CounterRng rng(seed.derived(trial));
        Vector zf(n);
        for (std::size_t t = 0; t < n; ++t) zf[t] = rng.next_gaussian() * f[t];
        gauss[trial] = std::sqrt(static_cast<double>(n)) * norm_inf(dft(zf)) / denom;
        for (std::size_t t = 0; t < n; ++t) zf[t] = rng.next_sign() * f[t];
        bern[trial] = std::sqrt(static_cast<double>(n)) * norm_inf(dft(zf)) / denom;
    });

    ResultTable table;
    std::ostringstream cell;
    cell << "N=" << n;
    table.add(cell.str(), "mean_ratio_gaussian", detail::mean_of(gauss), detail::stderr_of_mean(gauss));
    table.add(cell.str(), "mean_ratio_bernoulli", detail::mean_of(bern), detail::stderr_of_mean(bern));
    return table;
}

// Reference shape of the information-theoretic lower bound on l2 error from
// K linear measurements of the l1 ball (constant set to one).
inline double kashin_reference(std::size_t n, std::size_t k) {
    if (k == 0 || k > n) throw std::invalid_argument("kashin_reference: need 1 <= K <= N");
    return std::sqrt((std::log(static_cast<double>(n) / static_cast<double>(k)) + 1.0) /
                     static_cast<double>(k));
}

// --------------------------------------------------------------------------
// Run manifest.

inline nlohmann::json make_manifest(const std::string& command, const nlohmann::json& parameters,
                                    Seed seed, double wall_seconds) {
    nlohmann::json j;
    j["command"] = command;
    j["parameters"] = parameters;
    j["seed"] = {{"base", seed.base}, {"stream", seed.stream}};
    j["version"] = kVersion;
    j["wall_time_seconds"] = wall_seconds;
    return j;
}

}  // namespace cslab
