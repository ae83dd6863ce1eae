#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cslab/common.hpp"
#include "cslab/ensembles.hpp"
#include "cslab/linalg.hpp"
#include "cslab/parallel.hpp"
#include "cslab/prng.hpp"

namespace cslab {

struct EmptySupport : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularGram : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyComplement : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SubsetSpectrum {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

namespace detail {

template <class T>
SubsetSpectrum gram_extremes(const Matrix<T>& cols) {
    Matrix<T> g = gram(cols);
    if constexpr (std::is_same_v<T, double>) {
        Spectrum s = symmetric_eigs(g, /*want_vectors=*/false);
        return {s.eigenvalues.front(), s.eigenvalues.back()};
    } else {
        HermitianSpectrum s = hermitian_eigs(g, /*want_vectors=*/false);
        return {s.eigenvalues.front(), s.eigenvalues.back()};
    }
}

}  // namespace detail

// Extreme eigenvalues of the Gram matrix of the columns selected by T.
inline SubsetSpectrum submatrix_spectrum(const Measurement& m, const std::vector<std::size_t>& t) {
    if (t.empty()) throw EmptySupport("submatrix_spectrum: empty support");
    auto cols = submatrix(m, t);
    if (std::holds_alternative<RealMatrix>(cols))
        return detail::gram_extremes(std::get<RealMatrix>(cols));
    return detail::gram_extremes(std::get<ComplexMatrix>(cols));
}

// --------------------------------------------------------------------------
// Subset-spectrum audit against near-isometry bounds.

enum class AuditMode { automatic, exhaustive, sampled };

struct UupOptions {
    double alpha = 1.0;
    double lambda_factor = 1.0;
    double lower = 0.5;            // a
    double upper = 1.5;            // b
    bool check_lower = true;       // binary audits report the low edge instead
    AuditMode mode = AuditMode::automatic;
    std::size_t sample_trials = 1000;       // per subset size, sampled mode
    std::size_t exhaustive_cap = 100000;    // automatic-mode subset budget
    std::size_t workers = 1;
};

struct UupSubsetRecord {
    std::vector<std::size_t> subset;
    double lambda_min_normalized = 0.0;  // times N/K
    double lambda_max_normalized = 0.0;
    bool violation = false;
};

struct UupReport {
    std::string ensemble;
    std::size_t signal_length = 0;
    double expected_k = 0.0;
    double lower = 0.0, upper = 0.0;
    bool lower_checked = true;
    double alpha = 0.0, lambda_factor = 0.0;
    std::size_t size_cap = 0;
    bool exhaustive = false;
    std::size_t sample_trials = 0;
    std::vector<UupSubsetRecord> per_subset;
    std::size_t violations = 0;
    double min_normalized = 0.0;  // empirical spectral edges over all subsets
    double max_normalized = 0.0;
};

namespace detail {

inline bool next_combination(std::vector<std::size_t>& comb, std::size_t n) {
    const std::size_t k = comb.size();
    for (std::size_t i = k; i-- > 0;) {
        if (comb[i] < n - k + i) {
            ++comb[i];
            for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
            return true;
        }
    }
    return false;
}

inline std::size_t subset_count_up_to(std::size_t n, std::size_t m, std::size_t cap) {
    std::size_t total = 0;
    for (std::size_t k = 1; k <= m; ++k) {
        // C(n, k) with early exit once past the cap
        double c = 1.0;
        for (std::size_t j = 0; j < k; ++j) c *= static_cast<double>(n - j) / static_cast<double>(j + 1);
        if (c > static_cast<double>(cap)) return cap + 1;
        total += static_cast<std::size_t>(c + 0.5);
        if (total > cap) return cap + 1;
    }
    return total;
}

}  // namespace detail

inline UupReport uup_audit(const Measurement& m, const UupOptions& opts, Seed seed) {
    const std::size_t n = m.signal_length;
    const double k_eff = m.expected_k;
    UupReport rep;
    rep.ensemble = ensemble_name(m.kind);
    rep.signal_length = n;
    rep.expected_k = k_eff;
    rep.lower = opts.lower;
    rep.upper = opts.upper;
    rep.lower_checked = opts.check_lower;
    rep.alpha = opts.alpha;
    rep.lambda_factor = opts.lambda_factor;
    rep.size_cap = static_cast<std::size_t>(std::floor(opts.alpha * k_eff / opts.lambda_factor));
    if (rep.size_cap == 0) return rep;  // nothing to audit, trivially passes
    rep.size_cap = std::min(rep.size_cap, n);

    bool exhaustive;
    switch (opts.mode) {
        case AuditMode::exhaustive: exhaustive = true; break;
        case AuditMode::sampled: exhaustive = false; break;
        default:
            exhaustive = detail::subset_count_up_to(n, rep.size_cap, opts.exhaustive_cap) <= opts.exhaustive_cap;
    }
    rep.exhaustive = exhaustive;
    rep.sample_trials = exhaustive ? 0 : opts.sample_trials;

    std::vector<std::vector<std::size_t>> subsets;
    if (exhaustive) {
        for (std::size_t sz = 1; sz <= rep.size_cap; ++sz) {
            std::vector<std::size_t> comb(sz);
            for (std::size_t i = 0; i < sz; ++i) comb[i] = i;
            do {
                subsets.push_back(comb);
            } while (detail::next_combination(comb, n));
        }
    } else {
        for (std::size_t sz = 1; sz <= rep.size_cap; ++sz) {
            CounterRng rng(seed.derived(0xa0d17000u + sz));
            for (std::size_t t = 0; t < opts.sample_trials; ++t)
                subsets.push_back(rng.sample_without_replacement(n, sz));
        }
    }

    rep.per_subset.resize(subsets.size());
    const double scale = static_cast<double>(n) / k_eff;
    parallel_for(subsets.size(), opts.workers, [&](std::size_t i) {
        UupSubsetRecord rec;
        rec.subset = subsets[i];
        SubsetSpectrum s = submatrix_spectrum(m, rec.subset);
        rec.lambda_min_normalized = s.lambda_min * scale;
        rec.lambda_max_normalized = s.lambda_max * scale;
        rec.violation = (opts.check_lower && rec.lambda_min_normalized < opts.lower) ||
                        rec.lambda_max_normalized > opts.upper;
        rep.per_subset[i] = std::move(rec);
    });

    rep.min_normalized = rep.per_subset.empty() ? 0.0 : rep.per_subset[0].lambda_min_normalized;
    rep.max_normalized = rep.per_subset.empty() ? 0.0 : rep.per_subset[0].lambda_max_normalized;
    for (const auto& rec : rep.per_subset) {
        if (rec.violation) ++rep.violations;
        rep.min_normalized = std::min(rep.min_normalized, rec.lambda_min_normalized);
        rep.max_normalized = std::max(rep.max_normalized, rec.lambda_max_normalized);
    }
    return rep;
}

inline void write_uup_csv(std::ostream& os, const UupReport& rep) {
    os << "size,subset,lambda_min_normalized,lambda_max_normalized,violation\n";
    for (const auto& rec : rep.per_subset) {
        os << rec.subset.size() << ",";
        for (std::size_t i = 0; i < rec.subset.size(); ++i) {
            if (i) os << "|";
            os << rec.subset[i];
        }
        os << "," << format_double(rec.lambda_min_normalized) << ","
           << format_double(rec.lambda_max_normalized) << "," << (rec.violation ? 1 : 0) << "\n";
    }
}

inline void write_uup_summary_json(std::ostream& os, const UupReport& rep) {
    nlohmann::json j;
    j["ensemble"] = rep.ensemble;
    j["signal_length"] = rep.signal_length;
    j["expected_k"] = rep.expected_k;
    j["bounds"] = {rep.lower, rep.upper};
    j["lower_checked"] = rep.lower_checked;
    j["alpha"] = rep.alpha;
    j["lambda_factor"] = rep.lambda_factor;
    j["size_cap"] = rep.size_cap;
    j["mode"] = rep.exhaustive ? "exhaustive" : "sampled";
    j["sample_trials"] = rep.sample_trials;
    j["subsets_audited"] = rep.per_subset.size();
    j["violations"] = rep.violations;
    j["min_normalized_eigenvalue"] = rep.min_normalized;
    j["max_normalized_eigenvalue"] = rep.max_normalized;
    os << j.dump(2) << "\n";
}

// --------------------------------------------------------------------------
// Sign-interpolation certificates and the row-space extension operator.

struct ErpCertificate {
    CVector values;  // interpolates the signs on T, lives in the row space
    std::vector<std::size_t> support;
    Vector signs;
    double off_support_max = 0.0;
    double interpolation_error = 0.0;  // max |values - signs| on T
};

namespace detail {

// F^* F_T (F_T^* F_T)^{-1} rhs, the least-squares extension from T into the
// row space of the measurement operator.
template <class T>
std::vector<T> row_space_extension(const Matrix<T>& rows, const std::vector<std::size_t>& support,
                                   const Vector& rhs_on_t) {
    Matrix<T> ft = extract_columns(rows, support);
    Matrix<T> g = gram(ft);
    auto factor = cholesky(g, 1e-10);
    if (!factor) throw SingularGram("row_space_extension: Gram matrix below pivot threshold");
    std::vector<T> rhs(support.size());
    for (std::size_t i = 0; i < support.size(); ++i) rhs[i] = T{rhs_on_t[i]};
    std::vector<T> w = factor->solve(rhs);
    std::vector<T> v = matvec(ft, w);
    return adjoint_matvec(rows, v);
}

inline CVector to_complex(const Vector& v) {
    CVector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
    return out;
}

}  // namespace detail

// Least-squares extension of values given on T into the measurement row
// space; agrees with the input on T whenever the Gram system is well posed.
inline CVector extend(const Measurement& m, std::vector<std::size_t> support, const Vector& values_on_t) {
    if (values_on_t.size() != support.size()) throw ShapeMismatch("extend: support/value size mismatch");
    // keep caller's value order attached to the sorted support
    std::vector<std::size_t> order(support.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
    std::vector<std::size_t> sorted_support(support.size());
    Vector sorted_vals(support.size());
    for (std::size_t i = 0; i < support.size(); ++i) {
        sorted_support[i] = support[order[i]];
        sorted_vals[i] = values_on_t[order[i]];
    }
    for (std::size_t t : sorted_support)
        if (t >= m.signal_length) throw IndexOutOfRange("extend: support index out of range");
    if (support.empty()) return CVector(m.signal_length);

    if (m.complex_rows())
        return detail::row_space_extension(m.complex_matrix(), sorted_support, sorted_vals);
    return detail::to_complex(detail::row_space_extension(m.real_matrix(), sorted_support, sorted_vals));
}

// Sign-interpolating dual certificate candidate for a support and sign
// pattern; the off-support maximum decides whether it certifies.
inline ErpCertificate erp_certificate(const Measurement& m, const std::vector<std::size_t>& support,
                                      const Vector& signs) {
    if (signs.size() != support.size()) throw ShapeMismatch("erp_certificate: sign/support size mismatch");
    for (double s : signs)
        if (std::abs(std::abs(s) - 1.0) > 1e-12)
            throw std::invalid_argument("erp_certificate: signs must have unit magnitude");

    ErpCertificate cert;
    cert.support = support;
    std::sort(cert.support.begin(), cert.support.end());
    cert.signs.resize(signs.size());
    {
        std::vector<std::size_t> order(support.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
        for (std::size_t i = 0; i < support.size(); ++i) cert.signs[i] = signs[order[i]];
    }
    cert.values = extend(m, cert.support, cert.signs);

    std::vector<bool> on_support(m.signal_length, false);
    for (std::size_t i = 0; i < cert.support.size(); ++i) on_support[cert.support[i]] = true;
    std::size_t si = 0;
    for (std::size_t t = 0; t < m.signal_length; ++t) {
        if (on_support[t]) {
            cert.interpolation_error = std::max(cert.interpolation_error,
                                                std::abs(cert.values[t] - std::complex<double>{cert.signs[si++]}));
        } else {
            cert.off_support_max = std::max(cert.off_support_max, std::abs(cert.values[t]));
        }
    }
    return cert;
}

struct ErpAudit {
    bool pass = false;
    double margin = 0.0;
};

inline ErpAudit erp_audit(const ErpCertificate& cert, double threshold = 0.5) {
    return {cert.off_support_max <= threshold, threshold - cert.off_support_max};
}

struct WerpReport {
    bool pass = false;
    double worst_ratio = 0.0;   // ||F_T^* F_t|| * N / (gamma sqrt(K |T|)), max over t
    std::size_t worst_index = 0;
};

// Column-correlation bound ||F_T^* F_t||_2 <= gamma sqrt(K |T|) / N for
// every off-support column t.
inline WerpReport werp_audit(const Measurement& m, const std::vector<std::size_t>& support, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("werp_audit: gamma must lie in (0, 1]");
    if (support.empty()) throw std::invalid_argument("werp_audit: empty support");
    if (support.size() >= m.signal_length) throw EmptyComplement("werp_audit: no off-support columns");

    const double k_eff = m.expected_k;
    const double bound = gamma * std::sqrt(k_eff * static_cast<double>(support.size())) /
                         static_cast<double>(m.signal_length);
    std::vector<bool> on_support(m.signal_length, false);
    for (std::size_t t : support) {
        if (t >= m.signal_length) throw IndexOutOfRange("werp_audit: support index out of range");
        on_support[t] = true;
    }

    WerpReport rep;
    auto scan = [&](const auto& rows) {
        auto ft = extract_columns(rows, support);
        for (std::size_t t = 0; t < m.signal_length; ++t) {
            if (on_support[t]) continue;
            double sq = 0.0;
            for (std::size_t j = 0; j < support.size(); ++j) {
                std::complex<double> s{};
                for (std::size_t r = 0; r < rows.rows(); ++r)
                    s += std::complex<double>{detail::conj_of(ft(r, j))} * std::complex<double>{rows(r, t)};
                sq += std::norm(s);
            }
            const double ratio = std::sqrt(sq) / bound;
            if (ratio > rep.worst_ratio) {
                rep.worst_ratio = ratio;
                rep.worst_index = t;
            }
        }
    };
    if (m.complex_rows())
        scan(m.complex_matrix());
    else
        scan(m.real_matrix());
    rep.pass = rep.worst_ratio <= 1.0;
    return rep;
}

}  // namespace cslab
