#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cslab/common.hpp"
#include "cslab/linalg.hpp"
#include "cslab/prng.hpp"
#include "cslab/signals.hpp"

namespace cslab {

struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IndexOutOfRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateDraw : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class EnsembleKind : std::uint32_t { gaussian = 0, binary = 1, fourier = 2 };

inline const char* ensemble_name(EnsembleKind k) {
    switch (k) {
        case EnsembleKind::gaussian: return "gaussian";
        case EnsembleKind::binary: return "binary";
        case EnsembleKind::fourier: return "fourier";
    }
    return "unknown";
}

// A sampled measurement operator: |Omega| by N rows applied as y = F f.
// Gaussian/binary rows are real; Fourier rows are rows of the unitary DFT
// matrix. expected_k is what the spectral normalizations divide by (tau*N
// for Fourier, the row count otherwise).
struct Measurement {
    EnsembleKind kind = EnsembleKind::gaussian;
    std::size_t signal_length = 0;
    std::variant<RealMatrix, ComplexMatrix> matrix;
    std::vector<std::size_t> omega;
    double expected_k = 0.0;
    Seed seed{};

    bool complex_rows() const { return std::holds_alternative<ComplexMatrix>(matrix); }
    const RealMatrix& real_matrix() const { return std::get<RealMatrix>(matrix); }
    const ComplexMatrix& complex_matrix() const { return std::get<ComplexMatrix>(matrix); }
    std::size_t row_count() const {
        return complex_rows() ? complex_matrix().rows() : real_matrix().rows();
    }
};

inline Measurement gaussian_ensemble(std::size_t n, std::size_t k, Seed seed) {
    if (k == 0 || k > n) throw InvalidShape("gaussian_ensemble: need 1 <= K <= N");
    CounterRng rng(seed);
    RealMatrix m(k, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : m.data()) v = scale * rng.next_gaussian();
    Measurement out;
    out.kind = EnsembleKind::gaussian;
    out.signal_length = n;
    out.matrix = std::move(m);
    out.omega.resize(k);
    std::iota(out.omega.begin(), out.omega.end(), 0);
    out.expected_k = static_cast<double>(k);
    out.seed = seed;
    return out;
}

inline Measurement binary_ensemble(std::size_t n, std::size_t k, Seed seed) {
    if (k == 0 || k > n) throw InvalidShape("binary_ensemble: need 1 <= K <= N");
    CounterRng rng(seed);
    RealMatrix m(k, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : m.data()) v = scale * rng.next_sign();
    Measurement out;
    out.kind = EnsembleKind::binary;
    out.signal_length = n;
    out.matrix = std::move(m);
    out.omega.resize(k);
    std::iota(out.omega.begin(), out.omega.end(), 0);
    out.expected_k = static_cast<double>(k);
    out.seed = seed;
    return out;
}

// Each frequency enters Omega independently with probability tau. An empty
// draw retries on a derived substream; 64 consecutive empties abort.
inline Measurement fourier_ensemble(std::size_t n, double tau, Seed seed) {
    if (n == 0) throw InvalidShape("fourier_ensemble: empty length");
    if (!(tau > 0.0 && tau < 1.0)) throw InvalidShape("fourier_ensemble: tau must lie in (0, 1)");
    std::vector<std::size_t> omega;
    for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
        CounterRng rng(attempt == 0 ? seed : seed.derived(0x0f000000u + attempt));
        omega.clear();
        for (std::size_t k = 0; k < n; ++k)
            if (rng.next_unit() < tau) omega.push_back(k);
        if (!omega.empty()) break;
    }
    if (omega.empty()) throw DegenerateDraw("fourier_ensemble: empty frequency set after 64 attempts");

    const CVector roots = detail::unit_roots(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    ComplexMatrix m(omega.size(), n);
    for (std::size_t r = 0; r < omega.size(); ++r) {
        const std::size_t k = omega[r];
        for (std::size_t t = 0; t < n; ++t) m(r, t) = scale * roots[(k * t) % n];
    }
    Measurement out;
    out.kind = EnsembleKind::fourier;
    out.signal_length = n;
    out.matrix = std::move(m);
    out.omega = std::move(omega);
    out.expected_k = tau * static_cast<double>(n);
    out.seed = seed;
    return out;
}

// y = F f. Real ensembles produce zero imaginary parts.
inline CVector measure(const Measurement& m, const Vector& f) {
    if (f.size() != m.signal_length) throw ShapeMismatch("measure: signal length mismatch");
    CVector y(m.row_count());
    if (m.complex_rows()) {
        const ComplexMatrix& fm = m.complex_matrix();
        for (std::size_t r = 0; r < fm.rows(); ++r) {
            std::complex<double> s{};
            const std::complex<double>* row = fm.row_ptr(r);
            for (std::size_t t = 0; t < fm.cols(); ++t) s += row[t] * f[t];
            y[r] = s;
        }
    } else {
        const RealMatrix& fm = m.real_matrix();
        for (std::size_t r = 0; r < fm.rows(); ++r) {
            double s = 0.0;
            const double* row = fm.row_ptr(r);
            for (std::size_t t = 0; t < fm.cols(); ++t) s += row[t] * f[t];
            y[r] = s;
        }
    }
    return y;
}

// Column extraction F_{Omega T}; column order follows sorted T.
inline std::variant<RealMatrix, ComplexMatrix> submatrix(const Measurement& m,
                                                         std::vector<std::size_t> t) {
    std::sort(t.begin(), t.end());
    for (std::size_t c : t)
        if (c >= m.signal_length) throw IndexOutOfRange("submatrix: column index out of range");
    if (m.complex_rows()) return extract_columns(m.complex_matrix(), t);
    return extract_columns(m.real_matrix(), t);
}

// Row-restricted operator, for simulated loss of (k, y_k) pairs; the
// expected measurement count scales with the kept fraction.
inline Measurement select_rows(const Measurement& m, const std::vector<std::size_t>& rows) {
    for (std::size_t r : rows)
        if (r >= m.row_count()) throw IndexOutOfRange("select_rows: row index out of range");
    Measurement out;
    out.kind = m.kind;
    out.signal_length = m.signal_length;
    out.seed = m.seed;
    out.omega.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out.omega[i] = m.omega[rows[i]];
    const double ratio = m.row_count() ? static_cast<double>(rows.size()) / static_cast<double>(m.row_count()) : 0.0;
    out.expected_k = m.kind == EnsembleKind::fourier ? m.expected_k * ratio
                                                     : static_cast<double>(rows.size());
    if (m.complex_rows()) {
        const ComplexMatrix& fm = m.complex_matrix();
        ComplexMatrix sub(rows.size(), fm.cols());
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t c = 0; c < fm.cols(); ++c) sub(i, c) = fm(rows[i], c);
        out.matrix = std::move(sub);
    } else {
        const RealMatrix& fm = m.real_matrix();
        RealMatrix sub(rows.size(), fm.cols());
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t c = 0; c < fm.cols(); ++c) sub(i, c) = fm(rows[i], c);
        out.matrix = std::move(sub);
    }
    return out;
}

// --------------------------------------------------------------------------
// Matrix interchange formats.

// CSV: row-major; complex entries occupy two adjacent fields (re, im).
inline void write_matrix_csv(std::ostream& os, const Measurement& m) {
    if (m.complex_rows()) {
        const ComplexMatrix& fm = m.complex_matrix();
        for (std::size_t r = 0; r < fm.rows(); ++r) {
            for (std::size_t c = 0; c < fm.cols(); ++c) {
                if (c) os << ",";
                os << format_double(fm(r, c).real()) << "," << format_double(fm(r, c).imag());
            }
            os << "\n";
        }
    } else {
        const RealMatrix& fm = m.real_matrix();
        for (std::size_t r = 0; r < fm.rows(); ++r) {
            for (std::size_t c = 0; c < fm.cols(); ++c) {
                if (c) os << ",";
                os << format_double(fm(r, c));
            }
            os << "\n";
        }
    }
}

inline Measurement read_matrix_csv(std::istream& is, EnsembleKind kind, double expected_k = 0.0) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> fields;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) fields.push_back(std::stod(tok));
        rows.push_back(std::move(fields));
    }
    if (rows.empty()) throw ShapeMismatch("read_matrix_csv: no rows");
    const std::size_t width = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != width) throw ShapeMismatch("read_matrix_csv: ragged rows");

    Measurement out;
    out.kind = kind;
    if (kind == EnsembleKind::fourier) {
        if (width % 2 != 0) throw ShapeMismatch("read_matrix_csv: odd field count for complex rows");
        const std::size_t n = width / 2;
        ComplexMatrix m(rows.size(), n);
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < n; ++c) m(r, c) = {rows[r][2 * c], rows[r][2 * c + 1]};
        out.signal_length = n;
        out.matrix = std::move(m);
    } else {
        RealMatrix m(rows.size(), width);
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < width; ++c) m(r, c) = rows[r][c];
        out.signal_length = width;
        out.matrix = std::move(m);
    }
    out.omega.resize(rows.size());
    std::iota(out.omega.begin(), out.omega.end(), 0);
    out.expected_k = expected_k > 0 ? expected_k : static_cast<double>(rows.size());
    return out;
}

// Raw little-endian binary: 16-byte header (magic "CSMX", kind, N, |Omega|),
// then expected_k, seed, the Omega table, and row-major doubles (complex
// entries interleaved re, im).
inline void write_matrix_binary(std::ostream& os, const Measurement& m) {
    const char magic[4] = {'C', 'S', 'M', 'X'};
    const std::uint32_t kind = static_cast<std::uint32_t>(m.kind);
    const std::uint32_t n = static_cast<std::uint32_t>(m.signal_length);
    const std::uint32_t k = static_cast<std::uint32_t>(m.row_count());
    os.write(magic, 4);
    os.write(reinterpret_cast<const char*>(&kind), 4);
    os.write(reinterpret_cast<const char*>(&n), 4);
    os.write(reinterpret_cast<const char*>(&k), 4);
    os.write(reinterpret_cast<const char*>(&m.expected_k), 8);
    os.write(reinterpret_cast<const char*>(&m.seed.base), 8);
    os.write(reinterpret_cast<const char*>(&m.seed.stream), 8);
    for (std::size_t i = 0; i < m.row_count(); ++i) {
        const std::uint32_t idx = static_cast<std::uint32_t>(m.omega[i]);
        os.write(reinterpret_cast<const char*>(&idx), 4);
    }
    if (m.complex_rows()) {
        for (const auto& v : m.complex_matrix().data()) {
            const double re = v.real(), im = v.imag();
            os.write(reinterpret_cast<const char*>(&re), 8);
            os.write(reinterpret_cast<const char*>(&im), 8);
        }
    } else {
        for (double v : m.real_matrix().data()) os.write(reinterpret_cast<const char*>(&v), 8);
    }
}

inline Measurement read_matrix_binary(std::istream& is) {
    char magic[4];
    std::uint32_t kind_raw = 0, n = 0, k = 0;
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "CSMX", 4) != 0)
        throw ShapeMismatch("read_matrix_binary: bad magic");
    is.read(reinterpret_cast<char*>(&kind_raw), 4);
    is.read(reinterpret_cast<char*>(&n), 4);
    is.read(reinterpret_cast<char*>(&k), 4);
    if (kind_raw > 2) throw ShapeMismatch("read_matrix_binary: unknown ensemble kind");
    Measurement out;
    out.kind = static_cast<EnsembleKind>(kind_raw);
    out.signal_length = n;
    is.read(reinterpret_cast<char*>(&out.expected_k), 8);
    is.read(reinterpret_cast<char*>(&out.seed.base), 8);
    is.read(reinterpret_cast<char*>(&out.seed.stream), 8);
    out.omega.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::uint32_t idx = 0;
        is.read(reinterpret_cast<char*>(&idx), 4);
        out.omega[i] = idx;
    }
    if (out.kind == EnsembleKind::fourier) {
        ComplexMatrix m(k, n);
        for (auto& v : m.data()) {
            double re = 0, im = 0;
            is.read(reinterpret_cast<char*>(&re), 8);
            is.read(reinterpret_cast<char*>(&im), 8);
            v = {re, im};
        }
        out.matrix = std::move(m);
    } else {
        RealMatrix m(k, n);
        for (auto& v : m.data()) is.read(reinterpret_cast<char*>(&v), 8);
        out.matrix = std::move(m);
    }
    if (!is) throw ShapeMismatch("read_matrix_binary: truncated payload");
    return out;
}

}  // namespace cslab
