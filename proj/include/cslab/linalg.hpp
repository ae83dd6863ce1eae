#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cslab/matrix.hpp"

namespace cslab {

struct NotSymmetric : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotPositiveDefinite : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// e^{-i 2 pi j / n} for j = 0..n-1; shared by the transform and the Fourier
// ensemble so sampled rows match dft() output exactly.
inline CVector unit_roots(std::size_t n) {
    CVector w(n);
    for (std::size_t j = 0; j < n; ++j)
        w[j] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n));
    return w;
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place radix-2 decimation-in-time, unnormalized forward transform.
inline void fft_pow2(CVector& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const CVector roots = unit_roots(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> w = roots[j * stride];
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }
}

}  // namespace detail

// Unitary discrete Fourier transform: out(k) = N^{-1/2} sum_t f(t) e^{-i2pi kt/N}.
// Radix-2 FFT when N is a power of two, direct evaluation otherwise.
inline CVector dft(const CVector& f) {
    const std::size_t n = f.size();
    if (n == 0) throw std::invalid_argument("dft: empty input");
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    if (detail::is_power_of_two(n)) {
        CVector a = f;
        detail::fft_pow2(a);
        for (auto& v : a) v *= scale;
        return a;
    }
    const CVector roots = detail::unit_roots(n);
    CVector out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> s{};
        for (std::size_t t = 0; t < n; ++t) s += f[t] * roots[(k * t) % n];
        out[k] = s * scale;
    }
    return out;
}

inline CVector dft(const Vector& f) {
    CVector z(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) z[i] = f[i];
    return dft(z);
}

inline CVector idft(const CVector& g) {
    if (g.empty()) throw std::invalid_argument("idft: empty input");
    CVector conj_in(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) conj_in[i] = std::conj(g[i]);
    CVector out = dft(conj_in);
    for (auto& v : out) v = std::conj(v);
    return out;
}

// --------------------------------------------------------------------------
// Symmetric eigenproblem, cyclic Jacobi.

struct Spectrum {
    Vector eigenvalues;                      // ascending
    std::optional<RealMatrix> eigenvectors;  // columns, matching order
};

// Cyclic-by-row Jacobi rotations. Plenty accurate for the Gram matrices the
// audits need (dimension at most a few hundred).
inline Spectrum symmetric_eigs(const RealMatrix& a, bool want_vectors = true, double sym_tol = 1e-10) {
    if (a.rows() != a.cols()) throw NotSymmetric("symmetric_eigs: matrix not square");
    const std::size_t n = a.rows();
    const double scale = std::max(1.0, max_abs(a));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(a(i, j) - a(j, i)) > sym_tol * scale)
                throw NotSymmetric("symmetric_eigs: asymmetry exceeds tolerance");

    RealMatrix m = a;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = m(j, i) = avg;
        }
    RealMatrix v = want_vectors ? RealMatrix::identity(n) : RealMatrix();

    const double fro = std::max(frobenius_norm(m), 1e-300);
    const double stop = 1e-14 * fro;
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
        off = std::sqrt(2.0 * off);
        if (off <= stop) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = 0.5 * (m(q, q) - m(p, p)) / apq;
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
                if (want_vectors) {
                    for (std::size_t k = 0; k < n; ++k) {
                        const double vkp = v(k, p), vkq = v(k, q);
                        v(k, p) = c * vkp - s * vkq;
                        v(k, q) = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return m(i, i) < m(j, j); });

    Spectrum out;
    out.eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.eigenvalues[i] = m(order[i], order[i]);
    if (want_vectors) {
        RealMatrix sorted(n, n);
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t r = 0; r < n; ++r) sorted(r, c) = v(r, order[c]);
        out.eigenvectors = std::move(sorted);
    }
    return out;
}

// Hermitian eigenvalues through the real symmetric embedding
// [[Re, -Im], [Im, Re]]; each eigenvalue of H appears twice in the embedding.
struct HermitianSpectrum {
    Vector eigenvalues;  // ascending, deduplicated
    std::optional<ComplexMatrix> eigenvectors;
};

inline HermitianSpectrum hermitian_eigs(const ComplexMatrix& h, bool want_vectors = false, double sym_tol = 1e-10) {
    const std::size_t n = h.rows();
    if (h.cols() != n) throw NotSymmetric("hermitian_eigs: matrix not square");
    RealMatrix e(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double re = h(i, j).real(), im = h(i, j).imag();
            e(i, j) = re;
            e(i + n, j + n) = re;
            e(i + n, j) = im;
            e(i, j + n) = -im;
        }
    Spectrum emb = symmetric_eigs(e, want_vectors, sym_tol);
    HermitianSpectrum out;
    out.eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.eigenvalues[i] = 0.5 * (emb.eigenvalues[2 * i] + emb.eigenvalues[2 * i + 1]);
    if (want_vectors) {
        ComplexMatrix vecs(n, n);
        for (std::size_t c = 0; c < n; ++c) {
            double nrm = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                const std::complex<double> z{(*emb.eigenvectors)(r, 2 * c), (*emb.eigenvectors)(r + n, 2 * c)};
                vecs(r, c) = z;
                nrm += std::norm(z);
            }
            nrm = std::sqrt(nrm);
            if (nrm > 0)
                for (std::size_t r = 0; r < n; ++r) vecs(r, c) /= nrm;
        }
        out.eigenvectors = std::move(vecs);
    }
    return out;
}

// --------------------------------------------------------------------------
// Cholesky factorization (lower), real symmetric or complex Hermitian.

// In-place factorization of the lower triangle. Returns false when a pivot
// falls below pivot_rel_tol * max initial diagonal.
inline bool cholesky_inplace(RealMatrix& a, double pivot_rel_tol = 1e-12) {
    const std::size_t n = a.rows();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
    const double threshold = pivot_rel_tol * std::max(max_diag, 1e-300);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        const double* rowj = a.row_ptr(j);
        for (std::size_t k = 0; k < j; ++k) d -= rowj[k] * rowj[k];
        if (!(d > threshold)) return false;
        const double ljj = std::sqrt(d);
        a(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            const double* rowi = a.row_ptr(i);
            for (std::size_t k = 0; k < j; ++k) s -= rowi[k] * rowj[k];
            a(i, j) = s / ljj;
        }
    }
    return true;
}

template <class T>
struct CholeskyFactor {
    Matrix<T> lower;

    std::vector<T> solve(const std::vector<T>& b) const {
        const std::size_t n = lower.rows();
        std::vector<T> x(b);
        for (std::size_t i = 0; i < n; ++i) {
            T s = x[i];
            for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * x[k];
            x[i] = s / lower(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            T s = x[ii];
            for (std::size_t k = ii + 1; k < n; ++k) s -= detail::conj_of(lower(k, ii)) * x[k];
            x[ii] = s / lower(ii, ii);
        }
        return x;
    }
};

template <class T>
std::optional<CholeskyFactor<T>> cholesky(const Matrix<T>& a, double pivot_rel_tol = 1e-12) {
    const std::size_t n = a.rows();
    if (a.cols() != n) return std::nullopt;
    Matrix<T> l(n, n);
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(detail::real_of(a(i, i))));
    const double threshold = pivot_rel_tol * std::max(max_diag, 1e-300);
    for (std::size_t j = 0; j < n; ++j) {
        double d = detail::real_of(a(j, j));
        for (std::size_t k = 0; k < j; ++k) d -= detail::abs_sq(l(j, k));
        if (!(d > threshold)) return std::nullopt;
        const double ljj = std::sqrt(d);
        l(j, j) = T{ljj};
        for (std::size_t i = j + 1; i < n; ++i) {
            T s = detail::conj_of(a(j, i));
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * detail::conj_of(l(j, k));
            l(i, j) = s / ljj;
        }
    }
    return CholeskyFactor<T>{std::move(l)};
}

template <class T>
std::vector<T> cholesky_solve(const Matrix<T>& a, const std::vector<T>& b, double pivot_rel_tol = 1e-12) {
    if (a.rows() != a.cols() || b.size() != a.rows())
        throw std::invalid_argument("cholesky_solve: dimension mismatch");
    auto factor = cholesky(a, pivot_rel_tol);
    if (!factor) throw NotPositiveDefinite("cholesky_solve: pivot below threshold");
    return factor->solve(b);
}

// --------------------------------------------------------------------------
// Rank-revealing pivoted QR, used as the row presolve for measurement
// systems whose real/imaginary splits carry exact dependencies.

struct RankSelection {
    std::size_t rank = 0;
    std::vector<std::size_t> rows;  // ascending indices of independent rows
};

// Householder QR with column pivoting applied to A^T, so pivot columns
// correspond to rows of A. Rank cut at tol * |largest pivot|.
inline RankSelection pivoted_qr_rank(const RealMatrix& a, double tol) {
    if (tol <= 0) throw std::invalid_argument("pivoted_qr_rank: tol must be positive");
    const std::size_t m = a.rows();  // columns of B = A^T
    const std::size_t n = a.cols();  // rows of B
    if (m == 0 || n == 0) return {};

    RealMatrix b(n, m);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) b(c, r) = a(r, c);

    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> col_sq(m);
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += b(i, j) * b(i, j);
        col_sq[j] = s;
    }

    const std::size_t steps = std::min(m, n);
    std::vector<double> rdiag;
    rdiag.reserve(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        // refresh running norms periodically to dodge cancellation drift
        std::size_t best = k;
        for (std::size_t j = k + 1; j < m; ++j)
            if (col_sq[j] > col_sq[best]) best = j;
        if (best != k) {
            for (std::size_t i = 0; i < n; ++i) std::swap(b(i, k), b(i, best));
            std::swap(col_sq[k], col_sq[best]);
            std::swap(perm[k], perm[best]);
        }

        double nrm = 0.0;
        for (std::size_t i = k; i < n; ++i) nrm += b(i, k) * b(i, k);
        nrm = std::sqrt(nrm);
        rdiag.push_back(nrm);
        if (nrm <= 1e-300) break;

        const double alpha = (b(k, k) >= 0 ? -nrm : nrm);
        std::vector<double> v(n - k);
        v[0] = b(k, k) - alpha;
        for (std::size_t i = k + 1; i < n; ++i) v[i - k] = b(i, k);
        double vsq = 0.0;
        for (double x : v) vsq += x * x;
        b(k, k) = alpha;
        for (std::size_t i = k + 1; i < n; ++i) b(i, k) = 0.0;
        if (vsq > 0.0) {
            for (std::size_t j = k + 1; j < m; ++j) {
                double proj = 0.0;
                for (std::size_t i = k; i < n; ++i) proj += v[i - k] * b(i, j);
                const double f = 2.0 * proj / vsq;
                for (std::size_t i = k; i < n; ++i) b(i, j) -= f * v[i - k];
            }
        }
        for (std::size_t j = k + 1; j < m; ++j) {
            col_sq[j] -= b(k, j) * b(k, j);
            if (col_sq[j] < 0) col_sq[j] = 0;
        }
    }

    RankSelection sel;
    if (rdiag.empty() || rdiag[0] <= 1e-300) return sel;
    const double cutoff = tol * rdiag[0];
    while (sel.rank < rdiag.size() && rdiag[sel.rank] > cutoff) ++sel.rank;
    sel.rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(sel.rank));
    std::sort(sel.rows.begin(), sel.rows.end());
    return sel;
}

// Orthonormal basis for the column space via modified Gram-Schmidt with one
// reorthogonalization pass; columns below drop_tol of their original norm
// are discarded.
template <class T>
Matrix<T> orthonormal_columns(const Matrix<T>& a, double drop_tol = 1e-12) {
    const std::size_t n = a.rows();
    std::vector<std::vector<T>> basis;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        std::vector<T> v(n);
        double orig = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            v[r] = a(r, c);
            orig += detail::abs_sq(v[r]);
        }
        orig = std::sqrt(orig);
        if (orig <= 1e-300) continue;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : basis) {
                T coef{};
                for (std::size_t r = 0; r < n; ++r) coef += detail::conj_of(q[r]) * v[r];
                for (std::size_t r = 0; r < n; ++r) v[r] -= coef * q[r];
            }
        }
        double nrm = 0.0;
        for (std::size_t r = 0; r < n; ++r) nrm += detail::abs_sq(v[r]);
        nrm = std::sqrt(nrm);
        if (nrm <= drop_tol * orig) continue;
        for (std::size_t r = 0; r < n; ++r) v[r] /= nrm;
        basis.push_back(std::move(v));
    }
    Matrix<T> q(n, basis.size());
    for (std::size_t c = 0; c < basis.size(); ++c)
        for (std::size_t r = 0; r < n; ++r) q(r, c) = basis[c][r];
    return q;
}

}  // namespace cslab
