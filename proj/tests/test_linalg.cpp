#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "cslab/linalg.hpp"
#include "cslab/prng.hpp"
#include "support/oracles.hpp"

using namespace cslab;

namespace {

Vector random_vector(std::size_t n, Seed seed) {
    CounterRng rng(seed);
    Vector v(n);
    for (auto& x : v) x = rng.next_gaussian();
    return v;
}

RealMatrix random_symmetric(std::size_t n, Seed seed) {
    CounterRng rng(seed);
    RealMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double v = rng.next_gaussian();
            a(i, j) = v;
            a(j, i) = v;
        }
    return a;
}

}  // namespace

TEST_CASE("dft of the delta at zero is flat") {
    Vector delta = {1.0, 0.0, 0.0, 0.0};
    CVector out = dft(delta);
    for (const auto& v : out) {
        REQUIRE(v.real() == Catch::Approx(0.5).margin(1e-14));
        REQUIRE(v.imag() == Catch::Approx(0.0).margin(1e-14));
    }
}

TEST_CASE("dft of the all-ones vector concentrates at frequency zero") {
    Vector ones = {1.0, 1.0, 1.0, 1.0};
    CVector out = dft(ones);
    REQUIRE(out[0].real() == Catch::Approx(2.0).margin(1e-14));
    for (std::size_t k = 1; k < 4; ++k) REQUIRE(std::abs(out[k]) < 1e-14);
}

TEST_CASE("dft is unitary (Plancherel)") {
    for (std::size_t n : {64u, 37u, 128u, 100u}) {
        Vector f = random_vector(n, Seed{17, n});
        const double in_norm = norm2(f);
        const double out_norm = norm2(dft(f));
        REQUIRE(std::abs(in_norm - out_norm) <= 1e-12 * in_norm);
    }
}

TEST_CASE("idft inverts dft") {
    Vector f = random_vector(32, Seed{5, 0});
    CVector z(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) z[i] = f[i];
    CVector back = idft(dft(z));
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(back[i] - z[i]));
    REQUIRE(err < 1e-12 * norm2(f));
}

TEST_CASE("idft of a spike spectrum is the all-ones vector") {
    CVector g = {{2.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
    CVector f = idft(g);
    for (const auto& v : f) {
        REQUIRE(v.real() == Catch::Approx(1.0).margin(1e-14));
        REQUIRE(std::abs(v.imag()) < 1e-14);
    }
}

TEST_CASE("idft of zero is zero") {
    CVector g(8, {0.0, 0.0});
    for (const auto& v : idft(g)) REQUIRE(std::abs(v) == 0.0);
}

TEST_CASE("symmetric_eigs on identity and diagonal matrices") {
    Spectrum s = symmetric_eigs(RealMatrix::identity(3));
    for (double v : s.eigenvalues) REQUIRE(v == Catch::Approx(1.0).margin(1e-12));

    RealMatrix d(3, 3);
    d(0, 0) = 2.0;
    d(1, 1) = -1.0;
    d(2, 2) = 5.0;
    Spectrum sd = symmetric_eigs(d);
    REQUIRE(sd.eigenvalues[0] == Catch::Approx(-1.0).margin(1e-12));
    REQUIRE(sd.eigenvalues[1] == Catch::Approx(2.0).margin(1e-12));
    REQUIRE(sd.eigenvalues[2] == Catch::Approx(5.0).margin(1e-12));
}

TEST_CASE("rank-one projector has a single unit eigenvalue") {
    CounterRng rng(Seed{33, 0});
    const std::size_t n = 8;
    Vector v(n);
    for (auto& x : v) x = rng.next_gaussian();
    const double nrm = norm2(v);
    for (auto& x : v) x /= nrm;
    RealMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = v[i] * v[j];
    Spectrum s = symmetric_eigs(a);
    for (std::size_t i = 0; i + 1 < n; ++i) REQUIRE(std::abs(s.eigenvalues[i]) < 1e-10);
    REQUIRE(s.eigenvalues.back() == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("symmetric_eigs rejects asymmetric input") {
    RealMatrix a(2, 2);
    a(0, 1) = 1.0;
    a(1, 0) = 0.5;
    REQUIRE_THROWS_AS(symmetric_eigs(a), NotSymmetric);
}

TEST_CASE("eigendecomposition reconstructs the matrix") {
    for (std::size_t n : {4u, 16u, 64u, 128u}) {
        RealMatrix a = random_symmetric(n, Seed{91, n});
        Spectrum s = symmetric_eigs(a);
        const RealMatrix& q = *s.eigenvectors;
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double v = 0.0;
                for (std::size_t k = 0; k < n; ++k) v += q(i, k) * s.eigenvalues[k] * q(j, k);
                err += (v - a(i, j)) * (v - a(i, j));
            }
        REQUIRE(std::sqrt(err) <= 1e-9 * frobenius_norm(a));
    }
}

TEST_CASE("jacobi agrees with characteristic-polynomial roots on small integer matrices") {
    // all symmetric 2x2 with integer entries in [-3, 3]
    for (int a = -3; a <= 3; ++a)
        for (int b = -3; b <= 3; ++b)
            for (int d = -3; d <= 3; ++d) {
                RealMatrix m(2, 2);
                m(0, 0) = a;
                m(0, 1) = m(1, 0) = b;
                m(1, 1) = d;
                Spectrum s = symmetric_eigs(m, false);
                Vector expect = oracle::symmetric_eigs_2x2(a, b, d);
                REQUIRE(std::abs(s.eigenvalues[0] - expect[0]) < 1e-10);
                REQUIRE(std::abs(s.eigenvalues[1] - expect[1]) < 1e-10);
            }
    // All symmetric 3x3 with integer entries in [-3, 3]. The characteristic
    // polynomial has exact integer coefficients; each eigenvalue must be one
    // of its roots (polynomial residual, quadratic near multiple roots) and
    // the full multiset must reproduce its elementary symmetric functions.
    for (int a = -3; a <= 3; ++a)
        for (int b = -3; b <= 3; ++b)
            for (int c = -3; c <= 3; ++c)
                for (int d = -3; d <= 3; ++d)
                    for (int e = -3; e <= 3; ++e)
                        for (int f = -3; f <= 3; ++f) {
                            RealMatrix m(3, 3);
                            m(0, 0) = a;
                            m(1, 1) = d;
                            m(2, 2) = f;
                            m(0, 1) = m(1, 0) = b;
                            m(0, 2) = m(2, 0) = c;
                            m(1, 2) = m(2, 1) = e;
                            Spectrum s = symmetric_eigs(m, false);
                            const auto& ev = s.eigenvalues;
                            const long e1 = a + d + f;
                            const long e2 = (long(a) * d - long(b) * b) + (long(a) * f - long(c) * c) +
                                            (long(d) * f - long(e) * e);
                            const long e3 = long(a) * (long(d) * f - long(e) * e) -
                                            long(b) * (long(b) * f - long(e) * c) +
                                            long(c) * (long(b) * e - long(d) * c);
                            for (double lam : ev) {
                                const double p = ((-lam + e1) * lam - e2) * lam + e3;
                                const double pd = -3.0 * lam * lam + 2.0 * e1 * lam - e2;
                                const double fuzz = std::abs(lam) * std::abs(lam) * std::abs(lam) +
                                                    std::abs(double(e1)) * lam * lam +
                                                    std::abs(double(e2) * lam) + std::abs(double(e3));
                                REQUIRE(std::abs(p) <= 1e-10 * (1.0 + std::abs(pd)) + 1e-12 * (1.0 + fuzz));
                            }
                            REQUIRE(std::abs(ev[0] + ev[1] + ev[2] - e1) <= 1e-10 * (1.0 + std::abs(double(e1))));
                            REQUIRE(std::abs(ev[0] * ev[1] + ev[0] * ev[2] + ev[1] * ev[2] - e2) <=
                                    1e-10 * (1.0 + std::abs(double(e2))));
                            REQUIRE(std::abs(ev[0] * ev[1] * ev[2] - e3) <= 1e-10 * (1.0 + std::abs(double(e3))));
                        }
}

TEST_CASE("hermitian_eigs matches the real solver on real input and handles complex input") {
    RealMatrix a = random_symmetric(6, Seed{7, 7});
    ComplexMatrix h(6, 6);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) h(i, j) = a(i, j);
    Spectrum real_s = symmetric_eigs(a, false);
    HermitianSpectrum herm_s = hermitian_eigs(h);
    for (std::size_t i = 0; i < 6; ++i)
        REQUIRE(herm_s.eigenvalues[i] == Catch::Approx(real_s.eigenvalues[i]).margin(1e-9));

    // complex Hermitian with known spectrum: [[2, i], [-i, 2]] -> {1, 3}
    ComplexMatrix c(2, 2);
    c(0, 0) = 2.0;
    c(1, 1) = 2.0;
    c(0, 1) = {0.0, 1.0};
    c(1, 0) = {0.0, -1.0};
    HermitianSpectrum sc = hermitian_eigs(c);
    REQUIRE(sc.eigenvalues[0] == Catch::Approx(1.0).margin(1e-10));
    REQUIRE(sc.eigenvalues[1] == Catch::Approx(3.0).margin(1e-10));
}

TEST_CASE("cholesky_solve on identity and diagonal systems") {
    RealMatrix eye = RealMatrix::identity(3);
    Vector b = {1.0, -2.0, 0.5};
    Vector x = cholesky_solve(eye, b);
    for (std::size_t i = 0; i < 3; ++i) REQUIRE(x[i] == Catch::Approx(b[i]));

    RealMatrix d(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    Vector x2 = cholesky_solve(d, {8.0, 27.0});
    REQUIRE(x2[0] == Catch::Approx(2.0));
    REQUIRE(x2[1] == Catch::Approx(3.0));
}

TEST_CASE("cholesky_solve residual on a random SPD system") {
    const std::size_t n = 16;
    CounterRng rng(Seed{55, 1});
    RealMatrix m(n, n);
    for (auto& v : m.data()) v = rng.next_gaussian();
    RealMatrix spd = gram(m);
    for (std::size_t i = 0; i < n; ++i) spd(i, i) += 1.0;
    Vector b(n);
    for (auto& v : b) v = rng.next_gaussian();
    Vector x = cholesky_solve(spd, b);
    Vector reached = matvec(spd, x);
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i) resid += (reached[i] - b[i]) * (reached[i] - b[i]);
    REQUIRE(std::sqrt(resid) <= 1e-8 * (frobenius_norm(spd) * norm2(x) + norm2(b)));
}

TEST_CASE("cholesky rejects indefinite matrices") {
    RealMatrix a(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = -1.0;
    REQUIRE_THROWS_AS(cholesky_solve(a, {1.0, 1.0}), NotPositiveDefinite);
}

TEST_CASE("complex cholesky solves Hermitian positive definite systems") {
    ComplexMatrix a(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = 3.0;
    a(0, 1) = {0.5, 0.5};
    a(1, 0) = {0.5, -0.5};
    CVector b = {{1.0, 0.0}, {0.0, 1.0}};
    auto factor = cholesky(a);
    REQUIRE(factor.has_value());
    CVector x = factor->solve(b);
    // residual check
    for (std::size_t i = 0; i < 2; ++i) {
        std::complex<double> reached{};
        for (std::size_t j = 0; j < 2; ++j) reached += a(i, j) * x[j];
        REQUIRE(std::abs(reached - b[i]) < 1e-12);
    }
}

TEST_CASE("pivoted_qr_rank identifies rank and independent rows") {
    REQUIRE(pivoted_qr_rank(RealMatrix(3, 4), 1e-10).rank == 0);
    REQUIRE(pivoted_qr_rank(RealMatrix::identity(5), 1e-10).rank == 5);

    // two identical rows
    RealMatrix dup(2, 8);
    CounterRng rng(Seed{2, 2});
    for (std::size_t c = 0; c < 8; ++c) {
        dup(0, c) = rng.next_gaussian();
        dup(1, c) = dup(0, c);
    }
    RankSelection sel = pivoted_qr_rank(dup, 1e-10);
    REQUIRE(sel.rank == 1);
    REQUIRE(sel.rows.size() == 1);

    // random rank-3 matrix from an outer product
    RealMatrix left(6, 3), right(3, 10);
    for (auto& v : left.data()) v = rng.next_gaussian();
    for (auto& v : right.data()) v = rng.next_gaussian();
    RealMatrix prod = matmul(left, right);
    REQUIRE(pivoted_qr_rank(prod, 1e-10).rank == 3);
}

TEST_CASE("selected rows span the row space") {
    CounterRng rng(Seed{81, 3});
    RealMatrix a(6, 12);
    // rows 0..2 random, rows 3..5 combinations of them
    for (std::size_t c = 0; c < 12; ++c) {
        for (std::size_t r = 0; r < 3; ++r) a(r, c) = rng.next_gaussian();
        a(3, c) = a(0, c) - 2.0 * a(1, c);
        a(4, c) = 0.5 * a(2, c);
        a(5, c) = a(0, c) + a(1, c) + a(2, c);
    }
    RankSelection sel = pivoted_qr_rank(a, 1e-10);
    REQUIRE(sel.rank == 3);
    // every row of a must be representable in the selected rows' span:
    // project each row onto the orthonormalized selection and check residual
    RealMatrix chosen(12, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t c = 0; c < 12; ++c) chosen(c, i) = a(sel.rows[i], c);
    RealMatrix q = orthonormal_columns(chosen);
    for (std::size_t r = 0; r < 6; ++r) {
        Vector row(12);
        for (std::size_t c = 0; c < 12; ++c) row[c] = a(r, c);
        Vector coef = adjoint_matvec(q, row);
        Vector proj = matvec(q, coef);
        double resid = 0.0;
        for (std::size_t c = 0; c < 12; ++c) resid += (row[c] - proj[c]) * (row[c] - proj[c]);
        REQUIRE(std::sqrt(resid) <= 1e-10 * (1.0 + norm2(row)));
    }
}
