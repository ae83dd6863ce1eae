#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cslab/common.hpp"
#include "cslab/ensembles.hpp"
#include "cslab/lp.hpp"

namespace cslab {

struct Recovery {
    Vector fsharp;
    double l1_value = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double duality_gap = 0.0;
    int iterations = 0;
    SolveStatus status = SolveStatus::numerical_failure;
    Vector dual;  // multipliers for the real-split measurement rows (dropped rows zero)
};

struct BpOptions {
    IpOptions ip;
    double presolve_tol = 1e-10;
};

namespace detail {

// Real-split measurement system: complex rows become (re, im) row pairs.
struct RealSystem {
    RealMatrix a;  // m0 x N
    Vector b;      // m0
};

inline RealSystem real_split(const Measurement& m, const CVector& y) {
    if (y.size() != m.row_count()) throw ShapeMismatch("real_split: measurement count mismatch");
    RealSystem sys;
    const std::size_t n = m.signal_length;
    if (m.complex_rows()) {
        const ComplexMatrix& fm = m.complex_matrix();
        sys.a = RealMatrix(2 * fm.rows(), n);
        sys.b.resize(2 * fm.rows());
        for (std::size_t r = 0; r < fm.rows(); ++r) {
            for (std::size_t t = 0; t < n; ++t) {
                sys.a(2 * r, t) = fm(r, t).real();
                sys.a(2 * r + 1, t) = fm(r, t).imag();
            }
            sys.b[2 * r] = y[r].real();
            sys.b[2 * r + 1] = y[r].imag();
        }
    } else {
        sys.a = m.real_matrix();
        sys.b.resize(y.size());
        for (std::size_t r = 0; r < y.size(); ++r) sys.b[r] = y[r].real();
    }
    return sys;
}

inline RealSystem presolve_rows(const RealSystem& sys, double tol, std::vector<std::size_t>* kept) {
    RankSelection sel = pivoted_qr_rank(sys.a, tol);
    if (sel.rank < sys.a.rows()) {
        // dependent rows: the rhs must satisfy the same dependencies
        RealMatrix aug(sys.a.rows(), sys.a.cols() + 1);
        for (std::size_t r = 0; r < sys.a.rows(); ++r) {
            for (std::size_t c = 0; c < sys.a.cols(); ++c) aug(r, c) = sys.a(r, c);
            aug(r, sys.a.cols()) = sys.b[r];
        }
        if (pivoted_qr_rank(aug, tol).rank > sel.rank)
            throw InconsistentConstraints("presolve: rhs outside the row-space closure");
    }
    RealSystem out;
    out.a = RealMatrix(sel.rank, sys.a.cols());
    out.b.resize(sel.rank);
    for (std::size_t i = 0; i < sel.rank; ++i) {
        const std::size_t r = sel.rows[i];
        for (std::size_t c = 0; c < sys.a.cols(); ++c) out.a(i, c) = sys.a(r, c);
        out.b[i] = sys.b[r];
    }
    if (kept) *kept = sel.rows;
    return out;
}

inline StandardLP split_pair_lp(const RealSystem& sys, std::size_t n) {
    StandardLP lp;
    lp.cost.assign(2 * n, 1.0);
    lp.eq_matrix = RealMatrix(sys.a.rows(), 2 * n);
    for (std::size_t r = 0; r < sys.a.rows(); ++r)
        for (std::size_t c = 0; c < n; ++c) {
            lp.eq_matrix(r, c) = sys.a(r, c);
            lp.eq_matrix(r, n + c) = -sys.a(r, c);
        }
    lp.eq_rhs = sys.b;
    lp.bounds.assign(2 * n, VarBound::nonnegative);
    return lp;
}

}  // namespace detail

// l1 minimization as an equality-form LP. The logical variables (g, u) with
// cost sum u and -u <= g <= u are carried by the nonnegative pair
// x+ = (u+g)/2, x- = (u-g)/2, so the LP has 2N variables, the presolved
// measurement equalities, and 2N sign constraints. g = x+ - x-, u = x+ + x-.
inline StandardLP lp_reformulate(const Measurement& m, const CVector& y, double presolve_tol = 1e-10) {
    detail::RealSystem sys = detail::presolve_rows(detail::real_split(m, y), presolve_tol, nullptr);
    return detail::split_pair_lp(sys, m.signal_length);
}

namespace detail {

inline Recovery recover_from(const Measurement& m, const CVector& y, const IpSolution& sol,
                             const std::vector<std::size_t>& kept_rows, std::size_t split_rows) {
    const std::size_t n = m.signal_length;
    Recovery rec;
    rec.fsharp.resize(n);
    for (std::size_t t = 0; t < n; ++t) rec.fsharp[t] = sol.x[t] - sol.x[n + t];
    rec.l1_value = norm1(rec.fsharp);
    rec.dual_residual = sol.dual_residual;
    rec.duality_gap = sol.duality_gap;
    rec.iterations = sol.iterations;
    rec.status = sol.status;
    rec.dual.assign(split_rows, 0.0);
    for (std::size_t i = 0; i < sol.y.size() && i < kept_rows.size(); ++i)
        rec.dual[kept_rows[i]] = sol.y[i];

    // end-to-end feasibility against the full, unreduced system
    CVector reached = measure(m, rec.fsharp);
    double err = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) err += std::norm(reached[i] - y[i]);
    rec.primal_residual = std::sqrt(err) / (1.0 + norm2(y));
    return rec;
}

}  // namespace detail

// Basis pursuit: minimize ||g||_1 subject to F g = y.
inline Recovery solve_bp(const Measurement& m, const CVector& y, const BpOptions& opts = {}) {
    detail::RealSystem full = detail::real_split(m, y);
    std::vector<std::size_t> kept;
    detail::RealSystem sys = detail::presolve_rows(full, opts.presolve_tol, &kept);
    StandardLP lp = detail::split_pair_lp(sys, m.signal_length);
    IpSolution sol = ip_solve(lp, opts.ip);
    return detail::recover_from(m, y, sol, kept, full.a.rows());
}

// Quantized-measurement variant: minimize ||g||_1 subject to
// |(F g - y_q)_k| <= q/2, real and imaginary parts constrained separately.
inline Recovery solve_bp_quantized(const Measurement& m, const CVector& y_q, double q,
                                   const BpOptions& opts = {}) {
    if (!(q > 0)) throw std::invalid_argument("solve_bp_quantized: q must be positive");
    detail::RealSystem sys = detail::real_split(m, y_q);
    const std::size_t n = m.signal_length;
    StandardLP lp;
    lp.cost.assign(2 * n, 1.0);
    lp.eq_matrix = RealMatrix(0, 2 * n);
    lp.bounds.assign(2 * n, VarBound::nonnegative);
    BoxBlock box;
    box.matrix = RealMatrix(sys.a.rows(), 2 * n);
    for (std::size_t r = 0; r < sys.a.rows(); ++r)
        for (std::size_t c = 0; c < n; ++c) {
            box.matrix(r, c) = sys.a(r, c);
            box.matrix(r, n + c) = -sys.a(r, c);
        }
    box.center = sys.b;
    box.radius = q / 2.0;
    lp.box = std::move(box);
    IpSolution sol = ip_solve(lp, opts.ip);

    Recovery rec;
    rec.fsharp.resize(n);
    for (std::size_t t = 0; t < n; ++t) rec.fsharp[t] = sol.x[t] - sol.x[n + t];
    rec.l1_value = norm1(rec.fsharp);
    rec.dual_residual = sol.dual_residual;
    rec.duality_gap = sol.duality_gap;
    rec.iterations = sol.iterations;
    rec.status = sol.status;
    // feasibility here is box membership: positive part of the overshoot
    CVector reached = measure(m, rec.fsharp);
    double overshoot = 0.0;
    for (std::size_t i = 0; i < y_q.size(); ++i) {
        overshoot = std::max(overshoot, std::abs(reached[i].real() - y_q[i].real()) - q / 2.0);
        overshoot = std::max(overshoot, std::abs(reached[i].imag() - y_q[i].imag()) - q / 2.0);
    }
    rec.primal_residual = std::max(overshoot, 0.0) / (1.0 + norm2(y_q));
    return rec;
}

struct OptimalityReport {
    bool pass = false;
    double primal_residual = 0.0;   // feasibility of the candidate
    double l1_value = 0.0;          // ||g||_1
    double dual_objective = 0.0;    // <y, V> for the certified dual V
    double slack = 0.0;             // l1_value - dual_objective
    double dual_range_linf = 0.0;   // ||F^* V||_inf, must be <= 1
    Vector dual;                    // V in real-split coordinates
    Vector certificate;             // F^* V in signal space
};

// Duality check for a candidate g: find V with ||F^* V||_inf <= 1 maximizing
// <y, V>; g is optimal exactly when the dual objective meets ||g||_1.
inline OptimalityReport verify_optimality(const Measurement& m, const CVector& y, const Vector& g,
                                          const IpOptions& ip = {}, double pass_tol = 1e-7) {
    detail::RealSystem full = detail::real_split(m, y);
    detail::RealSystem sys = detail::presolve_rows(full, 1e-10, nullptr);
    const std::size_t r = sys.a.rows();
    const std::size_t n = m.signal_length;

    // maximize b.V  s.t.  -1 <= A^T V <= 1   (V free)
    // standard form over (V+, V-, s, s'):
    //   A^T V + s = 1,  -A^T V + s' = 1
    StandardLP lp;
    const std::size_t nv = 2 * r + 2 * n;
    lp.cost.assign(nv, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
        lp.cost[i] = -sys.b[i];
        lp.cost[r + i] = sys.b[i];
    }
    lp.eq_matrix = RealMatrix(2 * n, nv);
    lp.eq_rhs.assign(2 * n, 1.0);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t i = 0; i < r; ++i) {
            const double v = sys.a(i, t);
            lp.eq_matrix(t, i) = v;
            lp.eq_matrix(t, r + i) = -v;
            lp.eq_matrix(n + t, i) = -v;
            lp.eq_matrix(n + t, r + i) = v;
        }
        lp.eq_matrix(t, 2 * r + t) = 1.0;
        lp.eq_matrix(n + t, 2 * r + n + t) = 1.0;
    }
    lp.bounds.assign(nv, VarBound::nonnegative);
    IpSolution sol = ip_solve(lp, ip);

    OptimalityReport rep;
    rep.l1_value = norm1(g);
    CVector reached = measure(m, g);
    double err = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) err += std::norm(reached[i] - y[i]);
    rep.primal_residual = std::sqrt(err) / (1.0 + norm2(y));

    rep.dual.assign(r, 0.0);
    for (std::size_t i = 0; i < r; ++i) rep.dual[i] = sol.x[i] - sol.x[r + i];
    rep.dual_objective = dot(sys.b, rep.dual);
    rep.certificate.assign(n, 0.0);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t t = 0; t < n; ++t) rep.certificate[t] += sys.a(i, t) * rep.dual[i];
    rep.dual_range_linf = norm_inf(rep.certificate);
    rep.slack = rep.l1_value - rep.dual_objective;
    rep.pass = sol.status == SolveStatus::optimal &&
               rep.primal_residual <= pass_tol &&
               std::abs(rep.slack) <= pass_tol * (1.0 + rep.l1_value);
    return rep;
}

}  // namespace cslab
