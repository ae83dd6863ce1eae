#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cslab/common.hpp"
#include "cslab/linalg.hpp"
#include "cslab/matrix.hpp"

namespace cslab {

struct InconsistentConstraints : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class VarBound : unsigned char { nonnegative, free_var };

// Optional two-sided inequality block: |B x - center|_inf <= radius, rowwise.
struct BoxBlock {
    RealMatrix matrix;
    Vector center;
    double radius = 0.0;
};

// Equality-form LP: minimize cost . x subject to eq_matrix x = eq_rhs, with
// per-variable sign restrictions and an optional box block. eq_matrix is
// expected to have full row rank (callers presolve with pivoted_qr_rank).
struct StandardLP {
    Vector cost;
    RealMatrix eq_matrix;
    Vector eq_rhs;
    std::vector<VarBound> bounds;
    std::optional<BoxBlock> box;
};

struct IpOptions {
    double feas_tol = 1e-9;
    double gap_tol = 1e-9;
    int max_iterations = 200;
};

enum class SolveStatus { optimal, max_iterations, infeasible, numerical_failure };

inline const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::max_iterations: return "max_iterations";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

struct IpSolution {
    Vector x;              // original variables
    Vector y;              // multipliers for the given equality rows
    Vector reduced_costs;  // per original variable (zero for free variables)
    double objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double duality_gap = 0.0;  // relative
    int iterations = 0;
    SolveStatus status = SolveStatus::numerical_failure;
};

namespace detail {

// Internal all-nonnegative standard form plus the bookkeeping to map back.
struct CanonicalLP {
    RealMatrix a;
    Vector b;
    Vector c;
    std::size_t eq_rows = 0;            // leading rows that came from StandardLP::eq_matrix
    std::vector<std::size_t> plus_col;  // original var -> column
    std::vector<std::size_t> minus_col; // original var -> negative column (free vars only)
    std::vector<bool> is_free;
};

inline CanonicalLP canonicalize(const StandardLP& lp) {
    const std::size_t n_orig = lp.cost.size();
    if (lp.bounds.size() != n_orig) throw std::invalid_argument("ip_solve: bounds size mismatch");
    if (lp.eq_matrix.rows() != lp.eq_rhs.size()) throw std::invalid_argument("ip_solve: rhs size mismatch");
    if (lp.eq_matrix.rows() > 0 && lp.eq_matrix.cols() != n_orig)
        throw std::invalid_argument("ip_solve: eq matrix width mismatch");

    CanonicalLP cl;
    cl.plus_col.resize(n_orig);
    cl.minus_col.assign(n_orig, 0);
    cl.is_free.resize(n_orig);
    std::size_t n = 0;
    for (std::size_t i = 0; i < n_orig; ++i) {
        cl.is_free[i] = lp.bounds[i] == VarBound::free_var;
        cl.plus_col[i] = n++;
        if (cl.is_free[i]) cl.minus_col[i] = n++;
    }
    const std::size_t m_box = lp.box ? lp.box->matrix.rows() : 0;
    if (lp.box) {
        if (lp.box->matrix.cols() != n_orig || lp.box->center.size() != m_box || lp.box->radius <= 0)
            throw std::invalid_argument("ip_solve: malformed box block");
    }
    const std::size_t slack_base = n;
    n += 2 * m_box;  // w in [0, 2] after scaling by the radius
    const std::size_t m = lp.eq_matrix.rows() + 2 * m_box;

    cl.a = RealMatrix(m, n);
    cl.b.assign(m, 0.0);
    cl.c.assign(n, 0.0);
    cl.eq_rows = lp.eq_matrix.rows();

    for (std::size_t i = 0; i < n_orig; ++i) {
        cl.c[cl.plus_col[i]] = lp.cost[i];
        if (cl.is_free[i]) cl.c[cl.minus_col[i]] = -lp.cost[i];
    }
    for (std::size_t r = 0; r < lp.eq_matrix.rows(); ++r) {
        for (std::size_t i = 0; i < n_orig; ++i) {
            const double v = lp.eq_matrix(r, i);
            if (v == 0.0) continue;
            cl.a(r, cl.plus_col[i]) = v;
            if (cl.is_free[i]) cl.a(r, cl.minus_col[i]) = -v;
        }
        cl.b[r] = lp.eq_rhs[r];
    }
    // slack columns are scaled by the radius so the slack variables live in
    // [0, 2] whatever the box width; tiny radii otherwise stall the barrier
    for (std::size_t j = 0; j < m_box; ++j) {
        const std::size_t row1 = lp.eq_matrix.rows() + 2 * j;
        const std::size_t row2 = row1 + 1;
        const double r = lp.box->radius;
        for (std::size_t i = 0; i < n_orig; ++i) {
            const double v = lp.box->matrix(j, i);
            if (v == 0.0) continue;
            cl.a(row1, cl.plus_col[i]) = v;
            if (cl.is_free[i]) cl.a(row1, cl.minus_col[i]) = -v;
        }
        cl.a(row1, slack_base + 2 * j) = r;
        cl.b[row1] = lp.box->center[j] + r;
        cl.a(row2, slack_base + 2 * j) = 1.0;
        cl.a(row2, slack_base + 2 * j + 1) = 1.0;
        cl.b[row2] = 2.0;
    }
    return cl;
}

template <class R>
bool cholesky_inplace_t(Matrix<R>& a) {
    const std::size_t n = a.rows();
    R max_diag = 0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i));
    const R threshold = R(1e-14) * std::max(max_diag, R(1e-300));
    for (std::size_t j = 0; j < n; ++j) {
        R d = a(j, j);
        const R* rowj = a.row_ptr(j);
        for (std::size_t k = 0; k < j; ++k) d -= rowj[k] * rowj[k];
        if (!(d > threshold)) return false;
        const R ljj = std::sqrt(d);
        a(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            R s = a(i, j);
            const R* rowi = a.row_ptr(i);
            for (std::size_t k = 0; k < j; ++k) s -= rowi[k] * rowj[k];
            a(i, j) = s / ljj;
        }
    }
    return true;
}

template <class R>
void lower_solve_t(const Matrix<R>& l, std::vector<R>& x) {
    const std::size_t n = l.rows();
    for (std::size_t i = 0; i < n; ++i) {
        R s = x[i];
        const R* row = l.row_ptr(i);
        for (std::size_t k = 0; k < i; ++k) s -= row[k] * x[k];
        x[i] = s / row[i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        R s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
}

// M = A diag(d) A^T into `raw`, plus a Cholesky factor (with escalating
// diagonal regularization when needed) into `factor`.
template <class R>
bool form_and_factor_normal_t(const Matrix<R>& a, const std::vector<R>& d, Matrix<R>& raw,
                              Matrix<R>& factor, std::vector<R>& scratch) {
    const std::size_t rows = a.rows(), cols = a.cols();
    for (std::size_t i = 0; i < rows; ++i) {
        const R* ai = a.row_ptr(i);
        for (std::size_t k = 0; k < cols; ++k) scratch[k] = ai[k] * d[k];
        for (std::size_t j = i; j < rows; ++j) {
            const R* aj = a.row_ptr(j);
            R acc0 = 0, acc1 = 0, acc2 = 0, acc3 = 0;
            std::size_t k = 0;
            for (; k + 4 <= cols; k += 4) {
                acc0 += scratch[k] * aj[k];
                acc1 += scratch[k + 1] * aj[k + 1];
                acc2 += scratch[k + 2] * aj[k + 2];
                acc3 += scratch[k + 3] * aj[k + 3];
            }
            R s = acc0 + acc1 + acc2 + acc3;
            for (; k < cols; ++k) s += scratch[k] * aj[k];
            raw(i, j) = s;
            raw(j, i) = s;
        }
    }
    R max_diag = 0;
    for (std::size_t i = 0; i < rows; ++i) max_diag = std::max(max_diag, raw(i, i));
    if (!(max_diag > 0)) max_diag = 1;

    factor = raw;
    if (cholesky_inplace_t(factor)) return true;
    for (R reg = R(1e-12) * max_diag; reg <= R(1e-2) * max_diag; reg *= 100) {
        factor = raw;
        for (std::size_t i = 0; i < rows; ++i) factor(i, i) += reg;
        if (cholesky_inplace_t(factor)) return true;
    }
    return false;
}

// Factor-based solve with iterative refinement against the unregularized
// matrix; keeps directions usable when the scaling spread is extreme.
template <class R>
void refined_normal_solve_t(const Matrix<R>& raw, const Matrix<R>& factor, std::vector<R>& rhs_inout) {
    const std::size_t n = raw.rows();
    std::vector<R> sol = rhs_inout;
    lower_solve_t(factor, sol);
    R rhs_scale = 0;
    for (const R& v : rhs_inout) rhs_scale = std::max(rhs_scale, std::abs(v));
    std::vector<R> residual(n), correction(n);
    for (int pass = 0; pass < 2; ++pass) {
        R worst = 0;
        for (std::size_t i = 0; i < n; ++i) {
            R reached = 0;
            const R* row = raw.row_ptr(i);
            for (std::size_t k = 0; k < n; ++k) reached += row[k] * sol[k];
            residual[i] = rhs_inout[i] - reached;
            worst = std::max(worst, std::abs(residual[i]));
        }
        if (worst <= std::numeric_limits<R>::epsilon() * 100 * (1 + rhs_scale)) break;
        correction = residual;
        lower_solve_t(factor, correction);
        for (std::size_t i = 0; i < n; ++i) sol[i] += correction[i];
    }
    rhs_inout = sol;
}

template <class R>
R max_step_t(const std::vector<R>& v, const std::vector<R>& dv) {
    R alpha = std::numeric_limits<R>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i)
        if (dv[i] < 0) alpha = std::min(alpha, -v[i] / dv[i]);
    return alpha;
}

template <class R>
struct IpmState {
    std::vector<R> x, y, z;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double duality_gap = 0.0;
    int iterations = 0;
};

enum class IpmRun { converged, handoff, iteration_cap, failure, diverged };

// Mehrotra predictor-corrector over one arithmetic type. When `handoff_mu`
// is positive, the loop returns as soon as complementarity drops below it
// without convergence, so a wider type can finish the endgame.
template <class R>
IpmRun ipm_run(const CanonicalLP& cl, const IpOptions& opts, IpmState<R>& st, bool initialize,
               double handoff_mu, int iteration_budget) {
    const std::size_t m = cl.a.rows();
    const std::size_t n = cl.a.cols();
    Matrix<R> a(m, n);
    for (std::size_t i = 0; i < m * n; ++i) a.data()[i] = R(cl.a.data()[i]);
    std::vector<R> b(cl.b.begin(), cl.b.end());
    std::vector<R> c(cl.c.begin(), cl.c.end());

    R bnorm = 0, cnorm = 0;
    for (const R& v : b) bnorm += v * v;
    for (const R& v : c) cnorm += v * v;
    bnorm = 1 + std::sqrt(bnorm);
    cnorm = 1 + std::sqrt(cnorm);

    Matrix<R> raw(m, m), factor(m, m);
    std::vector<R> scratch(n);

    if (initialize) {
        st.x.assign(n, 1);
        st.z.assign(n, 1);
        st.y.assign(m, 0);
        std::vector<R> ones(n, 1);
        if (!form_and_factor_normal_t(a, ones, raw, factor, scratch)) return IpmRun::failure;
        std::vector<R> w = b;
        refined_normal_solve_t(raw, factor, w);
        std::vector<R> x0(n, 0);
        for (std::size_t r = 0; r < m; ++r) {
            const R* row = a.row_ptr(r);
            for (std::size_t k = 0; k < n; ++k) x0[k] += row[k] * w[r];
        }
        std::vector<R> ac(m, 0);
        for (std::size_t r = 0; r < m; ++r) {
            const R* row = a.row_ptr(r);
            R s = 0;
            for (std::size_t k = 0; k < n; ++k) s += row[k] * c[k];
            ac[r] = s;
        }
        refined_normal_solve_t(raw, factor, ac);
        st.y = ac;
        std::vector<R> z0 = c;
        for (std::size_t r = 0; r < m; ++r) {
            const R* row = a.row_ptr(r);
            for (std::size_t k = 0; k < n; ++k) z0[k] -= row[k] * st.y[r];
        }
        R min_x = x0[0], min_z = z0[0];
        for (const R& v : x0) min_x = std::min(min_x, v);
        for (const R& v : z0) min_z = std::min(min_z, v);
        const R dx0 = std::max(R(-1.5) * min_x, R(0));
        const R dz0 = std::max(R(-1.5) * min_z, R(0));
        R num = 0, sum_x = 0, sum_z = 0;
        for (std::size_t i = 0; i < n; ++i) {
            num += (x0[i] + dx0) * (z0[i] + dz0);
            sum_x += x0[i] + dx0;
            sum_z += z0[i] + dz0;
        }
        const R dx2 = dx0 + (sum_z > 0 ? num / (2 * sum_z) : R(1));
        const R dz2 = dz0 + (sum_x > 0 ? num / (2 * sum_x) : R(1));
        for (std::size_t i = 0; i < n; ++i) {
            st.x[i] = std::max(x0[i] + dx2, R(1e-10));
            st.z[i] = std::max(z0[i] + dz2, R(1e-10));
        }
    }

    std::vector<R>& x = st.x;
    std::vector<R>& y = st.y;
    std::vector<R>& z = st.z;
    std::vector<R> r_p(m), r_d(n), d(n);
    std::vector<R> dy(m), dx(n), dz(n);
    std::vector<R> dy_cor(m), dx_cor(n), dz_cor(n), u(n);

    const R d_cap = std::is_same_v<R, double> ? R(1e30) : R(1e60);
    double best_merit = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int it = 0; it < iteration_budget; ++it) {
        for (std::size_t r = 0; r < m; ++r) {
            const R* row = a.row_ptr(r);
            R s = 0;
            for (std::size_t k = 0; k < n; ++k) s += row[k] * x[k];
            r_p[r] = b[r] - s;
        }
        r_d = c;
        for (std::size_t r = 0; r < m; ++r) {
            const R* row = a.row_ptr(r);
            const R yr = y[r];
            for (std::size_t k = 0; k < n; ++k) r_d[k] -= row[k] * yr;
        }
        for (std::size_t k = 0; k < n; ++k) r_d[k] -= z[k];

        R pobj = 0, dobj = 0, mu = 0, rp_norm = 0, rd_norm = 0;
        for (std::size_t k = 0; k < n; ++k) {
            pobj += c[k] * x[k];
            mu += x[k] * z[k];
        }
        for (std::size_t r = 0; r < m; ++r) {
            dobj += b[r] * y[r];
            rp_norm += r_p[r] * r_p[r];
        }
        for (std::size_t k = 0; k < n; ++k) rd_norm += r_d[k] * r_d[k];
        mu /= R(n);
        rp_norm = std::sqrt(rp_norm);
        rd_norm = std::sqrt(rd_norm);

        st.primal_residual = static_cast<double>(rp_norm / bnorm);
        st.dual_residual = static_cast<double>(rd_norm / cnorm);
        st.duality_gap =
            static_cast<double>(std::abs(pobj - dobj) / (1 + std::abs(pobj) + std::abs(dobj)));
        st.iterations += 1;

        if (st.primal_residual <= opts.feas_tol && st.dual_residual <= opts.feas_tol &&
            st.duality_gap <= opts.gap_tol)
            return IpmRun::converged;

        const double merit =
            std::max({st.primal_residual / opts.feas_tol, st.dual_residual / opts.feas_tol,
                      st.duality_gap / opts.gap_tol});
        if (merit < 0.9 * best_merit) {
            best_merit = merit;
            since_best = 0;
        } else if (++since_best > 30) {
            return IpmRun::iteration_cap;  // stalled; no progress in 30 iterations
        }

        R max_x = 0;
        for (const R& v : x) max_x = std::max(max_x, v);
        if (static_cast<double>(max_x) > 1e14 * static_cast<double>(bnorm) &&
            st.primal_residual > 1e-6)
            return IpmRun::diverged;

        const double comp_rel =
            static_cast<double>(mu * R(n) / (1 + std::abs(pobj) + std::abs(dobj)));
        if (handoff_mu > 0 && comp_rel < handoff_mu) return IpmRun::handoff;

        for (std::size_t k = 0; k < n; ++k) d[k] = std::min(std::max(x[k] / z[k], R(1) / d_cap), d_cap);
        if (!form_and_factor_normal_t(a, d, raw, factor, scratch)) return IpmRun::failure;

        // affine predictor: rhs = r_p + A (D r_d + x)
        for (std::size_t k = 0; k < n; ++k) scratch[k] = d[k] * r_d[k] + x[k];
        for (std::size_t r = 0; r < m; ++r) {
            const R* row = a.row_ptr(r);
            R s = 0;
            for (std::size_t k = 0; k < n; ++k) s += row[k] * scratch[k];
            dy[r] = r_p[r] + s;
        }
        refined_normal_solve_t(raw, factor, dy);
        for (std::size_t k = 0; k < n; ++k) dx[k] = -d[k] * r_d[k] - x[k];
        for (std::size_t r = 0; r < m; ++r) {
            const R* row = a.row_ptr(r);
            const R yr = dy[r];
            for (std::size_t k = 0; k < n; ++k) dx[k] += d[k] * row[k] * yr;
        }
        for (std::size_t k = 0; k < n; ++k) dz[k] = -z[k] - z[k] / x[k] * dx[k];

        const R ap_aff = std::min(R(1), max_step_t(x, dx));
        const R ad_aff = std::min(R(1), max_step_t(z, dz));
        R mu_aff = 0;
        for (std::size_t k = 0; k < n; ++k) mu_aff += (x[k] + ap_aff * dx[k]) * (z[k] + ad_aff * dz[k]);
        mu_aff /= R(n);
        R sigma = mu > 0 ? (mu_aff / mu) * (mu_aff / mu) * (mu_aff / mu) : R(0);
        sigma = std::min(std::max(sigma, R(1e-8)), R(1));
        // Safeguards against complementarity collapse, which wrecks the
        // normal-equations conditioning: never aim below a fraction of the
        // final gap target, reduce mu gently in the endgame, and hold mu
        // flat while feasibility lags behind.
        if (comp_rel > 0)
            sigma = std::max(sigma, std::min(R(1), R(0.05 * opts.gap_tol / comp_rel)));
        if (comp_rel < 1e-4) sigma = std::max(sigma, R(0.1));
        if (comp_rel < 1e-2 * st.primal_residual) sigma = R(1);

        // corrector with complementarity target sigma*mu - dx_aff dz_aff
        for (std::size_t k = 0; k < n; ++k) {
            const R uk = (sigma * mu - x[k] * z[k] - dx[k] * dz[k]) / x[k];
            dx_cor[k] = d[k] * (uk - r_d[k]);
            scratch[k] = -dx_cor[k];
            u[k] = uk;
        }
        for (std::size_t r = 0; r < m; ++r) {
            const R* row = a.row_ptr(r);
            R s = 0;
            for (std::size_t k = 0; k < n; ++k) s += row[k] * scratch[k];
            dy_cor[r] = r_p[r] + s;
        }
        refined_normal_solve_t(raw, factor, dy_cor);
        for (std::size_t r = 0; r < m; ++r) {
            const R* row = a.row_ptr(r);
            const R yr = dy_cor[r];
            for (std::size_t k = 0; k < n; ++k) dx_cor[k] += d[k] * row[k] * yr;
        }
        // feasibility re-projection: the D-scaled back-substitution amplifies
        // solve error, so measure A dx - r_p on the actual step and push the
        // deficit back through the normal equations until it stops contracting
        R deficit_norm = 0;
        {
            R prev_worst = std::numeric_limits<R>::infinity();
            for (int fix_pass = 0; fix_pass < 6; ++fix_pass) {
                R worst = 0;
                deficit_norm = 0;
                for (std::size_t r = 0; r < m; ++r) {
                    const R* row = a.row_ptr(r);
                    R s = 0;
                    for (std::size_t k = 0; k < n; ++k) s += row[k] * dx_cor[k];
                    dy[r] = r_p[r] - s;  // dy reused as scratch
                    worst = std::max(worst, std::abs(dy[r]));
                    deficit_norm += dy[r] * dy[r];
                }
                deficit_norm = std::sqrt(deficit_norm);
                if (worst <= std::numeric_limits<R>::epsilon() * 100 * bnorm) break;
                if (worst > R(0.5) * prev_worst) break;  // no contraction left
                prev_worst = worst;
                refined_normal_solve_t(raw, factor, dy);
                for (std::size_t r = 0; r < m; ++r) {
                    const R* row = a.row_ptr(r);
                    const R yr = dy[r];
                    for (std::size_t k = 0; k < n; ++k) dx_cor[k] += d[k] * row[k] * yr;
                    dy_cor[r] += yr;
                }
            }
        }
        for (std::size_t k = 0; k < n; ++k) dz_cor[k] = u[k] - z[k] / x[k] * dx_cor[k];

        const R gamma = std::min(std::max(R(0.995), 1 - 10 * mu), R(0.99999));
        R ap = std::min(R(1), gamma * max_step_t(x, dx_cor));
        const R ad = std::min(R(1), gamma * max_step_t(z, dz_cor));
        // a step may not inject more infeasibility than a fraction of what is
        // already there (or of the tolerance, once feasible)
        const R allowed = std::max(R(0.25) * rp_norm, R(0.05 * opts.feas_tol) * bnorm);
        if (deficit_norm > allowed) ap = std::min(ap, allowed / deficit_norm);
#ifdef CSLAB_IPM_TRACE
        std::fprintf(stderr, "it=%d mu=%.3e pr=%.3e dr=%.3e gap=%.3e sigma=%.3e ap=%.3e ad=%.3e\n", it,
                     (double)mu, st.primal_residual, st.dual_residual, st.duality_gap, (double)sigma,
                     (double)ap, (double)ad);
#endif
        for (std::size_t k = 0; k < n; ++k) {
            x[k] = std::max(x[k] + ap * dx_cor[k], R(1e-300));
            z[k] = std::max(z[k] + ad * dz_cor[k], R(1e-300));
        }
        for (std::size_t r = 0; r < m; ++r) y[r] += ad * dy_cor[r];
    }
    return IpmRun::iteration_cap;
}

}  // namespace detail

// Mehrotra predictor-corrector on the canonicalized all-nonnegative form,
// normal equations factored densely. Runs in double and hands the endgame to
// long double once complementarity is small, where the scaling spread makes
// double-precision factors useless.
inline IpSolution ip_solve(const StandardLP& lp, const IpOptions& opts = {}) {
    detail::CanonicalLP cl = detail::canonicalize(lp);
    const std::size_t m = cl.a.rows();
    const std::size_t n = cl.a.cols();

    IpSolution out;
    out.x.assign(lp.cost.size(), 0.0);
    out.y.assign(cl.eq_rows, 0.0);
    out.reduced_costs.assign(lp.cost.size(), 0.0);

    if (n == 0 || m == 0) {
        out.status = (m == 0 || norm2(cl.b) == 0.0) ? SolveStatus::optimal : SolveStatus::infeasible;
        return out;
    }

    detail::IpmState<double> fast;
    const double handoff = std::max(1e-7, 10.0 * opts.gap_tol);
    detail::IpmRun run = detail::ipm_run(cl, opts, fast, /*initialize=*/true, handoff,
                                         opts.max_iterations);
    detail::IpmState<long double> wide;
    wide.iterations = fast.iterations;
    bool used_wide = false;
    if (run == detail::IpmRun::handoff ||
        (run == detail::IpmRun::iteration_cap && fast.iterations < opts.max_iterations)) {
        wide.x.assign(fast.x.begin(), fast.x.end());
        wide.y.assign(fast.y.begin(), fast.y.end());
        wide.z.assign(fast.z.begin(), fast.z.end());
        run = detail::ipm_run(cl, opts, wide, /*initialize=*/false, 0.0,
                              opts.max_iterations - fast.iterations);
        used_wide = true;
    }

    SolveStatus status;
    switch (run) {
        case detail::IpmRun::converged: status = SolveStatus::optimal; break;
        case detail::IpmRun::diverged: status = SolveStatus::infeasible; break;
        case detail::IpmRun::failure: status = SolveStatus::numerical_failure; break;
        default: status = SolveStatus::max_iterations; break;
    }

    const auto fill = [&](const auto& st) {
        for (std::size_t i = 0; i < lp.cost.size(); ++i) {
            out.x[i] = static_cast<double>(st.x[cl.plus_col[i]]);
            if (cl.is_free[i]) out.x[i] -= static_cast<double>(st.x[cl.minus_col[i]]);
            out.reduced_costs[i] =
                cl.is_free[i]
                    ? static_cast<double>(st.z[cl.plus_col[i]]) - static_cast<double>(st.z[cl.minus_col[i]])
                    : static_cast<double>(st.z[cl.plus_col[i]]);
        }
        for (std::size_t r = 0; r < cl.eq_rows; ++r) out.y[r] = static_cast<double>(st.y[r]);
        out.primal_residual = st.primal_residual;
        out.dual_residual = st.dual_residual;
        out.duality_gap = st.duality_gap;
        out.iterations = st.iterations;
    };
    if (used_wide)
        fill(wide);
    else
        fill(fast);
    out.status = status;
    out.objective = dot(lp.cost, out.x);
    return out;
}

// Plain-text interchange dump (objective, rows, bounds) for cross-checking
// against external LP tools.
inline void write_lp_text(std::ostream& os, const StandardLP& lp) {
    os << "minimize\n ";
    for (std::size_t i = 0; i < lp.cost.size(); ++i) {
        if (lp.cost[i] == 0.0) continue;
        os << " " << (lp.cost[i] >= 0 ? "+" : "-") << " " << format_double(std::abs(lp.cost[i])) << " x" << i;
    }
    os << "\nsubject to\n";
    for (std::size_t r = 0; r < lp.eq_matrix.rows(); ++r) {
        os << " e" << r << ":";
        for (std::size_t i = 0; i < lp.eq_matrix.cols(); ++i) {
            const double v = lp.eq_matrix(r, i);
            if (v == 0.0) continue;
            os << " " << (v >= 0 ? "+" : "-") << " " << format_double(std::abs(v)) << " x" << i;
        }
        os << " = " << format_double(lp.eq_rhs[r]) << "\n";
    }
    if (lp.box) {
        for (std::size_t r = 0; r < lp.box->matrix.rows(); ++r) {
            os << " b" << r << ": |";
            for (std::size_t i = 0; i < lp.box->matrix.cols(); ++i) {
                const double v = lp.box->matrix(r, i);
                if (v == 0.0) continue;
                os << " " << (v >= 0 ? "+" : "-") << " " << format_double(std::abs(v)) << " x" << i;
            }
            os << " - " << format_double(lp.box->center[r]) << " | <= " << format_double(lp.box->radius) << "\n";
        }
    }
    os << "bounds\n";
    for (std::size_t i = 0; i < lp.bounds.size(); ++i)
        os << " x" << i << (lp.bounds[i] == VarBound::free_var ? " free" : " >= 0") << "\n";
}

}  // namespace cslab
