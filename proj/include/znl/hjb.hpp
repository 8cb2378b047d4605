#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "znl/common.hpp"
#include "znl/domain.hpp"
#include "znl/drift.hpp"
#include "znl/grid.hpp"
#include "znl/ode.hpp"

namespace znl {

struct HjbReport {
    long iterations = 0;
    double final_residual = kNaN;
    std::vector<std::string> warnings;
};

namespace detail {

inline constexpr double kBig = 1e30;

/// Ghost value for an exterior stencil corner: linear continuation of the
/// exit time past the boundary, u = -b_K / <b, grad b_K>, or 0 when the
/// drift is not outward there.
inline double ghost_value(const DriftField& field, const Domain& domain,
                          const Point& corner) {
    const double od = domain.oriented_distance(corner);
    const double speed = dot(field.eval(corner), domain.od_gradient(corner));
    if (!(speed > 1e-12)) return 0.0;
    return -od / speed;
}

/// Semi-Lagrangian candidate at a regular node (|b| >= h): hop distance h
/// along the characteristic and interpolate, or cut the hop at the boundary.
inline double sl_candidate(const DriftField& field, const Domain& domain,
                           GridField& g, long i0, long i1, const Point& x,
                           const double* b, double nb) {
    const double dt = g.h / nb;
    Point foot(g.dim);
    for (int c = 0; c < g.dim; ++c) foot[c] = x[c] + dt * b[c];
    const double gfoot = domain.oriented_distance(foot);
    if (gfoot >= 0.0) {
        const double gx = domain.oriented_distance(x);
        return dt * (0.0 - gx) / (gfoot - gx);
    }
    long base[2] = {0, 0};
    double frac[2] = {0.0, 0.0};
    for (int c = 0; c < g.dim; ++c) {
        const double f = foot[c] / g.h;
        base[c] = static_cast<long>(std::floor(f));
        frac[c] = f - base[c];
    }
    double acc = 0.0, w_self = 0.0;
    const int corners = 1 << g.dim;
    for (int m = 0; m < corners; ++m) {
        const long c0 = base[0] + (m & 1);
        const long c1 = g.dim == 2 ? base[1] + ((m >> 1) & 1) : 0;
        double w = (m & 1) ? frac[0] : 1.0 - frac[0];
        if (g.dim == 2) w *= ((m >> 1) & 1) ? frac[1] : 1.0 - frac[1];
        if (w == 0.0) continue;
        if (c0 == i0 && (g.dim == 1 || c1 == i1)) {
            w_self += w;
            continue;
        }
        double v;
        if (g.in_range(c0, c1)) {
            const std::size_t idx = g.index(c0, c1);
            v = g.interior[idx] ? g.values[idx]
                                : ghost_value(field, domain, g.node_point(c0, c1));
        } else {
            v = 0.0;
        }
        acc += w * v;
    }
    if (w_self > 1.0 - 1e-9) return kBig;
    return std::max(0.0, (dt + acc) / (1.0 - w_self));
}

/// Closure at (near-)equilibrium nodes: minimum over axis directions of the
/// quadrature travel time to a downstream node plus its value. Mirrors the
/// infimum over leaving branches in the exit-time function.
inline double equilibrium_candidate(const DriftField& field, const Domain& domain,
                                    GridField& g, long i0, long i1, const Point& x) {
    double best = kBig;
    for (int axis = 0; axis < g.dim; ++axis) {
        for (int s = -1; s <= 1; s += 2) {
            Point e(g.dim, 0.0);
            e[axis] = s;
            const double reach = domain.ray_exit(x, e);
            if (!(reach > 0.0)) continue;
            if (reach <= g.h) {
                const double T = time_along_segment(field, x, e, reach);
                best = std::min(best, T);
                continue;
            }
            const long m = std::max<long>(1, static_cast<long>(std::floor(0.2 * reach / g.h)));
            const long t0 = i0 + (axis == 0 ? s * m : 0);
            const long t1 = i1 + (axis == 1 ? s * m : 0);
            if (!g.in_range(t0, t1) || !g.interior[g.index(t0, t1)]) continue;
            const double T = time_along_segment(field, x, e, m * g.h);
            if (!std::isfinite(T)) continue;
            best = std::min(best, T + g.values[g.index(t0, t1)]);
        }
    }
    return best;
}

}  // namespace detail

/// First-order exit-time solver: Gauss-Seidel sweeps of the semi-Lagrangian
/// fixed point u(x) = dt + I[u](x + dt b(x)), dt = h / max(|b|, h), with
/// u = 0 outside K. Converges to the minimal exit time along the discrete
/// characteristics; equilibrium nodes take the minimum over outgoing
/// directions.
inline GridField solve_hjb1(const DriftField& field, const Domain& domain, double h,
                            double tol = 1e-12, long max_sweeps = 2000,
                            HjbReport* report = nullptr) {
    if (field.dim != domain.dim)
        throw ValidationError("solve_hjb1: field/domain dimension mismatch");
    {
        const H4Report h4 = check_h4(domain, field, 256);
        if (!h4.passed)
            throw PreconditionError(
                "solve_hjb1: (H4) fails on this boundary (min <b,n> = " +
                fmt17(h4.min_inner) + "); the Dirichlet datum is not attained");
    }
    GridField g = GridField::make(domain, h, detail::kBig);

    const long j1min = g.dim == 2 ? g.kmin[1] : 0;
    const long j1max = g.dim == 2 ? g.kmax[1] : 0;
    double bx[kMaxDim];
    long sweep = 0;
    double change = kInf;
    for (; sweep < max_sweeps && change > tol; ++sweep) {
        change = 0.0;
        for (int ord = 0; ord < (g.dim == 1 ? 2 : 4); ++ord) {
            const bool rev0 = ord & 1;
            const bool rev1 = ord & 2;
            for (long a0 = g.kmin[0]; a0 <= g.kmax[0]; ++a0) {
                const long i0 = rev0 ? g.kmax[0] - (a0 - g.kmin[0]) : a0;
                for (long a1 = j1min; a1 <= j1max; ++a1) {
                    const long i1 = rev1 ? j1max - (a1 - j1min) : a1;
                    const std::size_t idx = g.index(i0, i1);
                    if (!g.interior[idx]) continue;
                    const Point x = g.node_point(i0, i1);
                    field.eval(x.data(), bx);
                    double nb = 0.0;
                    for (int c = 0; c < g.dim; ++c) nb += bx[c] * bx[c];
                    nb = std::sqrt(nb);
                    const double cand =
                        nb < h ? detail::equilibrium_candidate(field, domain, g, i0, i1, x)
                               : detail::sl_candidate(field, domain, g, i0, i1, x, bx, nb);
                    if (cand < g.values[idx]) {
                        change = std::max(change, g.values[idx] - cand);
                        g.values[idx] = cand;
                    }
                }
            }
        }
    }
    if (change > tol)
        throw NonConvergenceError("solve_hjb1: no convergence after " +
                                      std::to_string(max_sweeps) + " sweeps",
                                  change);
    if (report) {
        report->iterations = sweep;
        report->final_residual = change;
    }
    return g;
}

// ---- second-order solver ---------------------------------------------------

struct Hjb2Options {
    double tol = 1e-10;
    long max_iters = 1000000;
    double omega = 1.5;  // SOR relaxation
};

namespace detail {

/// Per-node stencil of <b,Du> + (eps^2/2) Lap u = -1 with upwind drift and
/// Shortley-Weller cut cells at off-grid boundaries. Neighbor spacings are
/// h or the exact distance to the boundary (value 0 there).
struct StencilRow {
    double diag = 0.0;
    double coef[4] = {0, 0, 0, 0};       // -x, +x, -y, +y neighbor weights
    std::size_t nb_idx[4] = {0, 0, 0, 0};
    bool nb_interior[4] = {false, false, false, false};
    double rhs = -1.0;
};

inline StencilRow hjb2_row(const DriftField& field, const Domain& domain,
                           const GridField& g, long i0, long i1, double epsilon) {
    StencilRow row;
    const Point x = g.node_point(i0, i1);
    double b[kMaxDim];
    field.eval(x.data(), b);
    const double D = 0.5 * epsilon * epsilon;
    for (int axis = 0; axis < g.dim; ++axis) {
        double hs[2];  // spacing toward -, +
        for (int s = 0; s < 2; ++s) {
            const long n0 = i0 + (axis == 0 ? (s ? 1 : -1) : 0);
            const long n1 = i1 + (axis == 1 ? (s ? 1 : -1) : 0);
            const int slot = 2 * axis + s;
            const bool inr = g.in_range(n0, n1);
            const bool interior = inr && g.interior[g.index(n0, n1)];
            if (interior) {
                hs[s] = g.h;
                row.nb_idx[slot] = g.index(n0, n1);
                row.nb_interior[slot] = true;
            } else {
                Point e(g.dim, 0.0);
                e[axis] = s ? 1.0 : -1.0;
                hs[s] = std::min(g.h, std::max(1e-6 * g.h, domain.ray_exit(x, e)));
                row.nb_interior[slot] = false;  // Dirichlet 0 at cut point
            }
        }
        const double hm = hs[0], hp = hs[1];
        row.coef[2 * axis + 0] += 2.0 * D / (hm * (hm + hp));
        row.coef[2 * axis + 1] += 2.0 * D / (hp * (hm + hp));
        row.diag -= 2.0 * D / (hm * hp);
        if (b[axis] >= 0.0) {
            row.coef[2 * axis + 1] += b[axis] / hp;
            row.diag -= b[axis] / hp;
        } else {
            row.coef[2 * axis + 0] += -b[axis] / hm;
            row.diag -= -b[axis] / hm;
        }
    }
    return row;
}

}  // namespace detail

/// Elliptic exit-time equation <b,Du> + (eps^2/2) Lap u = -1, u = 0 on the
/// boundary. 1D interval domains use a direct tridiagonal solve; otherwise
/// SOR iteration to the requested residual.
inline GridField solve_hjb2(const DriftField& field, const Domain& domain,
                            double epsilon, double h,
                            const Hjb2Options& opt = {}, HjbReport* report = nullptr) {
    if (!(epsilon > 0)) throw ValidationError("solve_hjb2: epsilon must be > 0");
    if (field.dim != domain.dim)
        throw ValidationError("solve_hjb2: field/domain dimension mismatch");
    GridField g = GridField::make(domain, h, 0.0);

    HjbReport local;
    HjbReport& rep = report ? *report : local;
    if (std::isfinite(field.bound) && field.bound > 0 &&
        h > epsilon * epsilon / field.bound)
        rep.warnings.push_back(
            "cell Peclet warning: h > eps^2 / M_b (upwinding keeps the scheme "
            "monotone, accuracy may degrade)");

    if (g.dim == 1 && domain.kind == DomainKind::Interval) {
        // direct Thomas solve over interior nodes
        std::vector<long> ks;
        for (long k = g.kmin[0]; k <= g.kmax[0]; ++k)
            if (g.interior[g.index(k)]) ks.push_back(k);
        const std::size_t n = ks.size();
        std::vector<double> sub(n), diag(n), sup(n), rhs(n, -1.0);
        for (std::size_t j = 0; j < n; ++j) {
            auto row = detail::hjb2_row(field, domain, g, ks[j], 0, epsilon);
            sub[j] = row.coef[0];
            sup[j] = row.coef[1];
            diag[j] = row.diag;
            rhs[j] = row.rhs;
            // neighbors beyond the interior band carry the Dirichlet 0
            if (j == 0) sub[j] = 0.0;
            if (j + 1 == n) sup[j] = 0.0;
        }
        for (std::size_t j = 1; j < n; ++j) {
            const double wq = sub[j] / diag[j - 1];
            diag[j] -= wq * sup[j - 1];
            rhs[j] -= wq * rhs[j - 1];
        }
        std::vector<double> u(n);
        u[n - 1] = rhs[n - 1] / diag[n - 1];
        for (std::size_t j = n - 1; j-- > 0;)
            u[j] = (rhs[j] - sup[j] * u[j + 1]) / diag[j];
        for (std::size_t j = 0; j < n; ++j) g.values[g.index(ks[j])] = u[j];
        rep.iterations = 1;
        rep.final_residual = 0.0;
        return g;
    }

    // SOR, lexicographic ordering (deterministic)
    std::vector<detail::StencilRow> rows;
    std::vector<std::size_t> node_idx;
    const long j1min = g.dim == 2 ? g.kmin[1] : 0;
    const long j1max = g.dim == 2 ? g.kmax[1] : 0;
    for (long i0 = g.kmin[0]; i0 <= g.kmax[0]; ++i0)
        for (long i1 = j1min; i1 <= j1max; ++i1)
            if (g.interior[g.index(i0, i1)]) {
                rows.push_back(detail::hjb2_row(field, domain, g, i0, i1, epsilon));
                node_idx.push_back(g.index(i0, i1));
            }

    double residual = kInf;
    long it = 0;
    for (; it < opt.max_iters; ++it) {
        for (std::size_t j = 0; j < rows.size(); ++j) {
            const auto& row = rows[j];
            double off = 0.0;
            for (int s = 0; s < 2 * g.dim; ++s)
                if (row.nb_interior[s]) off += row.coef[s] * g.values[row.nb_idx[s]];
            const double u_gs = (row.rhs - off) / row.diag;
            double& u = g.values[node_idx[j]];
            u += opt.omega * (u_gs - u);
        }
        if (it % 20 == 19 || it + 1 == opt.max_iters) {
            residual = 0.0;
            for (std::size_t j = 0; j < rows.size(); ++j) {
                const auto& row = rows[j];
                double off = row.diag * g.values[node_idx[j]];
                for (int s = 0; s < 2 * g.dim; ++s)
                    if (row.nb_interior[s]) off += row.coef[s] * g.values[row.nb_idx[s]];
                residual = std::max(residual, std::fabs(off - row.rhs));
            }
            if (residual < opt.tol) break;
        }
    }
    if (!(residual < opt.tol))
        throw NonConvergenceError("solve_hjb2: SOR residual " + fmt17(residual) +
                                      " after " + std::to_string(it) + " iterations",
                                  residual);
    rep.iterations = it + 1;
    rep.final_residual = residual;
    return g;
}

// ---- 1D quadrature oracle ---------------------------------------------------

namespace detail {

inline double lse2(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

/// Cumulative data on one uniform grid: B(s) = int b, and the log of the
/// scale integrals S(s) = int exp(-2B/eps^2).
struct ScaleGrid {
    double a = 0.0, b = 0.0, dx = 0.0;
    std::vector<double> B;       // at nodes
    std::vector<double> logrho;  // +2B/eps^2
    std::vector<double> logS;    // log int_a^s exp(-2B/eps^2)
    std::vector<double> logSR;   // log int_s^b exp(-2B/eps^2)
};

inline ScaleGrid build_scale_grid(const DriftField& f, double a, double b,
                                  double epsilon, int n, double B0) {
    ScaleGrid s;
    s.a = a;
    s.b = b;
    s.dx = (b - a) / n;
    s.B.resize(n + 1);
    s.logrho.resize(n + 1);
    s.logS.assign(n + 1, -kInf);
    s.logSR.assign(n + 1, -kInf);
    const double inv = 2.0 / (epsilon * epsilon);
    s.B[0] = B0;
    std::vector<double> lp(n + 1), lph(n);  // -2B/eps^2 at nodes / midpoints
    double bx;
    auto evalb = [&](double q) {
        f.eval(&q, &bx);
        return bx;
    };
    for (int j = 0; j < n; ++j) {
        const double x0 = a + j * s.dx, xm = x0 + 0.5 * s.dx, x1 = x0 + s.dx;
        const double b0 = evalb(x0), bm = evalb(xm), b1 = evalb(x1);
        // quadratic through (x0, xm, x1): int over the half panel [x0, xm]
        const double Bm = s.B[j] + (s.dx / 24.0) * (5.0 * b0 + 8.0 * bm - b1);
        s.B[j + 1] = s.B[j] + (s.dx / 6.0) * (b0 + 4.0 * bm + b1);
        lp[j] = -inv * s.B[j];
        lph[j] = -inv * Bm;
    }
    lp[n] = -inv * s.B[n];
    for (int j = 0; j <= n; ++j) s.logrho[j] = inv * s.B[j];
    const double log4 = std::log(4.0), logw = std::log(s.dx / 6.0);
    for (int j = 0; j < n; ++j) {
        const double panel = logw + lse2(lse2(lp[j], log4 + lph[j]), lp[j + 1]);
        s.logS[j + 1] = lse2(s.logS[j], panel);
    }
    for (int j = n; j-- > 0;) {
        const double panel = logw + lse2(lse2(lp[j], log4 + lph[j]), lp[j + 1]);
        s.logSR[j] = lse2(s.logSR[j + 1], panel);
    }
    return s;
}

}  // namespace detail

/// Closed-form oracle for the 1D Dirichlet problem (eps^2/2) u'' + b u' = -1
/// on [l, r], u(l) = u(r) = 0, via the scale function S' = exp(-2B/eps^2):
///
///   u(x) = (2/eps^2) [ (S(r)-S(x))/S(r) * int_l^x S rho
///                    + S(x)/S(r)       * int_x^r (S(r)-S(s)) rho ],
///
/// with rho = 1/S' = exp(+2B/eps^2). All factors are combined in the log
/// domain, so the huge integrating factors at small eps never overflow and
/// every summand is nonnegative (no cancellation). Composite Simpson with
/// n_quad panels split proportionally across [l,x] and [x,r].
inline double expected_exit_oracle_1d(const DriftField& field, double l, double r,
                                      double epsilon, double x, long n_quad = 20000) {
    if (field.dim != 1) throw ValidationError("oracle1d: field must be 1D");
    if (!(l < x && x < r)) throw PreconditionError("oracle1d: require l < x < r");
    if (!(epsilon > 0)) throw ValidationError("oracle1d: epsilon must be > 0");
    const int nl = std::max<int>(8, static_cast<int>(std::lround(
                                        n_quad * (x - l) / (r - l)) / 2 * 2));
    const int nr = std::max<int>(8, static_cast<int>(std::lround(
                                        n_quad * (r - x) / (r - l)) / 2 * 2));

    auto gl = detail::build_scale_grid(field, l, x, epsilon, nl, 0.0);
    auto gr = detail::build_scale_grid(field, x, r, epsilon, nr, gl.B.back());

    const double logSx = gl.logS.back();            // S(x) - S(l)
    const double logSr = detail::lse2(logSx, gr.logS.back());  // S(r) - S(l)

    // T1 = int_l^x (S(s)-S(l)) rho(s) ds  (Simpson on nodes; midpoints via
    // averaged cumulative are within the quadrature error budget)
    auto integral = [](const std::vector<double>& logf, double dx) {
        // composite trapezoid on node values of exp(logf)
        double acc = 0.0;
        for (std::size_t j = 0; j + 1 < logf.size(); ++j)
            acc += 0.5 * dx * (std::exp(logf[j]) + std::exp(logf[j + 1]));
        return acc;
    };
    std::vector<double> f1(gl.logS.size());
    for (std::size_t j = 0; j < f1.size(); ++j) f1[j] = gl.logS[j] + gl.logrho[j];
    std::vector<double> f2(gr.logSR.size());
    for (std::size_t j = 0; j < f2.size(); ++j) f2[j] = gr.logSR[j] + gr.logrho[j];

    const double T1 = integral(f1, gl.dx);
    const double T2 = integral(f2, gr.dx);
    const double wR = std::exp(gr.logSR.front() - logSr);  // (S(r)-S(x))/S(r)
    const double wL = std::exp(logSx - logSr);             // S(x)/S(r)

    const double u = (2.0 / (epsilon * epsilon)) * (wR * T1 + wL * T2);
    if (!std::isfinite(u))
        throw NumericOverflowError(
            "oracle1d: quadrature over/underflowed even after log-domain "
            "rescaling; use a larger epsilon for the oracle");
    return u;
}

}  // namespace znl
