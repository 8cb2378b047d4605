#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "znl/common.hpp"
#include "znl/domain.hpp"
#include "znl/drift.hpp"
#include "znl/path.hpp"

namespace znl {

inline constexpr int kMaxDim = 4;

namespace detail {

/// One classical RK4 step of x' = b(x).
inline void rk4_step(const DriftField& f, const double* x, double dt, double* out) {
    const int d = f.dim;
    double k1[kMaxDim], k2[kMaxDim], k3[kMaxDim], k4[kMaxDim], tmp[kMaxDim];
    f.eval(x, k1);
    for (int i = 0; i < d; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    f.eval(tmp, k2);
    for (int i = 0; i < d; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    f.eval(tmp, k3);
    for (int i = 0; i < d; ++i) tmp[i] = x[i] + dt * k3[i];
    f.eval(tmp, k4);
    for (int i = 0; i < d; ++i)
        out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace detail

/// Fixed-step RK4 trajectory of x' = b(x) sampled at multiples of `step`.
/// Starting exactly at the equilibrium 0 is refused: RK4 would return the
/// constant path and mask the non-uniqueness (use enumerate_leaving).
/// If `stop_domain` is given, integration stops one sample after leaving K.
inline Path integrate_ode(const DriftField& field, const Point& x0, double horizon,
                          double step, const Domain* stop_domain = nullptr) {
    if (!(step > 0) || !(horizon > 0) || step > horizon / 10.0)
        throw ValidationError("integrate_ode: require 0 < step <= horizon/10");
    if (static_cast<int>(x0.size()) != field.dim)
        throw ValidationError("integrate_ode: x0 dimension mismatch");
    if (is_origin(x0))
        throw AmbiguousOriginError(
            "integrate_ode: x0 = 0 is the equilibrium of b; RK4 would return the "
            "constant path and mask non-uniqueness. Use enumerate_leaving.");

    const long n = std::lround(horizon / step);
    Path path;
    path.times.reserve(n + 1);
    path.states.reserve(n + 1);
    double x[kMaxDim], xn[kMaxDim];
    for (int i = 0; i < field.dim; ++i) x[i] = x0[i];
    path.times.push_back(0.0);
    path.states.emplace_back(x0);
    for (long k = 0; k < n; ++k) {
        detail::rk4_step(field, x, step, xn);
        std::copy(xn, xn + field.dim, x);
        path.times.push_back((k + 1) * step);
        path.states.emplace_back(x, x + field.dim);
        if (stop_domain && stop_domain->oriented_distance(x) >= 0.0) break;
    }
    return path;
}

/// Travel time along the straight segment base + s*e, s in [0, L], for a
/// drift whose component along e may vanish like |s|^g at s=0 (integrable).
/// The substitution s = v^2 removes square-root singularities exactly;
/// midpoint rule on v then converges fast. Returns +inf if the drift
/// component is not strictly positive along the segment.
inline double time_along_segment(const DriftField& field, const Point& base,
                                 const Point& e, double L, int n = 512) {
    const double vmax = std::sqrt(L);
    const double dv = vmax / n;
    double T = 0.0;
    Point x(field.dim);
    for (int i = 0; i < n; ++i) {
        const double v = (i + 0.5) * dv;
        const double s = v * v;
        for (int c = 0; c < field.dim; ++c) x[c] = base[c] + s * e[c];
        const double g = dot(field.eval(x), e);
        if (g <= 0.0) return kInf;
        T += 2.0 * v * dv / g;
    }
    return T;
}

// ---- leaving solutions ----------------------------------------------------

struct LeavingMember {
    std::string label;
    Path path;               // starts at the origin
    std::string description; // analytic form when known
    double probability = kNaN;  // stated selection weight when known
};

struct LeavingSolutionSet {
    std::vector<LeavingMember> members;
    std::string origin_field;  // drift label
    bool continuum = false;    // discretized family (e.g. rays), not exhaustive

    bool empty() const { return members.empty(); }
};

/// Numerical realization of the leaving-solution set: seed just off the
/// equilibrium in drift-aligned directions, integrate forward, and prepend
/// the origin with the analytic time offset. When the registry carries an
/// exact finite leaving set (1D branches, product fields), those solutions
/// are returned with their ground-truth labels instead.
inline LeavingSolutionSet enumerate_leaving(const DriftField& field,
                                            int n_directions, double delta,
                                            double horizon, double step) {
    if (n_directions < 2) throw ValidationError("enumerate_leaving: n_directions >= 2");
    if (!(delta > 0)) throw ValidationError("enumerate_leaving: delta > 0");
    LeavingSolutionSet set;
    set.origin_field = field.label;
    set.continuum = field.leaving_is_continuum;

    if (!field.leaving.empty()) {
        // Exact branches known: sample them directly.
        const long n = std::lround(horizon / step);
        for (const AnalyticSolution& sol : field.leaving) {
            LeavingMember m;
            m.label = sol.label;
            m.description = sol.description;
            m.probability = sol.probability;
            m.path.times.reserve(n + 1);
            m.path.states.reserve(n + 1);
            for (long k = 0; k <= n; ++k) {
                m.path.times.push_back(k * step);
                m.path.states.push_back(sol.state(k * step));
            }
            set.members.push_back(std::move(m));
        }
        return set;
    }

    std::vector<Point> dirs;
    if (field.dim == 1) {
        dirs = {Point{1.0}, Point{-1.0}};
    } else if (field.dim == 2) {
        for (int i = 0; i < n_directions; ++i) {
            const double a = 2.0 * kPi * i / n_directions;
            dirs.push_back(Point{std::sin(a), std::cos(a)});
        }
    } else {
        throw ValidationError("enumerate_leaving: only dim 1 and 2 supported");
    }

    std::vector<std::pair<int, Path>> kept;
    for (int di = 0; di < static_cast<int>(dirs.size()); ++di) {
        const Point& u = dirs[di];
        Point seed(field.dim);
        for (int c = 0; c < field.dim; ++c) seed[c] = delta * u[c];
        if (dot(field.eval(seed), u) <= 0.0) continue;  // does not escape this way

        Path traj = integrate_ode(field, seed, horizon, step);
        // time from the origin to the seed along the ray, then prepend 0
        const double t_delta = time_along_segment(field, Point(field.dim, 0.0), u, delta, 128);
        Path p;
        p.times.reserve(traj.size() + 1);
        p.states.reserve(traj.size() + 1);
        p.times.push_back(0.0);
        p.states.push_back(Point(field.dim, 0.0));
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double t = (std::isfinite(t_delta) ? t_delta : 0.0) + traj.times[k];
            if (t <= 0.0) continue;
            p.times.push_back(t);
            p.states.push_back(traj.states[k]);
        }

        // de-duplicate branches that collapsed onto each other
        const Point& probe = p.state_at_or_after(horizon / 2.0);
        bool duplicate = false;
        for (const auto& [idx, q] : kept) {
            if (dist(probe, q.state_at_or_after(horizon / 2.0)) < 10.0 * delta) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) kept.emplace_back(di, std::move(p));
    }

    for (auto& [di, p] : kept) {
        LeavingMember m;
        char lbl[32];
        std::snprintf(lbl, sizeof(lbl), "dir-%03d", di);
        m.label = lbl;
        m.path = std::move(p);
        set.members.push_back(std::move(m));
    }
    return set;
}

/// Exit times of all leaving members from K; fills member exit records.
inline void compute_leaving_exits(LeavingSolutionSet& leaving, const Domain& domain) {
    for (LeavingMember& m : leaving.members) {
        if (m.path.exit) continue;
        auto rec = exit_functional(m.path, domain);
        if (!rec)
            throw NoExitError("leaving solution '" + m.label +
                                  "' never exits the domain within its horizon",
                              deepest_oriented_distance(m.path, domain));
        rec->label = m.label;
        m.path.exit = rec;
    }
}

// ---- assumption (H3) ------------------------------------------------------

struct H3Report {
    bool passed = false;
    std::vector<std::pair<std::string, double>> exit_times;
    double spread = kNaN;  // max - min exit time
};

/// (H3): all leaving solutions hit the boundary of K at a common time.
inline H3Report check_h3(const Domain& domain, LeavingSolutionSet leaving,
                         double tol) {
    if (leaving.empty()) throw PreconditionError("check_h3: empty leaving set");
    compute_leaving_exits(leaving, domain);
    H3Report rep;
    double tmin = kInf, tmax = -kInf;
    for (const LeavingMember& m : leaving.members) {
        rep.exit_times.emplace_back(m.label, m.path.exit->time);
        tmin = std::min(tmin, m.path.exit->time);
        tmax = std::max(tmax, m.path.exit->time);
    }
    rep.spread = tmax - tmin;
    rep.passed = rep.spread <= tol;
    return rep;
}

// ---- exit-time function V_K -----------------------------------------------

/// V_K(x): for x != 0 the exit time of the locally unique trajectory from x;
/// for x = 0 the minimum over leaving solutions. +inf if nothing exits
/// within the horizon (diagnostic carries the deepest b_K reached).
inline double exit_time_function(const DriftField& field, const Domain& domain,
                                 const LeavingSolutionSet& leaving, const Point& x,
                                 double horizon, double step,
                                 double* deepest_diag = nullptr) {
    if (!domain.contains(x))
        throw PreconditionError("exit_time_function: x must lie in K");
    if (is_origin(x)) {
        double best = kInf, deepest = kInf;
        for (const LeavingMember& m : leaving.members) {
            auto rec = m.path.exit ? m.path.exit : exit_functional(m.path, domain);
            if (rec)
                best = std::min(best, rec->time);
            else
                deepest = std::min(deepest, deepest_oriented_distance(m.path, domain));
        }
        if (deepest_diag) *deepest_diag = best < kInf ? 0.0 : deepest;
        return best;
    }
    Path p = integrate_ode(field, x, horizon, step, &domain);
    auto rec = exit_functional(p, domain);
    if (!rec) {
        if (deepest_diag) *deepest_diag = deepest_oriented_distance(p, domain);
        return kInf;
    }
    return rec->time;
}

}  // namespace znl
