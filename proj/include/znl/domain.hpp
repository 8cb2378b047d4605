#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "znl/common.hpp"
#include "znl/drift.hpp"

namespace znl {

enum class DomainKind { Interval, Box, Ball };

inline std::string to_string(DomainKind k) {
    switch (k) {
        case DomainKind::Interval: return "interval";
        case DomainKind::Box: return "box";
        case DomainKind::Ball: return "ball";
    }
    return "?";
}

/// Compact domain K with oriented distance b_K (negative inside, zero on the
/// boundary, positive outside). 0 must lie in the interior. Immutable.
struct Domain {
    DomainKind kind = DomainKind::Interval;
    int dim = 1;
    double l = -1.0, r = 1.0;  // interval
    Point lo, hi;              // box
    Point center;              // ball
    double radius = 1.0;       // ball

    static Domain interval(double l, double r) {
        Domain d;
        d.kind = DomainKind::Interval;
        d.dim = 1;
        d.l = l;
        d.r = r;
        if (!(l < 0.0 && 0.0 < r))
            throw ValidationError("domain: 0 must lie in the interior of K");
        return d;
    }

    static Domain box(Point lo, Point hi) {
        Domain d;
        d.kind = DomainKind::Box;
        d.dim = static_cast<int>(lo.size());
        d.lo = std::move(lo);
        d.hi = std::move(hi);
        for (int i = 0; i < d.dim; ++i)
            if (!(d.lo[i] < 0.0 && 0.0 < d.hi[i]))
                throw ValidationError("domain: 0 must lie in the interior of K");
        return d;
    }

    static Domain ball(Point center, double radius) {
        Domain d;
        d.kind = DomainKind::Ball;
        d.dim = static_cast<int>(center.size());
        d.center = std::move(center);
        d.radius = radius;
        if (!(norm(d.center) < radius))
            throw ValidationError("domain: 0 must lie in the interior of K");
        return d;
    }

    double diameter() const {
        switch (kind) {
            case DomainKind::Interval: return r - l;
            case DomainKind::Ball: return 2.0 * radius;
            case DomainKind::Box: {
                double s = 0.0;
                for (int i = 0; i < dim; ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
                return std::sqrt(s);
            }
        }
        return 0.0;
    }

    /// Boundary-membership tolerance; geometry is exact, this only absorbs
    /// floating-point noise.
    double tol_boundary() const { return 1e-9 * diameter(); }

    std::string describe() const {
        switch (kind) {
            case DomainKind::Interval:
                return "interval[" + fmt17(l) + "," + fmt17(r) + "]";
            case DomainKind::Ball: {
                std::string s = "ball(center=(";
                for (int i = 0; i < dim; ++i) s += (i ? "," : "") + fmt17(center[i]);
                return s + "),radius=" + fmt17(radius) + ")";
            }
            case DomainKind::Box: {
                std::string s = "box(";
                for (int i = 0; i < dim; ++i)
                    s += (i ? "x[" : "[") + fmt17(lo[i]) + "," + fmt17(hi[i]) + "]";
                return s + ")";
            }
        }
        return "domain";
    }

    double oriented_distance(const double* x) const {
        switch (kind) {
            case DomainKind::Interval:
                return std::max(l - x[0], x[0] - r);
            case DomainKind::Ball: {
                double s = 0.0;
                for (int i = 0; i < dim; ++i) {
                    const double d = x[i] - center[i];
                    s += d * d;
                }
                return std::sqrt(s) - radius;
            }
            case DomainKind::Box: {
                bool inside = true;
                double out2 = 0.0, in_min = kInf;
                for (int i = 0; i < dim; ++i) {
                    const double a = lo[i] - x[i], b = x[i] - hi[i];
                    const double e = std::max(a, b);
                    if (e > 0.0) {
                        inside = false;
                        out2 += e * e;
                    } else {
                        in_min = std::min(in_min, -e);
                    }
                }
                return inside ? -in_min : std::sqrt(out2);
            }
        }
        return kNaN;
    }

    double oriented_distance(const Point& x) const {
        return oriented_distance(x.data());
    }

    bool contains(const Point& x) const { return oriented_distance(x) <= 0.0; }

    /// Unit outward normal at a boundary point. Box edges/corners (several
    /// faces within tolerance) are degenerate and raise an error.
    Point outward_normal(const Point& x) const {
        const double tol = tol_boundary();
        if (std::fabs(oriented_distance(x)) > tol)
            throw PreconditionError("outward_normal: point is not on the boundary");
        switch (kind) {
            case DomainKind::Interval:
                return Point{x[0] > (l + r) / 2.0 ? 1.0 : -1.0};
            case DomainKind::Ball: {
                Point n(dim);
                double s = 0.0;
                for (int i = 0; i < dim; ++i) {
                    n[i] = x[i] - center[i];
                    s += n[i] * n[i];
                }
                s = std::sqrt(s);
                for (int i = 0; i < dim; ++i) n[i] /= s;
                return n;
            }
            case DomainKind::Box: {
                int face_axis = -1;
                double face_sign = 0.0;
                int n_faces = 0;
                for (int i = 0; i < dim; ++i) {
                    if (std::fabs(x[i] - lo[i]) <= tol) {
                        ++n_faces;
                        face_axis = i;
                        face_sign = -1.0;
                    }
                    if (std::fabs(x[i] - hi[i]) <= tol) {
                        ++n_faces;
                        face_axis = i;
                        face_sign = 1.0;
                    }
                }
                if (n_faces != 1)
                    throw DegenerateBoundaryError(
                        "outward_normal: box edge/corner, normal is not unique");
                Point n(dim, 0.0);
                n[face_axis] = face_sign;
                return n;
            }
        }
        return {};
    }

    /// Gradient of the oriented distance (unit vector toward the exterior,
    /// defined a.e.; box ties resolve to the first minimal axis).
    Point od_gradient(const Point& x) const {
        switch (kind) {
            case DomainKind::Interval:
                return Point{(l - x[0]) > (x[0] - r) ? -1.0 : 1.0};
            case DomainKind::Ball: {
                Point g(dim);
                double s = 0.0;
                for (int i = 0; i < dim; ++i) {
                    g[i] = x[i] - center[i];
                    s += g[i] * g[i];
                }
                s = std::sqrt(s);
                if (s == 0.0) {
                    g.assign(dim, 0.0);
                    g[0] = 1.0;
                    return g;
                }
                for (int i = 0; i < dim; ++i) g[i] /= s;
                return g;
            }
            case DomainKind::Box: {
                Point g(dim, 0.0);
                if (oriented_distance(x) > 0.0) {
                    double s = 0.0;
                    for (int i = 0; i < dim; ++i) {
                        const double e = std::max(lo[i] - x[i], x[i] - hi[i]);
                        if (e > 0.0) {
                            g[i] = (x[i] > hi[i]) ? e : -e;
                            s += e * e;
                        }
                    }
                    s = std::sqrt(s);
                    for (int i = 0; i < dim; ++i) g[i] /= s;
                    return g;
                }
                int best = 0;
                double bestm = kInf, bestsign = 1.0;
                for (int i = 0; i < dim; ++i) {
                    if (x[i] - lo[i] < bestm) {
                        bestm = x[i] - lo[i];
                        best = i;
                        bestsign = -1.0;
                    }
                    if (hi[i] - x[i] < bestm) {
                        bestm = hi[i] - x[i];
                        best = i;
                        bestsign = 1.0;
                    }
                }
                g[best] = bestsign;
                return g;
            }
        }
        return {};
    }

    /// Nearest boundary point (used to snap interpolated exit points).
    Point project_to_boundary(const Point& x) const {
        switch (kind) {
            case DomainKind::Interval:
                return Point{std::fabs(x[0] - l) <= std::fabs(x[0] - r) ? l : r};
            case DomainKind::Ball: {
                Point d(dim);
                double s = 0.0;
                for (int i = 0; i < dim; ++i) {
                    d[i] = x[i] - center[i];
                    s += d[i] * d[i];
                }
                s = std::sqrt(s);
                if (s == 0.0) {  // center: any direction; pick +x1
                    d.assign(dim, 0.0);
                    d[0] = 1.0;
                    s = 1.0;
                }
                Point p(dim);
                for (int i = 0; i < dim; ++i) p[i] = center[i] + d[i] * radius / s;
                return p;
            }
            case DomainKind::Box: {
                // clamp, then push the closest in-range axis onto its face
                Point p = x;
                for (int i = 0; i < dim; ++i)
                    p[i] = std::clamp(p[i], lo[i], hi[i]);
                if (oriented_distance(x) > 0.0) return p;
                int best = 0;
                double bestd = kInf;
                double bestv = 0.0;
                for (int i = 0; i < dim; ++i) {
                    if (p[i] - lo[i] < bestd) {
                        bestd = p[i] - lo[i];
                        best = i;
                        bestv = lo[i];
                    }
                    if (hi[i] - p[i] < bestd) {
                        bestd = hi[i] - p[i];
                        best = i;
                        bestv = hi[i];
                    }
                }
                p[best] = bestv;
                return p;
            }
        }
        return {};
    }

    /// Largest s >= 0 with x + t*dir interior for all t < s (exact ray cast).
    double ray_exit(const Point& x, const Point& dir) const {
        switch (kind) {
            case DomainKind::Interval:
                return dir[0] > 0 ? (r - x[0]) / dir[0]
                                  : (dir[0] < 0 ? (l - x[0]) / dir[0] : kInf);
            case DomainKind::Ball: {
                // |x - c + s d|^2 = radius^2
                double a = dot(dir, dir), b = 0.0, c2 = -radius * radius;
                for (int i = 0; i < dim; ++i) {
                    const double e = x[i] - center[i];
                    b += 2.0 * e * dir[i];
                    c2 += e * e;
                }
                const double disc = b * b - 4.0 * a * c2;
                if (disc <= 0.0 || a == 0.0) return kInf;
                return (-b + std::sqrt(disc)) / (2.0 * a);
            }
            case DomainKind::Box: {
                double s = kInf;
                for (int i = 0; i < dim; ++i) {
                    if (dir[i] > 0)
                        s = std::min(s, (hi[i] - x[i]) / dir[i]);
                    else if (dir[i] < 0)
                        s = std::min(s, (lo[i] - x[i]) / dir[i]);
                }
                return s;
            }
        }
        return kInf;
    }

    /// Deterministic boundary sample points (box faces inset from edges).
    std::vector<Point> boundary_samples(int n) const {
        std::vector<Point> pts;
        switch (kind) {
            case DomainKind::Interval:
                pts.push_back(Point{l});
                pts.push_back(Point{r});
                break;
            case DomainKind::Ball: {
                if (dim == 1) {
                    pts.push_back(Point{center[0] - radius});
                    pts.push_back(Point{center[0] + radius});
                    break;
                }
                // 2D circle; higher dims use great circles through axes pairs
                for (int i = 0; i < n; ++i) {
                    const double a = 2.0 * kPi * i / n;
                    Point p(dim, 0.0);
                    p[0] = radius * std::cos(a);
                    p[1 % dim] = radius * std::sin(a);
                    for (int j = 0; j < dim; ++j) p[j] += center[j];
                    pts.push_back(p);
                }
                break;
            }
            case DomainKind::Box: {
                const int per_face = std::max(1, n / (2 * dim));
                for (int axis = 0; axis < dim; ++axis) {
                    for (int side = 0; side < 2; ++side) {
                        for (int i = 0; i < per_face; ++i) {
                            Point p(dim);
                            const double u = (i + 0.5) / per_face;
                            for (int j = 0; j < dim; ++j) {
                                // inset 1% from edges to avoid corners
                                const double v = (j == (axis + 1) % dim)
                                                     ? 0.01 + 0.98 * u
                                                     : 0.5;
                                p[j] = lo[j] + v * (hi[j] - lo[j]);
                            }
                            p[axis] = side ? hi[axis] : lo[axis];
                            pts.push_back(p);
                        }
                    }
                }
                break;
            }
        }
        return pts;
    }
};

// ---- assumption (H4) ------------------------------------------------------

struct H4Report {
    bool passed = false;
    double min_inner = kInf;  // min over boundary samples of <b(x), n(x)>
    Point argmin;
    int degenerate_samples = 0;  // box edges/corners skipped
};

/// Samples the boundary and reports the minimum of <b(x), n(x)>; passes iff
/// that minimum is strictly positive (outward-transversal drift).
inline H4Report check_h4(const Domain& domain, const DriftField& field,
                         int n_boundary_samples) {
    if (domain.dim != field.dim)
        throw ValidationError("check_h4: domain and field dimensions differ");
    H4Report rep;
    for (const Point& x : domain.boundary_samples(n_boundary_samples)) {
        Point n;
        try {
            n = domain.outward_normal(x);
        } catch (const DegenerateBoundaryError&) {
            ++rep.degenerate_samples;
            continue;
        }
        const double v = dot(field.eval(x), n);
        if (v < rep.min_inner) {
            rep.min_inner = v;
            rep.argmin = x;
        }
    }
    rep.passed = rep.min_inner > 0.0;
    return rep;
}

/// Records the (H1)-style bound for a concrete experiment: sup of |b| over
/// the domain's bounding region inflated by 1.
inline void set_bound_for_domain(DriftField& field, const Domain& domain) {
    double R = 0.0;
    switch (domain.kind) {
        case DomainKind::Interval:
            R = std::max(std::fabs(domain.l), std::fabs(domain.r));
            break;
        case DomainKind::Ball:
            R = norm(domain.center) + domain.radius;
            break;
        case DomainKind::Box:
            for (int i = 0; i < domain.dim; ++i)
                R = std::max({R, std::fabs(domain.lo[i]), std::fabs(domain.hi[i])});
            break;
    }
    field.bound = field.bound_for_radius ? field.bound_for_radius(R + 1.0) : kInf;
}

}  // namespace znl
