#pragma once

#include <cmath>
#include <ostream>
#include <vector>

#include "znl/common.hpp"
#include "znl/domain.hpp"

namespace znl {

/// Scalar function on a regular grid over K. Nodes sit at integer multiples
/// of the spacing h (so the origin is always a node), covering the bounding
/// box of K plus one layer of exterior cells. Exterior and boundary nodes
/// hold the Dirichlet datum 0; strictly interior nodes hold field values.
struct GridField {
    Domain domain;
    double h = 0.0;
    int dim = 1;
    long kmin[2] = {0, 0};
    long kmax[2] = {0, 0};
    std::vector<double> values;
    std::vector<unsigned char> interior;  // oriented_distance < 0

    long nodes_per_axis(int axis) const { return kmax[axis] - kmin[axis] + 1; }

    std::size_t index(long i0, long i1 = 0) const {
        if (dim == 1) return static_cast<std::size_t>(i0 - kmin[0]);
        return static_cast<std::size_t>(i0 - kmin[0]) *
                   static_cast<std::size_t>(nodes_per_axis(1)) +
               static_cast<std::size_t>(i1 - kmin[1]);
    }

    bool in_range(long i0, long i1 = 0) const {
        if (i0 < kmin[0] || i0 > kmax[0]) return false;
        if (dim == 2 && (i1 < kmin[1] || i1 > kmax[1])) return false;
        return true;
    }

    Point node_point(long i0, long i1 = 0) const {
        Point p(dim);
        p[0] = i0 * h;
        if (dim == 2) p[1] = i1 * h;
        return p;
    }

    double value_at_origin() const { return values[index(0, 0)]; }

    /// Multilinear interpolation of stored values (exterior nodes read 0).
    double interpolate(const Point& x) const {
        long base[2] = {0, 0};
        double frac[2] = {0.0, 0.0};
        for (int c = 0; c < dim; ++c) {
            const double f = x[c] / h;
            base[c] = static_cast<long>(std::floor(f));
            frac[c] = f - base[c];
        }
        double acc = 0.0;
        const int corners = 1 << dim;
        for (int m = 0; m < corners; ++m) {
            long iv[2] = {base[0] + (m & 1), dim == 2 ? base[1] + ((m >> 1) & 1) : 0};
            double w = (m & 1) ? frac[0] : 1.0 - frac[0];
            if (dim == 2) w *= ((m >> 1) & 1) ? frac[1] : 1.0 - frac[1];
            if (w == 0.0) continue;
            const double v = in_range(iv[0], iv[1]) ? values[index(iv[0], iv[1])] : 0.0;
            acc += w * v;
        }
        return acc;
    }

    static GridField make(const Domain& domain, double h, double init_interior) {
        if (!(h > 0)) throw ValidationError("grid: spacing h must be > 0");
        if (domain.dim > 2) throw ValidationError("grid: only dim 1 and 2 supported");
        GridField g;
        g.domain = domain;
        g.h = h;
        g.dim = domain.dim;
        double lo[2] = {0, 0}, hi[2] = {0, 0};
        switch (domain.kind) {
            case DomainKind::Interval:
                lo[0] = domain.l;
                hi[0] = domain.r;
                break;
            case DomainKind::Box:
                for (int c = 0; c < g.dim; ++c) {
                    lo[c] = domain.lo[c];
                    hi[c] = domain.hi[c];
                }
                break;
            case DomainKind::Ball:
                for (int c = 0; c < g.dim; ++c) {
                    lo[c] = domain.center[c] - domain.radius;
                    hi[c] = domain.center[c] + domain.radius;
                }
                break;
        }
        std::size_t total = 1;
        for (int c = 0; c < g.dim; ++c) {
            g.kmin[c] = static_cast<long>(std::floor(lo[c] / h)) - 1;
            g.kmax[c] = static_cast<long>(std::ceil(hi[c] / h)) + 1;
            total *= static_cast<std::size_t>(g.nodes_per_axis(c));
        }
        g.values.assign(total, 0.0);
        g.interior.assign(total, 0);
        for (long i0 = g.kmin[0]; i0 <= g.kmax[0]; ++i0) {
            for (long i1 = g.kmin[1]; i1 <= (g.dim == 2 ? g.kmax[1] : g.kmin[1]); ++i1) {
                const std::size_t idx = g.index(i0, i1);
                if (domain.oriented_distance(g.node_point(i0, i1)) < 0.0) {
                    g.interior[idx] = 1;
                    g.values[idx] = init_interior;
                }
            }
        }
        return g;
    }
};

/// CSV layout: per-axis node coordinates then value, interior nodes only.
inline void write_csv(const GridField& g, std::ostream& os) {
    if (g.dim == 1)
        os << "x_1,value\n";
    else
        os << "x_1,x_2,value\n";
    for (long i0 = g.kmin[0]; i0 <= g.kmax[0]; ++i0) {
        for (long i1 = g.kmin[1]; i1 <= (g.dim == 2 ? g.kmax[1] : g.kmin[1]); ++i1) {
            const std::size_t idx = g.index(i0, i1);
            if (!g.interior[idx]) continue;
            const Point p = g.node_point(i0, i1);
            os << fmt17(p[0]);
            if (g.dim == 2) os << "," << fmt17(p[1]);
            os << "," << fmt17(g.values[idx]) << "\n";
        }
    }
}

}  // namespace znl
