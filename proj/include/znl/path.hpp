#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "znl/common.hpp"
#include "znl/domain.hpp"

namespace znl {

struct ExitRecord {
    double time = 0.0;
    Point point;
    std::string label;  // leaving-solution identifier, "" if unassigned
};

/// One sampled ODE/SDE realization.
struct Path {
    std::vector<double> times;  // strictly increasing, times[0] == 0
    std::vector<Point> states;  // same length as times
    std::optional<ExitRecord> exit;

    int dim() const { return states.empty() ? 0 : static_cast<int>(states[0].size()); }
    std::size_t size() const { return times.size(); }

    const Point& state_at_or_after(double t) const {
        std::size_t lo = 0, hi = times.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (times[mid] < t)
                lo = mid + 1;
            else
                hi = mid;
        }
        return states[lo];
    }
};

/// First exit of a sampled path from K. The crossing time is found by
/// linear interpolation of b_K between the straddling samples (b_K is the
/// exact crossing indicator and is 1-Lipschitz); the exit point is snapped
/// onto the boundary. Absent if the path never leaves (tau = +inf).
inline std::optional<ExitRecord> exit_functional(const Path& path,
                                                 const Domain& domain) {
    if (path.size() < 2)
        throw PreconditionError("exit_functional: path needs >= 2 samples");
    double g_prev = domain.oriented_distance(path.states[0]);
    if (g_prev >= 0.0) {
        ExitRecord rec;
        rec.time = path.times[0];
        rec.point = domain.project_to_boundary(path.states[0]);
        return rec;
    }
    for (std::size_t i = 1; i < path.size(); ++i) {
        const double g = domain.oriented_distance(path.states[i]);
        if (g >= 0.0) {
            const double frac = (0.0 - g_prev) / (g - g_prev);
            ExitRecord rec;
            rec.time = path.times[i - 1] + frac * (path.times[i] - path.times[i - 1]);
            rec.point.resize(path.states[i].size());
            for (std::size_t c = 0; c < rec.point.size(); ++c)
                rec.point[c] = path.states[i - 1][c] +
                               frac * (path.states[i][c] - path.states[i - 1][c]);
            rec.point = domain.project_to_boundary(rec.point);
            return rec;
        }
        g_prev = g;
    }
    return std::nullopt;
}

/// Deepest (most negative) oriented distance reached; no-exit diagnostics.
inline double deepest_oriented_distance(const Path& path, const Domain& domain) {
    double d = kInf;
    for (const Point& x : path.states)
        d = std::min(d, domain.oriented_distance(x));
    return d;
}

/// CSV layout: header t,x_1..x_d; one row per sample; exit record appended
/// as a comment line "# exit,<time>,<point coords>".
inline void write_csv(const Path& path, std::ostream& os) {
    os << "t";
    for (int c = 0; c < path.dim(); ++c) os << ",x_" << (c + 1);
    os << "\n";
    for (std::size_t i = 0; i < path.size(); ++i) {
        os << fmt17(path.times[i]);
        for (double v : path.states[i]) os << "," << fmt17(v);
        os << "\n";
    }
    if (path.exit) {
        os << "# exit," << fmt17(path.exit->time);
        for (double v : path.exit->point) os << "," << fmt17(v);
        os << "\n";
    }
}

}  // namespace znl
