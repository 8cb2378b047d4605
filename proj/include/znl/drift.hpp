#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "znl/common.hpp"

namespace znl {

/// A closed-form leaving solution attached to a registered field, with the
/// selection probability when the literature states one (NaN otherwise).
struct AnalyticSolution {
    std::string label;
    std::function<Point(double)> state;  // t >= 0 -> point
    double probability = kNaN;
    std::string description;
};

/// Evaluable vector field b : R^d -> R^d. Immutable after construction;
/// safe for concurrent reads.
struct DriftField {
    int dim = 1;
    std::string label;
    std::map<std::string, double> params;
    /// sup-norm bound M_b over the reference region (+inf if unknown).
    double bound = kInf;
    std::function<void(const double*, double*)> eval_fn;
    /// Exact sup of |b| over a centered box of half-width R, when known.
    std::function<double(double)> bound_for_radius;

    std::vector<AnalyticSolution> leaving;  // finite analytic leaving set
    bool leaving_is_continuum = false;      // e.g. every ray is a solution

    void eval(const double* x, double* out) const { eval_fn(x, out); }

    Point eval(const Point& x) const {
        Point out(dim);
        eval_fn(x.data(), out.data());
        return out;
    }
};

inline double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

/// b == 0 everywhere; used as a control field (violates (H2)).
inline DriftField make_zero_field(int dim) {
    DriftField f;
    f.dim = dim;
    f.label = "zero";
    f.bound = 0.0;
    f.eval_fn = [dim](const double*, double* out) {
        for (int i = 0; i < dim; ++i) out[i] = 0.0;
    };
    f.bound_for_radius = [](double) { return 0.0; };
    return f;
}

namespace detail {

inline DriftField make_ex1_sqrt() {
    DriftField f;
    f.dim = 1;
    f.label = "ex1-sqrt";
    f.eval_fn = [](const double* x, double* out) {
        out[0] = 2.0 * sign(x[0]) * std::sqrt(std::fabs(x[0]));
    };
    f.bound_for_radius = [](double R) { return 2.0 * std::sqrt(R); };
    f.leaving = {
        {"+branch", [](double t) { return Point{t * t}; }, 0.5, "x(t) = t^2"},
        {"-branch", [](double t) { return Point{-t * t}; }, 0.5, "x(t) = -t^2"},
    };
    return f;
}

inline DriftField make_ex2_asym() {
    DriftField f;
    f.dim = 1;
    f.label = "ex2-asym";
    f.eval_fn = [](const double* x, double* out) {
        out[0] = x[0] >= 0 ? std::sqrt(x[0]) : -3.0 * std::sqrt(-x[0]);
    };
    f.bound_for_radius = [](double R) { return 3.0 * std::sqrt(R); };
    const double w = std::cbrt(9.0);  // 3^(2/3)
    f.leaving = {
        {"+branch", [](double t) { return Point{t * t / 4.0}; },
         1.0 / (1.0 + w), "x(t) = t^2/4"},
        {"-branch", [](double t) { return Point{-9.0 * t * t / 4.0}; },
         w / (1.0 + w), "x(t) = -9t^2/4"},
    };
    return f;
}

inline DriftField make_powerlaw(double gamma, double c_plus, double c_minus) {
    DriftField f;
    f.dim = 1;
    f.label = "powerlaw";
    f.params = {{"gamma", gamma}, {"c_plus", c_plus}, {"c_minus", c_minus}};
    f.eval_fn = [gamma, c_plus, c_minus](const double* x, double* out) {
        if (x[0] > 0)
            out[0] = c_plus * std::pow(x[0], gamma);
        else if (x[0] < 0)
            out[0] = -c_minus * std::pow(-x[0], gamma);
        else
            out[0] = 0.0;
    };
    f.bound_for_radius = [gamma, c_plus, c_minus](double R) {
        return std::max(c_plus, c_minus) * std::pow(R, gamma);
    };
    // x' = c x^gamma from 0+ integrates to ((1-gamma) c t)^(1/(1-gamma)).
    const double e = 1.0 / (1.0 - gamma);
    f.leaving = {
        {"+branch",
         [gamma, c_plus, e](double t) {
             return Point{std::pow((1.0 - gamma) * c_plus * t, e)};
         },
         kNaN, "x(t) = ((1-g) c+ t)^(1/(1-g))"},
        {"-branch",
         [gamma, c_minus, e](double t) {
             return Point{-std::pow((1.0 - gamma) * c_minus * t, e)};
         },
         kNaN, "x(t) = -((1-g) c- t)^(1/(1-g))"},
    };
    return f;
}

inline DriftField make_prod2d() {
    DriftField f;
    f.dim = 2;
    f.label = "prod2d";
    f.eval_fn = [](const double* x, double* out) {
        out[0] = 2.0 * sign(x[0]) * std::sqrt(std::fabs(x[0]));
        out[1] = 2.0 * sign(x[1]) * std::sqrt(std::fabs(x[1]));
    };
    f.bound_for_radius = [](double R) { return std::sqrt(8.0 * R); };
    f.leaving = {
        {"X1", [](double t) { return Point{t * t, t * t}; }, 0.25, "(t^2, t^2)"},
        {"X2", [](double t) { return Point{t * t, -t * t}; }, 0.25, "(t^2, -t^2)"},
        {"X3", [](double t) { return Point{-t * t, t * t}; }, 0.25, "(-t^2, t^2)"},
        {"X4", [](double t) { return Point{-t * t, -t * t}; }, 0.25, "(-t^2, -t^2)"},
    };
    return f;
}

inline DriftField make_radial2d() {
    DriftField f;
    f.dim = 2;
    f.label = "radial2d";
    f.eval_fn = [](const double* x, double* out) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        if (r2 == 0.0) {
            out[0] = out[1] = 0.0;
            return;
        }
        const double s = 2.0 / std::pow(r2, 0.25);
        out[0] = s * x[0];
        out[1] = s * x[1];
    };
    f.bound_for_radius = [](double R) {
        return 2.0 * std::sqrt(R * std::sqrt(2.0));
    };
    f.leaving_is_continuum = true;  // every ray t^2 (sin a, cos a)
    return f;
}

}  // namespace detail

inline const std::vector<std::string>& registry_labels() {
    static const std::vector<std::string> labels = {
        "ex1-sqrt", "ex2-asym", "powerlaw", "prod2d", "radial2d"};
    return labels;
}

/// Look up one of the named drift fields. "powerlaw" takes params
/// gamma (required, in (0,1)), c_plus and c_minus (default 2).
/// The recorded bound covers a centered box of half-width reference_radius
/// (the experiment domain inflated by 1; default covers K within radius 2).
inline DriftField registry_get(const std::string& label,
                               const std::map<std::string, double>& params = {},
                               double reference_radius = 3.0) {
    DriftField f;
    if (label == "ex1-sqrt") {
        f = detail::make_ex1_sqrt();
    } else if (label == "ex2-asym") {
        f = detail::make_ex2_asym();
    } else if (label == "powerlaw") {
        double gamma = 0.5, cp = 2.0, cm = 2.0;
        if (auto it = params.find("gamma"); it != params.end()) gamma = it->second;
        if (auto it = params.find("c_plus"); it != params.end()) cp = it->second;
        if (auto it = params.find("c_minus"); it != params.end()) cm = it->second;
        if (!(gamma > 0.0 && gamma < 1.0))
            throw ValidationError("powerlaw: gamma must lie in (0,1)");
        f = detail::make_powerlaw(gamma, cp, cm);
    } else if (label == "prod2d") {
        f = detail::make_prod2d();
    } else if (label == "radial2d") {
        f = detail::make_radial2d();
    } else {
        std::string msg = "unknown drift label '" + label + "'; valid labels:";
        for (const auto& l : registry_labels()) msg += " " + l;
        throw RegistryError(msg);
    }
    f.bound = f.bound_for_radius(reference_radius);
    return f;
}

// ---- assumption (H2) ------------------------------------------------------

struct H2Report {
    bool passed = false;
    double norm_at_zero = kNaN;
    double min_norm = kNaN;  // over sampled x with radius/100 <= |x| <= radius
    Point argmin;
};

/// Checks b(0) = 0 and b(x) != 0 near 0 by quasi-random sampling.
inline H2Report check_h2(const DriftField& field, double sample_radius,
                         int n_samples) {
    if (!(sample_radius > 0)) throw ValidationError("check_h2: radius must be > 0");
    H2Report rep;
    Point zero(field.dim, 0.0);
    rep.norm_at_zero = norm(field.eval(zero));

    // Golden-ratio sequences: low-discrepancy radii and (in 2D) angles.
    const double phi = 0.6180339887498949;
    const double phi2 = 0.7548776662466927;  // plastic-number fractions for 2D
    rep.min_norm = kInf;
    for (int i = 0; i < n_samples; ++i) {
        double u = std::fmod(0.5 + phi * (i + 1), 1.0);
        double r = sample_radius / 100.0 + u * (sample_radius - sample_radius / 100.0);
        Point x(field.dim, 0.0);
        if (field.dim == 1) {
            x[0] = (i % 2 == 0 ? r : -r);
        } else if (field.dim == 2) {
            double a = 2.0 * kPi * std::fmod(phi2 * (i + 1), 1.0);
            x[0] = r * std::cos(a);
            x[1] = r * std::sin(a);
        } else {
            // crude but adequate: cycle axes
            x[i % field.dim] = (i % 2 == 0 ? r : -r);
        }
        double n = norm(field.eval(x));
        if (n < rep.min_norm) {
            rep.min_norm = n;
            rep.argmin = x;
        }
    }
    rep.passed = (rep.norm_at_zero == 0.0) && (rep.min_norm > 0.0);
    return rep;
}

}  // namespace znl
