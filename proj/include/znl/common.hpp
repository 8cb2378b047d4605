#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace znl {

/// A point in R^d. Dimensions in this project are small (d <= 3).
using Point = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kPi = 3.14159265358979323846;

inline double dot(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Point& a) { return std::sqrt(dot(a, a)); }

inline double dist(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline bool is_origin(const Point& x) {
    for (double v : x)
        if (v != 0.0) return false;
    return true;
}

/// Reproducibility-critical float formatting: 17 significant digits,
/// "." decimal, infinities spelled "inf".
inline std::string fmt17(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---- error types ----------------------------------------------------------

struct RegistryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Integrating an ODE from the equilibrium at 0 masks non-uniqueness;
/// callers are directed to enumerate_leaving instead.
struct AmbiguousOriginError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoExitError : std::runtime_error {
    NoExitError(const std::string& msg, double deepest)
        : std::runtime_error(msg), deepest_oriented_distance(deepest) {}
    double deepest_oriented_distance;
};

struct DegenerateBoundaryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvergenceError : std::runtime_error {
    NonConvergenceError(const std::string& msg, double res)
        : std::runtime_error(msg), residual(res) {}
    double residual;
};

struct NumericOverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace znl
