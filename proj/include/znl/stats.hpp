#pragma once

#include <cmath>
#include <vector>

#include "znl/common.hpp"

namespace znl {

inline constexpr double kZ95 = 1.959963984540054;   // two-sided 95% normal quantile
inline constexpr double kZ99 = 2.3263478740408408;  // one-sided 99% normal quantile

struct Moments {
    long n = 0;
    double mean = kNaN;
    double sd = kNaN;
    double ci95 = kNaN;
};

inline Moments moments(const std::vector<double>& xs) {
    Moments m;
    m.n = static_cast<long>(xs.size());
    if (m.n == 0) return m;
    double sum = 0.0;
    for (double v : xs) sum += v;
    m.mean = sum / m.n;
    if (m.n < 2) return m;
    double ss = 0.0;
    for (double v : xs) ss += (v - m.mean) * (v - m.mean);
    m.sd = std::sqrt(ss / (m.n - 1));
    m.ci95 = kZ95 * m.sd / std::sqrt(static_cast<double>(m.n));
    return m;
}

/// 95% normal-approximation half-width for a binomial proportion.
inline double binomial_halfwidth(double p, long n) {
    if (n <= 0) return kNaN;
    return kZ95 * std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
}

/// Chi-square critical value by the Wilson-Hilferty cube approximation:
/// chi2_q(df) ~ df (1 - 2/(9 df) + z_q sqrt(2/(9 df)))^3. Accurate to a few
/// parts in 1e3 for df >= 3, plenty for a 1% goodness-of-fit gate.
inline double chi_square_critical(long df, double z = kZ99) {
    const double a = 2.0 / (9.0 * df);
    const double c = 1.0 - a + z * std::sqrt(a);
    return df * c * c * c;
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) return kNaN;
    const long n = static_cast<long>(a.size());
    double ma = 0.0, mb = 0.0;
    for (long i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (long i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return kNaN;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace znl
