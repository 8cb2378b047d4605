#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "znl/common.hpp"
#include "znl/domain.hpp"
#include "znl/drift.hpp"
#include "znl/ode.hpp"
#include "znl/parallel.hpp"
#include "znl/path.hpp"
#include "znl/rng.hpp"

namespace znl {

enum class NoiseMode {
    Independent,  // d independent Brownian components
    Common        // one scalar Brownian motion drives all coordinates
};

struct SdeConfig {
    double epsilon = 0.05;
    double step = 1e-4;
    double horizon = 5.0;
    NoiseMode noise_mode = NoiseMode::Independent;
    std::uint64_t master_seed = 0;
    long record_stride = 1;  // keep every k-th state in recorded paths

    /// Diffusive-scale resolution guideline; violation is a warning, not an
    /// error (the ensemble report surfaces it).
    bool step_resolves_diffusion() const {
        return epsilon == 0.0 || step <= std::min(epsilon * epsilon, 1e-2);
    }
};

namespace detail {

struct ExitOrCensor {
    std::optional<ExitRecord> exit;
    double last_time = 0.0;
};

/// Euler-Maruyama core. X_{k+1} = X_k + b(X_k) step + eps sqrt(step) Z_k,
/// stopping at the first sample with b_K >= 0; the crossing is refined by
/// linear interpolation of b_K over the offending step. Every normal
/// variate is counter_normal(master_seed, path_index, k, coord).
template <bool Record>
ExitOrCensor em_run(const DriftField& field, const Domain& domain,
                    const SdeConfig& cfg, std::uint64_t path_index,
                    const Point& x0, Path* out_path) {
    const int d = field.dim;
    const double sdt = cfg.epsilon * std::sqrt(cfg.step);
    const long n = std::lround(cfg.horizon / cfg.step);
    double x[kMaxDim], xn[kMaxDim], bx[kMaxDim];
    for (int i = 0; i < d; ++i) x[i] = x0[i];
    double g = domain.oriented_distance(x);

    if constexpr (Record) {
        out_path->times.push_back(0.0);
        out_path->states.emplace_back(x0);
    }

    ExitOrCensor res;
    for (long k = 0; k < n; ++k) {
        field.eval(x, bx);
        if (cfg.noise_mode == NoiseMode::Common) {
            const double z = counter_normal(cfg.master_seed, path_index,
                                            static_cast<std::uint64_t>(k), 0);
            for (int i = 0; i < d; ++i) xn[i] = x[i] + bx[i] * cfg.step + sdt * z;
        } else {
            for (int i = 0; i < d; ++i) {
                const double z = counter_normal(cfg.master_seed, path_index,
                                                static_cast<std::uint64_t>(k),
                                                static_cast<std::uint64_t>(i));
                xn[i] = x[i] + bx[i] * cfg.step + sdt * z;
            }
        }
        for (int i = 0; i < d; ++i) {
            if (!std::isfinite(xn[i]))
                throw NumericOverflowError("simulate_path: non-finite state at path " +
                                           std::to_string(path_index));
        }
        const double gn = domain.oriented_distance(xn);
        const double t_next = (k + 1) * cfg.step;
        if constexpr (Record) {
            if ((k + 1) % cfg.record_stride == 0 || gn >= 0.0 || k + 1 == n) {
                out_path->times.push_back(t_next);
                out_path->states.emplace_back(xn, xn + d);
            }
        }
        if (gn >= 0.0) {
            const double frac = (0.0 - g) / (gn - g);
            ExitRecord rec;
            rec.time = k * cfg.step + frac * cfg.step;
            rec.point.resize(d);
            for (int i = 0; i < d; ++i) rec.point[i] = x[i] + frac * (xn[i] - x[i]);
            rec.point = domain.project_to_boundary(rec.point);
            res.exit = std::move(rec);
            res.last_time = t_next;
            return res;
        }
        for (int i = 0; i < d; ++i) x[i] = xn[i];
        g = gn;
    }
    res.last_time = n * cfg.step;
    return res;
}

}  // namespace detail

/// One Euler-Maruyama realization with exit detection. Deterministic: the
/// result is a pure function of (field, domain, cfg, path_index, x0).
/// Reaching the horizon without exit is a valid outcome (absent exit).
inline Path simulate_path(const DriftField& field, const Domain& domain,
                          const SdeConfig& cfg, std::uint64_t path_index,
                          const Point& x0) {
    if (!domain.contains(x0))
        throw PreconditionError("simulate_path: x0 must lie in K");
    if (static_cast<int>(x0.size()) != field.dim)
        throw ValidationError("simulate_path: x0 dimension mismatch");
    Path path;
    auto res = detail::em_run<true>(field, domain, cfg, path_index, x0, &path);
    path.exit = std::move(res.exit);
    return path;
}

// ---- ensembles -------------------------------------------------------------

struct EnsembleRow {
    std::uint64_t path_index = 0;
    std::optional<ExitRecord> exit;  // absent => censored at the horizon
};

struct EnsembleSummary {
    long n = 0;
    double mean_exit = kNaN;  // over exited paths
    double sd = kNaN;
    double ci95 = kNaN;  // normal-approximation 95% half-width; NaN if n < 2
    long censored_count = 0;
    double epsilon = 0.0;
    double step = 0.0;
    std::uint64_t seed = 0;
    bool step_warning = false;  // step > min(eps^2, 1e-2)
};

struct EnsembleResult {
    std::vector<EnsembleRow> rows;  // ordered by path_index
    EnsembleSummary summary;
};

inline EnsembleResult simulate_ensemble(const DriftField& field, const Domain& domain,
                                        const SdeConfig& cfg, long n_paths,
                                        const Point& x0, int jobs = 1) {
    if (n_paths < 1) throw ValidationError("simulate_ensemble: n_paths >= 1");
    if (!domain.contains(x0))
        throw PreconditionError("simulate_ensemble: x0 must lie in K");
    EnsembleResult res;
    res.rows.resize(n_paths);
    parallel_for(n_paths, jobs, [&](long i) {
        auto r = detail::em_run<false>(field, domain, cfg,
                                       static_cast<std::uint64_t>(i), x0, nullptr);
        res.rows[i].path_index = static_cast<std::uint64_t>(i);
        res.rows[i].exit = std::move(r.exit);
    });

    EnsembleSummary& s = res.summary;
    s.n = n_paths;
    s.epsilon = cfg.epsilon;
    s.step = cfg.step;
    s.seed = cfg.master_seed;
    s.step_warning = !cfg.step_resolves_diffusion();
    double sum = 0.0, sum2 = 0.0;
    long m = 0;
    for (const auto& row : res.rows) {
        if (!row.exit) {
            ++s.censored_count;
            continue;
        }
        sum += row.exit->time;
        sum2 += row.exit->time * row.exit->time;
        ++m;
    }
    if (m > 0) {
        s.mean_exit = sum / m;
        if (m > 1) {
            const double var = std::max(0.0, (sum2 - sum * sum / m) / (m - 1));
            s.sd = std::sqrt(var);
            s.ci95 = 1.959963984540054 * s.sd / std::sqrt(static_cast<double>(m));
        }
    }
    return res;
}

/// CSV layout: path_index, exit_time, exit_coord_1..d, censored(0/1).
/// Censored rows print "inf" for the exit time and blanks for coordinates.
inline void write_csv(const EnsembleResult& res, int dim, std::ostream& os) {
    os << "path_index,exit_time";
    for (int c = 0; c < dim; ++c) os << ",exit_coord_" << (c + 1);
    os << ",censored\n";
    for (const auto& row : res.rows) {
        os << row.path_index << ",";
        if (row.exit) {
            os << fmt17(row.exit->time);
            for (double v : row.exit->point) os << "," << fmt17(v);
            os << ",0\n";
        } else {
            os << "inf";
            for (int c = 0; c < dim; ++c) os << ",";
            os << ",1\n";
        }
    }
}

inline void write_summary_json(const EnsembleSummary& s, std::ostream& os) {
    os << "{\"n\":" << s.n << ",\"mean_exit\":" << fmt17(s.mean_exit)
       << ",\"sd\":" << fmt17(s.sd) << ",\"ci95\":" << fmt17(s.ci95)
       << ",\"censored_count\":" << s.censored_count
       << ",\"epsilon\":" << fmt17(s.epsilon) << ",\"step\":" << fmt17(s.step)
       << ",\"seed\":" << s.seed << "}\n";
}

}  // namespace znl
