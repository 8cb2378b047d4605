#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "znl/common.hpp"
#include "znl/domain.hpp"
#include "znl/drift.hpp"
#include "znl/hjb.hpp"
#include "znl/ode.hpp"
#include "znl/sde.hpp"
#include "znl/stats.hpp"

namespace znl {

// ---- selection law ----------------------------------------------------------

struct SelectionLaw {
    std::vector<std::string> labels;
    std::vector<long> counts;
    long unclassified = 0;
    long n_total = 0;
    double epsilon = 0.0;
    std::vector<std::string> warnings;

    double frequency(std::size_t i) const {
        return static_cast<double>(counts[i]) / n_total;
    }
    double ci95(std::size_t i) const {
        return binomial_halfwidth(frequency(i), n_total);
    }
    double frequency_of(const std::string& label) const {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label) return frequency(i);
        return 0.0;
    }
};

inline double default_match_tol(const Domain& domain) {
    return 0.05 * domain.diameter();
}

/// Label of the leaving solution whose own boundary exit point is nearest to
/// the record's exit point; "" (unclassified) when nothing is within
/// match_tol. Censored records are always unclassified.
inline std::string classify_exit(const ExitRecord& record,
                                 const LeavingSolutionSet& leaving,
                                 const Domain& domain, double match_tol) {
    (void)domain;
    if (!(match_tol > 0)) throw ValidationError("classify_exit: match_tol > 0");
    double best = kInf;
    const std::string* best_label = nullptr;
    for (const LeavingMember& m : leaving.members) {
        if (!m.path.exit)
            throw PreconditionError(
                "classify_exit: leaving member '" + m.label +
                "' has no exit record (run compute_leaving_exits first)");
        const double d = dist(record.point, m.path.exit->point);
        if (d < best) {
            best = d;
            best_label = &m.label;
        }
    }
    if (best_label && best <= match_tol) return *best_label;
    return "";
}

inline SelectionLaw estimate_selection_law(const DriftField& field,
                                           const Domain& domain,
                                           const SdeConfig& cfg, long n_paths,
                                           LeavingSolutionSet& leaving,
                                           double match_tol = 0.0, int jobs = 1,
                                           EnsembleResult* out_ensemble = nullptr) {
    if (leaving.empty())
        throw PreconditionError("estimate_selection_law: empty leaving set");
    compute_leaving_exits(leaving, domain);
    if (match_tol <= 0.0) match_tol = default_match_tol(domain);

    SelectionLaw law;
    law.epsilon = cfg.epsilon;
    law.n_total = n_paths;
    for (const LeavingMember& m : leaving.members) {
        law.labels.push_back(m.label);
        law.counts.push_back(0);
    }

    EnsembleResult ens = simulate_ensemble(field, domain, cfg, n_paths,
                                           Point(field.dim, 0.0), jobs);
    for (const EnsembleRow& row : ens.rows) {
        if (!row.exit) {
            ++law.unclassified;
            continue;
        }
        const std::string lbl = classify_exit(*row.exit, leaving, domain, match_tol);
        if (lbl.empty()) {
            ++law.unclassified;
            continue;
        }
        for (std::size_t i = 0; i < law.labels.size(); ++i)
            if (law.labels[i] == lbl) {
                ++law.counts[i];
                break;
            }
    }
    if (law.unclassified > n_paths / 20)
        law.warnings.push_back(
            "more than 5% of exits unclassified (match_tol or epsilon too large?)");
    if (ens.summary.step_warning)
        law.warnings.push_back("step does not resolve the diffusive scale eps^2");
    if (out_ensemble) *out_ensemble = std::move(ens);
    return law;
}

// ---- mean-exit identity check -----------------------------------------------

struct IdentityReport {
    double mc_mean = kNaN;
    double mc_ci95 = kNaN;
    double v_ode = kNaN;   // exit_time_function at 0
    double v_grid = kNaN;  // solve_hjb1 at 0
    double gap_mc_ode = kNaN;
    double gap_mc_grid = kNaN;
    double gap_ode_grid = kNaN;
};

/// Three routes to the same number: Monte Carlo mean exit time at small eps,
/// the exit-time function evaluated at the origin, and the first-order grid
/// solver at the origin.
inline IdentityReport check_identity(const DriftField& field, const Domain& domain,
                                     const SdeConfig& cfg, long n_paths,
                                     LeavingSolutionSet& leaving, double h,
                                     int jobs = 1) {
    compute_leaving_exits(leaving, domain);
    IdentityReport rep;
    auto ens = simulate_ensemble(field, domain, cfg, n_paths, Point(field.dim, 0.0), jobs);
    rep.mc_mean = ens.summary.mean_exit;
    rep.mc_ci95 = ens.summary.ci95;
    rep.v_ode = exit_time_function(field, domain, leaving, Point(field.dim, 0.0),
                                   cfg.horizon, 1e-4);
    rep.v_grid = solve_hjb1(field, domain, h).value_at_origin();
    rep.gap_mc_ode = std::fabs(rep.mc_mean - rep.v_ode);
    rep.gap_mc_grid = std::fabs(rep.mc_mean - rep.v_grid);
    rep.gap_ode_grid = std::fabs(rep.v_ode - rep.v_grid);
    return rep;
}

// ---- angle uniformity -------------------------------------------------------

struct UniformityReport {
    double statistic = kNaN;
    double critical = kNaN;  // 1% level, n_bins - 1 degrees of freedom
    bool passed = false;
    std::vector<long> observed;
    double expected_per_bin = 0.0;
};

/// Chi-square goodness of fit of exit angles against the uniform law on
/// [0, 2pi), for records on a 2D ball boundary. Angles are measured from the
/// +x2 axis, matching the (sin a, cos a) ray parameterization.
inline UniformityReport angle_uniformity_test(const std::vector<ExitRecord>& records,
                                              int n_bins, const Domain& domain) {
    if (domain.kind != DomainKind::Ball || domain.dim != 2)
        throw PreconditionError("angle_uniformity_test: domain must be a 2D ball");
    if (n_bins < 2) throw ValidationError("angle_uniformity_test: n_bins >= 2");
    const double expected = static_cast<double>(records.size()) / n_bins;
    if (expected < 5.0)
        throw ValidationError(
            "angle_uniformity_test: expected count per bin < 5; increase the "
            "sample or reduce n_bins");
    UniformityReport rep;
    rep.observed.assign(n_bins, 0);
    rep.expected_per_bin = expected;
    for (const ExitRecord& r : records) {
        const double dx = r.point[0] - domain.center[0];
        const double dy = r.point[1] - domain.center[1];
        double a = std::atan2(dx, dy);  // angle from +x2 axis
        if (a < 0) a += 2.0 * kPi;
        int bin = static_cast<int>(a / (2.0 * kPi) * n_bins);
        if (bin >= n_bins) bin = n_bins - 1;
        ++rep.observed[bin];
    }
    rep.statistic = 0.0;
    for (long o : rep.observed)
        rep.statistic += (o - expected) * (o - expected) / expected;
    rep.critical = chi_square_critical(n_bins - 1);
    rep.passed = rep.statistic < rep.critical;
    return rep;
}

// ---- epsilon sweep ----------------------------------------------------------

struct SweepResult {
    std::string field_label;
    std::vector<double> epsilons;
    std::vector<SelectionLaw> laws;
    std::vector<double> mean_exit;
    std::vector<double> mean_ci95;
    double v_k_reference = kNaN;  // exit_time_function at 0
    bool frequencies_stabilized = false;
    bool gap_monotone = false;
    std::vector<std::string> warnings;
};

inline SweepResult epsilon_sweep(const DriftField& field, const Domain& domain,
                                 const SdeConfig& base_cfg,
                                 const std::vector<double>& epsilons, long n_paths,
                                 LeavingSolutionSet& leaving, double h, int jobs = 1,
                                 double match_tol = 0.0) {
    if (epsilons.empty()) throw ValidationError("epsilon_sweep: epsilons nonempty");
    for (std::size_t i = 1; i < epsilons.size(); ++i)
        if (!(epsilons[i] < epsilons[i - 1]))
            throw ValidationError("epsilon_sweep: epsilons must be strictly decreasing");
    compute_leaving_exits(leaving, domain);

    SweepResult res;
    res.field_label = field.label;
    res.epsilons = epsilons;
    res.v_k_reference = exit_time_function(field, domain, leaving,
                                           Point(field.dim, 0.0), base_cfg.horizon, 1e-4);
    for (double eps : epsilons) {
        SdeConfig cfg = base_cfg;
        cfg.epsilon = eps;
        EnsembleResult ens;
        SelectionLaw law = estimate_selection_law(field, domain, cfg, n_paths,
                                                  leaving, match_tol, jobs, &ens);
        res.laws.push_back(std::move(law));
        res.mean_exit.push_back(ens.summary.mean_exit);
        res.mean_ci95.push_back(ens.summary.ci95);
    }
    (void)h;

    const std::size_t m = res.laws.size();
    if (m >= 2) {
        double max_change = 0.0, two_ci = 0.0;
        for (std::size_t i = 0; i < res.laws[m - 1].labels.size(); ++i) {
            max_change = std::max(
                max_change,
                std::fabs(res.laws[m - 1].frequency(i) - res.laws[m - 2].frequency(i)));
            two_ci = std::max(two_ci, 2.0 * res.laws[m - 1].ci95(i));
        }
        res.frequencies_stabilized = max_change <= two_ci;
    }
    if (std::isfinite(res.v_k_reference)) {
        res.gap_monotone = true;
        for (std::size_t i = 1; i < m; ++i) {
            const double g0 = std::fabs(res.mean_exit[i - 1] - res.v_k_reference);
            const double g1 = std::fabs(res.mean_exit[i] - res.v_k_reference);
            if (g1 > g0) res.gap_monotone = false;
        }
    }
    for (const auto& law : res.laws)
        for (const auto& w : law.warnings) res.warnings.push_back(w);
    return res;
}

// ---- JSON emission ----------------------------------------------------------

inline void write_json(const SelectionLaw& law, std::ostream& os) {
    os << "{\"eps\":" << fmt17(law.epsilon) << ",\"n_total\":" << law.n_total
       << ",\"labels\":[";
    for (std::size_t i = 0; i < law.labels.size(); ++i)
        os << (i ? "," : "") << "\"" << law.labels[i] << "\"";
    os << "],\"counts\":[";
    for (std::size_t i = 0; i < law.counts.size(); ++i)
        os << (i ? "," : "") << law.counts[i];
    os << "],\"freqs\":[";
    for (std::size_t i = 0; i < law.counts.size(); ++i)
        os << (i ? "," : "") << fmt17(law.frequency(i));
    os << "],\"ci\":[";
    for (std::size_t i = 0; i < law.counts.size(); ++i)
        os << (i ? "," : "") << fmt17(law.ci95(i));
    os << "],\"unclassified\":" << law.unclassified << "}";
}

inline void write_json(const SweepResult& res, const Domain& domain, std::ostream& os) {
    os << "{\"field\":\"" << res.field_label << "\",\"domain\":\""
       << domain.describe() << "\",\"epsilons\":[";
    for (std::size_t i = 0; i < res.epsilons.size(); ++i)
        os << (i ? "," : "") << fmt17(res.epsilons[i]);
    os << "],\"laws\":[";
    for (std::size_t i = 0; i < res.laws.size(); ++i) {
        if (i) os << ",";
        write_json(res.laws[i], os);
    }
    os << "],\"mean_exit\":[";
    for (std::size_t i = 0; i < res.mean_exit.size(); ++i)
        os << (i ? "," : "") << fmt17(res.mean_exit[i]);
    os << "],\"v_k_reference\":" << fmt17(res.v_k_reference)
       << ",\"verdicts\":{\"frequencies_stabilized\":"
       << (res.frequencies_stabilized ? "true" : "false")
       << ",\"gap_monotone\":" << (res.gap_monotone ? "true" : "false") << "}}\n";
}

}  // namespace znl
