// verify.hpp
//
// Invariant suites shared by the CLI's verify-all command and the
// acceptance binary. Each suite runs one family of checks and returns a
// verdict plus a one-line summary; nothing here prints.
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "lil/boundaries.hpp"
#include "lil/grids.hpp"
#include "lil/mixtures.hpp"
#include "lil/processes.hpp"
#include "lil/simulation.hpp"

namespace lil {

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string summary;
};

namespace detail {

inline std::string fmt(double x, int digits = 6) {
    std::ostringstream os;
    os << std::setprecision(digits) << x;
    return os.str();
}

}  // namespace detail

/// The five families checked by the solver certificates.
inline std::vector<Family> certificate_families() {
    return {Family::rademacher, Family::hoeffding, Family::bernstein, Family::generic, Family::sharper};
}

inline std::vector<double> certificate_u_values() { return {1e4, 1e5, 1e6, 1e8, 1e10}; }

inline std::vector<double> certificate_deltas() { return {0.05, 0.01}; }

struct CertificateStats {
    int triples = 0;
    int lil_bound = 0;
    int lln_bound = 0;
    int violations = 0;
    double max_rel_residual = 0.0;
};

/// Fixed-point certificate for every (family, u, delta) triple: a radius
/// bound by the iterated-log clause satisfies |r - rhs(r)| <= tol * max(r, 1);
/// a radius bound by the linear clause equals lambda0 u with residual <= 0.
inline CertificateStats solver_certificates(const std::vector<Family>& families, const std::vector<double>& us,
                                            const std::vector<double>& deltas, double tol = 1e-9) {
    CertificateStats st;
    for (Family f : families)
        for (double u : us)
            for (double d : deltas) {
                BoundarySpec spec;
                spec.family = f;
                spec.delta = d;
                if (f == Family::sharper) spec.v = 2;
                const auto b = solve_boundary(spec, {u, std::nullopt});
                ++st.triples;
                if (b.binding_clause == Clause::lil) {
                    ++st.lil_bound;
                    const auto rhs = lil_rhs(spec, u, b.radius);
                    const double rel = rhs ? std::abs(b.radius - *rhs) / std::max(b.radius, 1.0) : kInf;
                    st.max_rel_residual = std::max(st.max_rel_residual, rel);
                    if (!(rel <= tol)) ++st.violations;
                } else {
                    ++st.lln_bound;
                    if (b.radius != lln_boundary(spec, {u, std::nullopt}) ||
                        boundary_residual(spec, {u, std::nullopt}, b.radius) > 0.0)
                        ++st.violations;
                }
            }
    return st;
}

inline SuiteResult solver_certificate_suite(const std::vector<double>& us = certificate_u_values(),
                                            const std::vector<double>& deltas = certificate_deltas()) {
    const auto st = solver_certificates(certificate_families(), us, deltas);
    return {"solver-certificates", st.violations == 0,
            std::to_string(st.triples) + " triples (" + std::to_string(st.lil_bound) + " iterated-log, " +
                std::to_string(st.lln_bound) + " linear), " + std::to_string(st.violations) +
                " violations, max |r - rhs(r)|/max(r,1) = " + detail::fmt(st.max_rel_residual, 3)};
}

/// The solved Rademacher envelope never exceeds the closed-form corollary
/// max(explicit(t), 1), checked at every t in `ts` and delta in `deltas`.
inline SuiteResult explicit_corollary_suite(const std::vector<std::int64_t>& ts, const std::vector<double>& deltas) {
    int points = 0, violations = 0;
    double worst_ratio = 0.0;
    for (std::int64_t t : ts)
        for (double d : deltas) {
            BoundarySpec spec;
            spec.family = Family::rademacher;
            spec.delta = d;
            const double r = solve_boundary(spec, {static_cast<double>(t), t}).radius;
            const double cap = std::max(explicit_rademacher_boundary(t, d), 1.0);
            ++points;
            worst_ratio = std::max(worst_ratio, r / cap);
            if (r > cap) ++violations;
        }
    return {"explicit-corollary", violations == 0,
            std::to_string(points) + " points, " + std::to_string(violations) +
                " violations, max solve/explicit = " + detail::fmt(worst_ratio, 6)};
}

/// Fixed-point certificates for the anti-concentration solver.
inline SuiteResult anti_certificate_suite(const std::vector<std::int64_t>& ts, const std::vector<double>& deltas,
                                          double c1 = kDefaultC1, double tol = 1e-9) {
    int points = 0, interior = 0, clamped_zero = 0, clamped_cap = 0, violations = 0;
    for (std::int64_t t : ts)
        for (double d : deltas) {
            const double m = solve_anti(t, d, c1);
            const double cap = anti_clause_cap(static_cast<double>(t));
            ++points;
            if (m == 0.0) {
                ++clamped_zero;
                if (anti_boundary_residual(t, d, 0.0, c1) < 0.0) ++violations;
            } else if (m == cap) {
                ++clamped_cap;
                if (anti_boundary_residual(t, d, cap, c1) > 0.0) ++violations;
            } else {
                ++interior;
                const auto rhs = anti_rhs(static_cast<double>(t), d, m, c1);
                if (!rhs || !(std::abs(m - *rhs) <= tol * std::max(m, 1.0))) ++violations;
            }
        }
    return {"anti-certificates (c1 = " + detail::fmt(c1, 4) + ")", violations == 0,
            std::to_string(points) + " points (" + std::to_string(interior) + " interior fixed points, " +
                std::to_string(clamped_zero) + " clamped to 0, " + std::to_string(clamped_cap) +
                " at the cap), " + std::to_string(violations) + " violations"};
}

inline SuiteResult inequality_suite(std::int64_t n = 100000) {
    bool ok = true;
    std::string s;
    for (auto w : {Inequality::cosh_vs_expk, Inequality::exp_linear_quad, Inequality::exp_upper_quad}) {
        const auto v = inequality_grid_check(w, n);
        ok = ok && v.pass();
        if (!s.empty()) s += "; ";
        s += std::string(to_string(w)) + ": " + std::to_string(v.points) + " points, " +
             std::to_string(v.violations) + " violations, min slack " + detail::fmt(v.min_rel_slack, 3);
    }
    return {"inequality-certificates", ok, s};
}

inline SuiteResult series_suite() {
    const auto v = series_bound_value();
    return {"series-bound", v.value() <= 1.5,
            "partial + tail = " + detail::fmt(v.value(), 17) + " (bound 1.5)"};
}

inline SuiteResult grid_suite(const GridCheck& g) {
    std::string s = std::to_string(g.rows.size()) + " points, " + std::to_string(g.violations) + " violations (" +
                    std::to_string(g.small_m_violations) + " of " + std::to_string(g.small_m_points) +
                    " with |m| <= 2 sqrt(u)), " + std::to_string(g.failures) + " evaluation failures, " +
                    "worst log slack " + detail::fmt(g.worst_log_slack, 6) + " at m = " + detail::fmt(g.worst.m, 6) +
                    ", u = " + detail::fmt(g.worst.u, 6) + ", max rel error " + detail::fmt(g.max_rel_error, 3);
    return {"grid " + g.name, g.passed(), s};
}

inline SuiteResult mass_suite(int v, const QuadratureSpec& q = {}) {
    const auto m = check_unit_mass(v, q);
    return {"unit-mass v=" + std::to_string(v), m.passed(),
            "mass = " + detail::fmt(m.mass, 17) + " (error estimate " + detail::fmt(m.abs_error, 3) + ")"};
}

/// Number of sign sequences of length t with j plus signs, j = 0..t, found
/// by enumerating all 2^t sequences; an oracle independent of any binomial
/// formula.
inline std::vector<std::uint64_t> exhaustive_plus_counts(int t) {
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(t) + 1, 0);
    const std::uint64_t n = std::uint64_t{1} << t;
    for (std::uint64_t mask = 0; mask < n; ++mask) ++counts[static_cast<std::size_t>(std::popcount(mask))];
    return counts;
}

/// E[exp(lambda |M_t| - lambda^2 t/2)] from enumerated sign counts.
inline double moment_from_counts(const std::vector<std::uint64_t>& counts, double lambda) {
    const int t = static_cast<int>(counts.size()) - 1;
    KahanSum sum;
    for (int j = 0; j <= t; ++j)
        sum += static_cast<double>(counts[static_cast<std::size_t>(j)]) *
               std::exp(lambda * std::abs(2.0 * j - t) - lambda * lambda * t / 2.0);
    return std::ldexp(sum.value(), -t);
}

inline SuiteResult exact_moment_suite(int t_max, const std::vector<double>& lambdas = {0.05, 0.3, 1.0},
                                      double tol = 1e-12) {
    int points = 0, violations = 0;
    double worst = 0.0;
    for (int t = 0; t <= t_max; ++t) {
        const auto counts = exhaustive_plus_counts(t);
        for (double lam : lambdas) {
            const double oracle = moment_from_counts(counts, lam);
            const double rel = std::abs(exact_constant_moment(t, lam) - oracle) / oracle;
            ++points;
            worst = std::max(worst, rel);
            if (!(rel <= tol)) ++violations;
        }
    }
    return {"exact-moment (t <= " + std::to_string(t_max) + ")", violations == 0,
            std::to_string(points) + " (t, lambda) pairs, max relative difference " + detail::fmt(worst, 3)};
}

/// Monte Carlo moment bound E[exp(lambda |M_tau| - lambda^2 U_tau / 2)] <= 2
/// on Rademacher walks for a constant time (100), a hitting time of
/// |M| >= 20 and the horizon itself, each with lambda = 1/sqrt(typical U).
inline std::vector<SuiteResult> optional_stopping_suites(std::int64_t n_paths, std::int64_t horizon,
                                                         std::uint64_t seed, unsigned threads = 1) {
    struct Rule {
        std::string label;
        TauSpec tau;
        double lambda;
    };
    const Rule rules[] = {{"constant(100)", TauSpec::constant(100), 0.1},
                          {"hitting(20)", TauSpec::hitting(20.0), 0.05},
                          {"horizon(" + std::to_string(horizon) + ")", TauSpec::at_horizon(),
                           1.0 / std::sqrt(static_cast<double>(horizon))}};
    std::vector<SuiteResult> out;
    for (const auto& r : rules) {
        const auto e = optional_stopping_estimate(IncrementModel::rademacher(), r.tau, r.lambda, n_paths, horizon,
                                                  seed, ProxyFlavor::time, threads);
        out.push_back({"optional-stopping " + r.label, e.pass,
                       "lambda " + detail::fmt(r.lambda, 6) + ", estimate " + detail::fmt(e.estimate, 8) + ", se " +
                           detail::fmt(e.std_error, 3) + ", estimate - 3 se = " +
                           detail::fmt(e.estimate - 3.0 * e.std_error, 8) + " (bound 2)"});
    }
    return out;
}

/// One-step Monte Carlo checks of every exponential construction.
inline SuiteResult one_step_suite(std::int64_t n_samples, std::uint64_t seed) {
    struct Case {
        IncrementModel model;
        Construction c;
        double lambda;
    };
    const double l = 0.1;
    const Case cases[] = {
        {IncrementModel::rademacher(), Construction::hoeffding_half, 0.5},
        {IncrementModel::rademacher(), Construction::bernstein, l},
        {IncrementModel::rademacher(), Construction::quad, 0.5},
        {IncrementModel::rademacher(), Construction::relaxed, l},
        {IncrementModel::rademacher(), Construction::sub_k, l},
        {IncrementModel::bounded_e2(), Construction::bernstein, l},
        {IncrementModel::moment_family(), Construction::relaxed, l},
    };
    int failures = 0;
    for (const auto& cs : cases)
        if (!check_one_step_supermart(cs.model, cs.lambda, cs.c, n_samples, seed).pass) ++failures;
    return {"one-step-ratios", failures == 0,
            std::to_string(std::size(cases)) + " (model, construction) cases, " + std::to_string(failures) +
                " failures at " + std::to_string(n_samples) + " samples each"};
}

}  // namespace lil
