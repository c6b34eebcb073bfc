// grids.hpp
//
// Documented verification grids for the mixture-moment bounds, and the
// pointwise checks run over them. Every grid is 10 u-values log-spaced over
// [u_min, u_max] crossed with 10 m-values; all comparisons are made in log
// space so that exp(m^2/2u) never overflows.
//
//   lower bound (v = 1)  : u in [tau0 threshold(delta), u_max],
//                          m = (j/10) lambda0 u, j = 1..10
//   G_t upper bound      : u in [sigma_delta, u_max],
//                          m = f (2k/e^2) u, f in {0, .25, .5, .75, 1, 1.25, 1.5, 2, 3, 5}
//   refined bound (v)    : u in [tau0 threshold(delta), u_max],
//                          m = (j/10) u / exp_v(2), j = 1..10
#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lil/boundaries.hpp"
#include "lil/mixtures.hpp"

namespace lil {

struct GridConfig {
    double delta = 0.05;
    double k = 1.0 / 3.0;
    double u_max = 1e8;
    int n_u = 10;
    // Negative-control hook: tightens every closed-form bound by this many
    // nats. Zero in all genuine runs.
    double corrupt_log_shift = 0.0;
    QuadratureSpec quadrature{1e-10, 1e-300, 10000};

    void validate() const {
        if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("GridConfig: delta must lie in (0, 1)");
        if (!(k > 0.0 && k < 1.0)) throw std::invalid_argument("GridConfig: k must lie in (0, 1)");
        if (n_u < 2) throw std::invalid_argument("GridConfig: n_u must be >= 2");
        quadrature.validate();
    }
};

struct GridPoint {
    double m = 0.0;
    double u = 0.0;
};

struct GridPointResult {
    GridPoint point;
    double log_integral = 0.0;
    double log_bound = 0.0;
    double log_slack = 0.0;   // positive when the bound holds
    double rel_error = 0.0;
    bool small_m = false;     // |m| <= 2 sqrt(u)
    bool ok = false;
    std::string error;        // quadrature or domain failure, if any
};

struct GridCheck {
    std::string name;
    std::vector<GridPointResult> rows;
    int violations = 0;
    int failures = 0;             // points where evaluation threw
    int small_m_points = 0;
    int small_m_violations = 0;
    double worst_log_slack = std::numeric_limits<double>::infinity();
    GridPoint worst;
    double max_rel_error = 0.0;
    double rel_error_limit = 1e-8;

    bool passed() const { return violations == 0 && failures == 0 && max_rel_error < rel_error_limit; }
};

inline std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> out(n);
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * i / (n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

inline std::vector<GridPoint> lower_bound_grid(const GridConfig& c) {
    BoundarySpec spec;
    spec.delta = c.delta;
    spec.k = c.k;
    const double l0 = lambda0_of(c.k);
    std::vector<GridPoint> out;
    for (double u : log_spaced(tau0_threshold(spec), c.u_max, c.n_u))
        for (int j = 1; j <= 10; ++j) out.push_back({j / 10.0 * l0 * u, u});
    return out;
}

inline std::vector<GridPoint> g_upper_grid(const GridConfig& c) {
    const double cap = 2.0 * c.k / kE2;
    std::vector<GridPoint> out;
    for (double u : log_spaced(sigma_delta(c.delta, c.k), c.u_max, c.n_u))
        for (double f : {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0, 5.0}) out.push_back({f * cap * u, u});
    return out;
}

inline std::vector<GridPoint> refined_grid(const GridConfig& c, int v) {
    BoundarySpec spec;
    spec.delta = c.delta;
    spec.k = c.k;
    const double b = MixtureDensity(v).support_bound();
    std::vector<GridPoint> out;
    for (double u : log_spaced(tau0_threshold(spec), c.u_max, c.n_u))
        for (int j = 1; j <= 10; ++j) out.push_back({j / 10.0 * b * u, u});
    return out;
}

namespace detail {

// integral(p) and bound(p) are log values; `lower` says whether the bound is
// a lower bound on the integral (true) or an upper bound (false).
template <class Integral, class Bound>
GridCheck run_grid(std::string name, const std::vector<GridPoint>& grid, bool lower,
                   const GridConfig& c, Integral&& integral, Bound&& bound) {
    GridCheck out;
    out.name = std::move(name);
    for (const auto& p : grid) {
        GridPointResult r;
        r.point = p;
        r.small_m = std::abs(p.m) <= 2.0 * std::sqrt(p.u);
        try {
            const MixtureValue iv = integral(p);
            r.log_integral = iv.log_value;
            r.rel_error = iv.rel_error;
            r.log_bound = bound(p) + (lower ? c.corrupt_log_shift : -c.corrupt_log_shift);
            r.log_slack = lower ? r.log_integral - r.log_bound : r.log_bound - r.log_integral;
            r.ok = r.log_slack >= 0.0;
        } catch (const std::exception& e) {
            r.error = e.what();
            ++out.failures;
        }
        if (r.error.empty()) {
            if (!r.ok) ++out.violations;
            if (r.small_m) {
                ++out.small_m_points;
                if (!r.ok) ++out.small_m_violations;
            }
            if (r.log_slack < out.worst_log_slack) {
                out.worst_log_slack = r.log_slack;
                out.worst = p;
            }
            out.max_rel_error = std::max(out.max_rel_error, r.rel_error);
        }
        out.rows.push_back(std::move(r));
    }
    return out;
}

}  // namespace detail

/// Mixed supermartingale moment (v = 1) against the lower bound on |m| <= lambda0 u.
inline GridCheck check_lower_bound_grid(const GridConfig& c = {}) {
    c.validate();
    const MixtureDensity d(1);
    return detail::run_grid(
        "lower-bound", lower_bound_grid(c), true, c,
        [&](const GridPoint& p) { return log_mixture_integral_super({p.m, p.u, c.k}, d, c.quadrature); },
        [&](const GridPoint& p) { return log_mixture_lower_rhs({p.m, p.u, c.k}); });
}

/// Mixed submartingale moment against the two-case upper bound G_t.
inline GridCheck check_g_upper_grid(const GridConfig& c = {}) {
    c.validate();
    return detail::run_grid(
        "g-upper", g_upper_grid(c), false, c,
        [&](const GridPoint& p) { return log_mixture_integral_sub({p.m, p.u, c.k}, c.quadrature); },
        [&](const GridPoint& p) { return log_g_upper({p.m, p.u, c.k}); });
}

/// Mixed supermartingale moment under P^v against the refined lower bound.
inline GridCheck check_refined_grid(int v, const GridConfig& c = {}) {
    c.validate();
    const MixtureDensity d(v);
    return detail::run_grid(
        "refined-v" + std::to_string(v), refined_grid(c, v), true, c,
        [&](const GridPoint& p) { return log_mixture_integral_super({p.m, p.u, c.k}, d, c.quadrature); },
        [&](const GridPoint& p) { return log_refined_rhs({p.m, p.u, c.k}, v); });
}

struct MassCheck {
    int v = 1;
    double mass = 0.0;
    double abs_error = 0.0;
    bool passed(double tol = 1e-6) const { return std::abs(mass - 1.0) <= tol; }
};

inline MassCheck check_unit_mass(int v, const QuadratureSpec& q = {}) {
    const auto r = density_mass(MixtureDensity(v), q);
    return {v, r.value, r.abs_error};
}

}  // namespace lil
