// boundaries.hpp
//
// Finite-time iterated-logarithm concentration boundaries for martingales.
//
// Every upper boundary has two simultaneous clauses, valid for all times
// after an initial time tau0:
//
//   |M_t| <= lambda0 * U_t                          (uniform LLN clause)
//   |M_t| <= rhs(U_t, |M_t|)                        (iterated-log clause)
//
// where lambda0 = 1 / (e^2 (1 + sqrt(k))) and U_t is the variance proxy of
// the chosen family. The iterated-log clause is implicit in |M_t|; the
// solver here converts it into an explicit envelope radius.
//
// All functions are pure and thread-safe.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lil/iterlog.hpp"
#include "lil/numeric.hpp"

namespace lil {

enum class Family { rademacher, hoeffding, bernstein, generic, anti, sharper };

inline std::string_view to_string(Family f) {
    switch (f) {
        case Family::rademacher: return "rademacher";
        case Family::hoeffding: return "hoeffding";
        case Family::bernstein: return "bernstein";
        case Family::generic: return "generic";
        case Family::anti: return "anti";
        case Family::sharper: return "sharper";
    }
    return "unknown";
}

inline Family family_from_string(std::string_view s) {
    for (auto f : {Family::rademacher, Family::hoeffding, Family::bernstein, Family::generic,
                   Family::anti, Family::sharper})
        if (to_string(f) == s) return f;
    throw std::invalid_argument("unknown boundary family '" + std::string(s) + "'");
}

inline constexpr double kDefaultC1 = (420.0 / 11.0) * (420.0 / 11.0);
inline constexpr double kDefaultC2 = 164.0;
inline constexpr double kDefaultC173 = 173.0;

struct BoundarySpec {
    Family family = Family::generic;
    double delta = 0.05;
    double k = 1.0 / 3.0;
    int v = 1;                     // iterated-log level (sharper family)
    double c1 = kDefaultC1;        // anti-concentration constants
    double c2 = kDefaultC2;
    bool hoeffding_c173 = false;   // tau0 threshold c173*ln(4/delta) instead of (2/lambda0^2)ln(4/delta)
    double c173 = kDefaultC173;

    void validate() const {
        if (!(delta > 0.0 && delta < 1.0))
            throw std::invalid_argument("delta must lie in (0, 1), got " + std::to_string(delta));
        if (!(k > 0.0 && k < 1.0))
            throw std::invalid_argument("k must lie in (0, 1), got " + std::to_string(k));
        if (v < 1) throw std::invalid_argument("v must be >= 1, got " + std::to_string(v));
        if (!(c1 > 0.0) || !(c2 > 0.0) || !(c173 > 0.0))
            throw std::invalid_argument("constants c1, c2, c173 must be positive");
    }
};

/// Value of the variance proxy U_t, optionally tagged with its time index.
struct VariancePoint {
    double u = 0.0;
    std::optional<std::int64_t> t;
};

enum class Clause { lln, lil };

inline std::string_view to_string(Clause c) { return c == Clause::lln ? "lln" : "lil"; }

struct BoundaryValue {
    double radius = 0.0;
    Clause binding_clause = Clause::lln;
};

inline double lambda0_of(double k) {
    if (!(k > 0.0 && k < 1.0))
        throw std::domain_error("lambda0_of: k must lie in (0, 1), got " + std::to_string(k));
    return 1.0 / (kE2 * (1.0 + std::sqrt(k)));
}

inline double lambda0(const BoundarySpec& spec) { return lambda0_of(spec.k); }

/// U = 2(e-2)V, the proxy used by the Bernstein family.
inline double bernstein_proxy(double conditional_variance) {
    return 2.0 * (kE - 2.0) * conditional_variance;
}

/// U-threshold defining tau0: (2/lambda0^2) ln(4/delta), or c173 ln(4/delta).
inline double tau0_threshold(const BoundarySpec& spec) {
    const double l0 = lambda0(spec);
    const double coef = spec.hoeffding_c173 ? spec.c173 : 2.0 / (l0 * l0);
    return coef * std::log(4.0 / spec.delta);
}

/// U-threshold (2/lambda0^2) ln(2/delta) for the LLN bound and the initial segment.
inline double lln_threshold(const BoundarySpec& spec) {
    const double l0 = lambda0(spec);
    return 2.0 / (l0 * l0) * std::log(2.0 / spec.delta);
}

// Smallest index t >= 0 with schedule(t) >= threshold, for a nondecreasing,
// unbounded schedule. Galloping search followed by bisection.
template <class Schedule>
std::int64_t first_index_reaching(Schedule&& schedule, double threshold) {
    if (schedule(std::int64_t{0}) >= threshold) return 0;
    std::int64_t lo = 0, hi = 1;
    while (schedule(hi) < threshold) {
        lo = hi;
        if (hi > (std::int64_t{1} << 61))
            throw std::domain_error("first_index_reaching: schedule does not reach threshold");
        hi *= 2;
    }
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (schedule(mid) >= threshold)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

template <class Schedule>
std::int64_t tau0_of(const BoundarySpec& spec, Schedule&& schedule) {
    spec.validate();
    return first_index_reaching(std::forward<Schedule>(schedule), tau0_threshold(spec));
}

inline double lln_boundary(const BoundarySpec& spec, VariancePoint point) {
    if (!(point.u >= 0.0)) throw std::domain_error("lln_boundary: u must be >= 0");
    return lambda0(spec) * point.u;
}

namespace detail {

// ln(ln x) where defined for the iterated-log clause; nullopt marks the
// vacuous region ln x <= 1.
inline std::optional<double> loglog_clause(double x) {
    if (!(x > kE)) return std::nullopt;
    return std::log(std::log(x));
}

inline double sqrt_nonneg(double x) { return x > 0.0 ? std::sqrt(x) : 0.0; }

}  // namespace detail

/// Sharper iterated-log boundary built from the level-v mixing distribution.
/// With no m_hint only the first branch of the max is used.
inline double sharper_boundary(double u, std::optional<double> m_hint, double delta, int v) {
    if (!(u > 0.0)) throw std::domain_error("sharper_boundary: u must be > 0");
    if (v < 1) throw std::domain_error("sharper_boundary: v must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("sharper_boundary: delta must lie in (0, 1)");
    const double root_u = std::sqrt(u);
    double branch = iter_log_plus(v + 1, root_u);
    for (int i = 2; i <= v + 1; ++i) branch += iter_log_plus(i, root_u);
    if (m_hint) {
        if (!(*m_hint > 0.0)) throw std::domain_error("sharper_boundary: m_hint must be > 0");
        branch = std::max(branch, iter_log_plus(v + 1, u / *m_hint));
    }
    return std::sqrt(2.0 * u * (std::log(2.0 * kE2 / delta) + branch));
}

/// Right-hand side of the iterated-log clause at |M| = m, or nullopt when
/// the clause is vacuous there.
inline std::optional<double> lil_rhs(const BoundarySpec& spec, double u, double m) {
    const double log2d = std::log(2.0 / spec.delta);
    switch (spec.family) {
        case Family::rademacher: {
            auto ll = detail::loglog_clause(5.0 * u / (2.0 * m));
            if (!ll) return std::nullopt;
            return detail::sqrt_nonneg(3.0 * u * (2.0 * *ll + log2d));
        }
        case Family::hoeffding: {
            auto ll = detail::loglog_clause(3.0 * u / (2.0 * m));
            if (!ll) return std::nullopt;
            return detail::sqrt_nonneg(3.0 * u * (2.0 * *ll + log2d));
        }
        case Family::bernstein: {
            const double var = u / (2.0 * (kE - 2.0));
            auto ll = detail::loglog_clause(3.0 * (kE - 2.0) * var / m);
            if (!ll) return std::nullopt;
            return detail::sqrt_nonneg(6.0 * (kE - 2.0) * var * (2.0 * *ll + log2d));
        }
        case Family::generic: {
            const double y = u / ((1.0 - std::sqrt(spec.k)) * m);
            if (!(y > kE)) return std::nullopt;
            const double ly = std::log(y);
            return detail::sqrt_nonneg(2.0 * u / (1.0 - spec.k) *
                                       std::log(2.0 * ly * ly / spec.delta));
        }
        case Family::sharper:
            return sharper_boundary(u, m, spec.delta, spec.v);
        case Family::anti:
            break;
    }
    throw std::invalid_argument("lil_rhs: the anti family has its own boundary (anti_rhs)");
}

/// m - rhs(m); +inf where the iterated-log clause is vacuous.
inline double boundary_residual(const BoundarySpec& spec, VariancePoint point, double m) {
    spec.validate();
    if (!(m > 0.0)) throw std::domain_error("boundary_residual: m must be > 0");
    if (!(point.u > 0.0)) throw std::domain_error("boundary_residual: u must be > 0");
    auto rhs = lil_rhs(spec, point.u, m);
    return rhs ? m - *rhs : kInf;
}

/// Fixed point of m = rhs(m) on (0, inf), ignoring the LLN clause. nullopt
/// when the residual only changes sign across the vacuous-region jump.
inline std::optional<double> lil_fixed_point(const BoundarySpec& spec, VariancePoint point) {
    spec.validate();
    if (!(point.u > 0.0)) throw std::domain_error("lil_fixed_point: u must be > 0");
    auto residual = [&](double m) { return boundary_residual(spec, point, m); };
    double hi = std::max(1.0, point.u);
    while (std::isfinite(residual(hi)) && residual(hi) <= 0.0) hi *= 2.0;
    // Pull hi back into the region where the clause is finite.
    double lo = 0.0;
    if (!std::isfinite(residual(hi))) {
        double a = 0.0, b = hi;
        for (int i = 0; i < 200 && b - a > 1e-15 * b; ++i) {
            const double mid = 0.5 * (a + b);
            if (std::isfinite(residual(mid))) a = mid; else b = mid;
        }
        if (a <= 0.0 || residual(a) <= 0.0) return std::nullopt;
        hi = a;
    }
    auto r = bisect_increasing(residual, lo, hi);
    return r.lo > 0.0 ? std::optional<double>(r.lo) : std::optional<double>(r.hi);
}

/// Envelope radius: the largest m in (0, lambda0*u] with residual(m) <= 0.
inline BoundaryValue solve_boundary(const BoundarySpec& spec, VariancePoint point) {
    spec.validate();
    if (!(point.u > 0.0)) throw std::domain_error("solve_boundary: u must be > 0");
    const double cap = lln_boundary(spec, point);
    auto residual = [&](double m) { return m > 0.0 ? boundary_residual(spec, point, m) : -kInf; };
    if (residual(cap) <= 0.0) return {cap, Clause::lln};
    auto r = bisect_increasing(residual, 0.0, cap);
    return {r.lo > 0.0 ? r.lo : r.hi, Clause::lil};
}

/// Closed-form corollary for the Rademacher walk (uses |M| >= 1).
inline double explicit_rademacher_boundary(std::int64_t t, double delta) {
    if (t < 1) throw std::domain_error("explicit_rademacher_boundary: t must be >= 1");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::domain_error("explicit_rademacher_boundary: delta must lie in (0, 1)");
    const double td = static_cast<double>(t);
    const double inner = 3.0 * td * (2.0 * std::log(std::log(2.5 * td)) + std::log(2.0 / delta));
    return std::max(detail::sqrt_nonneg(inner), 1.0);
}

/// Bound (2/lambda0) ln(2/delta) on |M_t| for all t before the LLN threshold.
inline double initial_segment_bound(const BoundarySpec& spec) {
    spec.validate();
    return 2.0 / lambda0(spec) * std::log(2.0 / spec.delta);
}

/// All-times boundary: initial-segment bound below the tau0 threshold, the
/// solved envelope from the threshold on (right-continuous switch).
inline double stitched_boundary(const BoundarySpec& spec, VariancePoint point) {
    spec.validate();
    if (!(point.u >= 0.0)) throw std::domain_error("stitched_boundary: u must be >= 0");
    if (point.u < tau0_threshold(spec)) return initial_segment_bound(spec);
    return solve_boundary(spec, point).radius;
}

// ---------------------------------------------------------------------------
// Anti-concentration boundary for the Rademacher walk (U_t = t).

struct AntiWindow {
    double lower = 0.0;  // 4 / ln((T-1)/3)
    double upper = 0.0;  // 1 / C1
    bool contains_delta = false;
    bool empty() const { return !(lower <= upper); }
};

inline AntiWindow anti_window(std::int64_t horizon, double delta, double c1) {
    AntiWindow w;
    const double arg = (static_cast<double>(horizon) - 1.0) / 3.0;
    w.lower = arg > 1.0 ? 4.0 / std::log(arg) : kInf;
    w.upper = 1.0 / c1;
    w.contains_delta = delta >= w.lower && delta <= w.upper;
    return w;
}

/// Start of the lower-direction search window: (e^4/k) ln(2/delta).
inline double sigma_delta(double delta, double k = 1.0 / 3.0) {
    return kE2 * kE2 / k * std::log(2.0 / delta);
}

/// Clause cap (2k/e^2) u: the linear part of the anti-concentration event.
inline double anti_clause_cap(double u, double k = 1.0 / 3.0) { return 2.0 * k * u / kE2; }

/// sqrt(2k u (lnln(2ku/(m + 2 sqrt(ku))) + ln(1/(C1 delta)))), with a
/// negative radicand clamped to 0; nullopt where the log-log is vacuous.
inline std::optional<double> anti_rhs(double u, double delta, double m, double c1,
                                      double k = 1.0 / 3.0) {
    const double root_ku = std::sqrt(k * u);
    auto ll = detail::loglog_clause(2.0 * k * u / (m + 2.0 * root_ku));
    if (!ll) return std::nullopt;
    return detail::sqrt_nonneg(2.0 * k * u * (*ll + std::log(1.0 / (c1 * delta))));
}

inline double anti_boundary_residual(std::int64_t t, double delta, double m, double c1,
                                     double k = 1.0 / 3.0) {
    if (t < 1) throw std::domain_error("anti_boundary_residual: t must be >= 1");
    if (!(delta > 0.0)) throw std::domain_error("anti_boundary_residual: delta must be > 0");
    if (!(m >= 0.0)) throw std::domain_error("anti_boundary_residual: m must be >= 0");
    const double u = static_cast<double>(t);
    if (!anti_rhs(u, delta, 0.0, c1, k))
        throw std::domain_error("anti_boundary_residual: t too small for the log-log term");
    auto rhs = anti_rhs(u, delta, m, c1, k);
    return rhs ? m - *rhs : kInf;
}

/// Fixed point m* = rhs(m*) in [0, (2k/e^2) t], or the cap when none.
inline double solve_anti(std::int64_t t, double delta, double c1, double k = 1.0 / 3.0) {
    const double u = static_cast<double>(t);
    const double cap = anti_clause_cap(u, k);
    auto residual = [&](double m) { return anti_boundary_residual(t, delta, m, c1, k); };
    if (residual(0.0) >= 0.0) return 0.0;
    if (residual(cap) <= 0.0) return cap;
    return bisect_increasing(residual, 0.0, cap).lo;
}

}  // namespace lil
