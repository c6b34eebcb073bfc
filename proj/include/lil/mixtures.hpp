// mixtures.hpp
//
// Mixing distributions over the exponential-supermartingale parameter lambda
// and the mixed moments they produce.
//
// The level-v density is
//
//   P^v(dlambda) = dlambda / (|lambda| log_v(1/|lambda|) prod_{i=1..v} log_i(1/|lambda|))
//
// on 0 < |lambda| <= 1/exp_v(2). Its one-sided antiderivative is
// 1/log_v(1/lambda), so the substitution s = 1/log_v(1/lambda) maps each half
// of the support onto s in (0, 1/2] with P^v(dlambda) = ds. All mixed
// integrals are evaluated in s, which removes the endpoint singularity at
// lambda = 0 exactly.
//
// Mixed moments grow like exp(m^2 / 2u), so integrals are returned in log
// form: the exponent's maximum over the support is factored out before
// integrating.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lil/boundaries.hpp"
#include "lil/iterlog.hpp"
#include "lil/numeric.hpp"

namespace lil {

struct MixtureDensity {
    int v = 1;

    MixtureDensity() = default;
    explicit MixtureDensity(int level) : v(level) {
        if (v < 1) throw std::invalid_argument("MixtureDensity: level v must be >= 1");
    }

    /// 1/exp_v(2); underflows to 0 for v >= 3.
    double support_bound() const { return 1.0 / iter_exp(v, 2.0); }
    /// ln(1/support_bound) = exp_{v-1}(2), representable for v <= 3.
    double log_inverse_support() const { return iter_exp(v - 1, 2.0); }
};

/// |lambda| * density, written in w = ln(1/|lambda|): 1/(log_v ∏ log_i) with log_1 = w.
inline double density_log_weight(int v, double w) {
    double level = w;
    double prod = w;
    for (int i = 2; i <= v; ++i) {
        level = std::log(level);
        prod *= level;
    }
    return 1.0 / (level * prod);
}

inline double density_eval(const MixtureDensity& d, double lambda) {
    const double a = std::abs(lambda);
    if (!(a > 0.0)) throw std::domain_error("density_eval: lambda must be nonzero");
    if (a > d.support_bound()) throw std::domain_error("density_eval: lambda outside the support");
    return density_log_weight(d.v, -std::log(a)) / a;
}

/// Closed-form mass of (0, |lambda|]: 1/log_v(1/|lambda|).
inline double density_tail_mass(const MixtureDensity& d, double lambda) {
    const double a = std::abs(lambda);
    if (!(a > 0.0) || a > d.support_bound())
        throw std::domain_error("density_tail_mass: lambda outside the support");
    return 1.0 / iter_log(d.v, 1.0 / a);
}

namespace detail {

// lambda(s) = exp(-exp_{v-1}(1/s)); 0 once it underflows.
inline double lambda_of_s(int v, double s) {
    if (!(s > 0.0)) return 0.0;
    return std::exp(-iter_exp(v - 1, 1.0 / s));
}

// s(lambda) = 1/log_v(1/lambda) computed through w = ln(1/lambda).
inline double s_of_lambda(int v, double lambda) {
    if (!(lambda > 0.0)) return 0.0;
    return 1.0 / iter_log(v - 1, -std::log(lambda));
}

}  // namespace detail

struct MassResult {
    double value = 0.0;
    double abs_error = 0.0;
};

// Total mass of P^v by quadrature. The part of each half with
// w = ln(1/|lambda|) in [exp_{v-1}(2), 1e12 * exp_{v-1}(2)] is integrated
// from the density formula (in z = ln w); the remaining inner piece, which
// reaches the singular endpoint, is integrated in s.
inline MassResult density_mass(const MixtureDensity& d, const QuadratureSpec& q = {}) {
    const double w0 = d.log_inverse_support();
    const double w_cut = w0 * 1e12;
    auto raw = integrate([&](double z) {
        const double w = std::exp(z);
        return w * density_log_weight(d.v, w);
    }, std::log(w0), std::log(w_cut), q);
    const double s_cut = 1.0 / iter_log(d.v - 1, w_cut);
    auto inner = integrate([](double) { return 1.0; }, 0.0, s_cut, q);
    return {2.0 * (raw.value + inner.value), 2.0 * (raw.abs_error + inner.abs_error)};
}

struct MomentPoint {
    double m = 0.0;
    double u = 1.0;
    double k = 1.0 / 3.0;
};

/// A mixed moment in log form, with the quadrature's relative error estimate.
struct MixtureValue {
    double log_value = 0.0;
    double rel_error = 0.0;
    double value() const { return std::exp(log_value); }
};

namespace detail {

// Integrates exp(lambda*m - c*lambda^2*u) + exp(-lambda*m - c*lambda^2*u)
// over 0 < lambda <= support of P^v, in s. Mirrored halves are folded since
// the density is even.
inline MixtureValue mixed_gaussian_moment(double m, double u, double c, int v,
                                          const QuadratureSpec& q) {
    if (!(u > 0.0)) throw std::domain_error("mixture integral: u must be > 0");
    const MixtureDensity d(v);
    const double b = d.support_bound();
    const double am = std::abs(m);
    const double peak = std::clamp(am / (2.0 * c * u), 0.0, b);
    const double log_scale = peak * am - c * peak * peak * u;

    auto integrand = [&](double s) {
        const double lam = lambda_of_s(v, s);
        const double quad = c * lam * lam * u + log_scale;
        return std::exp(lam * am - quad) + std::exp(-lam * am - quad);
    };

    std::vector<double> breaks{0.0, 0.5};
    const double width = 1.0 / std::sqrt(2.0 * c * u);
    for (double j : {-5.0, -1.0, 0.0, 1.0, 5.0}) {
        const double lam = peak + j * width;
        if (lam > 0.0 && lam < b) breaks.push_back(s_of_lambda(v, lam));
    }
    auto r = integrate(integrand, breaks, q);
    if (!(r.value > 0.0)) throw quadrature_error("mixture integral: non-positive result");
    return {log_scale + std::log(r.value), r.abs_error / r.value};
}

}  // namespace detail

/// ∫ exp(lambda m - lambda^2 u / 2) dP^v(lambda), in log form.
inline MixtureValue log_mixture_integral_super(const MomentPoint& p, const MixtureDensity& d,
                                               const QuadratureSpec& q = {}) {
    return detail::mixed_gaussian_moment(p.m, p.u, 0.5, d.v, q);
}

inline double mixture_integral_super(const MomentPoint& p, const MixtureDensity& d,
                                     const QuadratureSpec& q = {}) {
    return log_mixture_integral_super(p, d, q).value();
}

/// ∫ exp(lambda m - k lambda^2 u) dP^1(lambda), in log form.
inline MixtureValue log_mixture_integral_sub(const MomentPoint& p, const QuadratureSpec& q = {}) {
    if (!(p.k > 0.0 && p.k < 1.0)) throw std::domain_error("mixture_integral_sub: k must lie in (0, 1)");
    return detail::mixed_gaussian_moment(p.m, p.u, p.k, 1, q);
}

inline double mixture_integral_sub(const MomentPoint& p, const QuadratureSpec& q = {}) {
    return log_mixture_integral_sub(p, q).value();
}

// ---------------------------------------------------------------------------
// Closed-form bounds on the mixed moments.

/// log of 2 exp((m^2/2u)(1-k)) / ln^2(u / ((1 - sqrt k)|m|)), on 0 < |m| <= lambda0 u.
inline double log_mixture_lower_rhs(const MomentPoint& p) {
    const double am = std::abs(p.m);
    if (!(am > 0.0)) throw std::domain_error("mixture_lower_rhs: m must be nonzero");
    if (!(p.u > 0.0)) throw std::domain_error("mixture_lower_rhs: u must be > 0");
    if (am > lambda0_of(p.k) * p.u) throw std::domain_error("mixture_lower_rhs: requires |m| <= lambda0 u");
    const double l = std::log(p.u / ((1.0 - std::sqrt(p.k)) * am));
    return std::log(2.0) + p.m * p.m / (2.0 * p.u) * (1.0 - p.k) - 2.0 * std::log(l);
}

inline double mixture_lower_rhs(const MomentPoint& p) { return std::exp(log_mixture_lower_rhs(p)); }

/// log G_t: the two-case upper bound on the mixed submartingale moment.
inline double log_g_upper(const MomentPoint& p) {
    if (!(p.u > 0.0)) throw std::domain_error("g_upper: u must be > 0");
    const double am = std::abs(p.m);
    const double ku = p.k * p.u;
    const double root_ku = std::sqrt(ku);
    const bool inner = am <= 2.0 * p.k / kE2 * p.u;
    const double arg = inner ? 2.0 * ku / (am + 2.0 * root_ku) : root_ku;
    if (!(arg > 1.0)) throw std::domain_error("g_upper: log argument must exceed 1");
    const double c = inner ? 15.0 : 7.0;
    return std::log(c) + p.m * p.m / (4.0 * ku) - std::log(std::log(arg));
}

inline double g_upper(const MomentPoint& p) { return std::exp(log_g_upper(p)); }

/// log of exp(m^2/2u) / (e^2 max[log_v^+(√u) ∏ log_i^+(√u), log_v^+(u/|m|)]).
inline double log_refined_rhs(const MomentPoint& p, int v) {
    if (!(p.m != 0.0)) throw std::domain_error("refined_rhs: m must be nonzero");
    if (!(p.u > 0.0)) throw std::domain_error("refined_rhs: u must be > 0");
    if (v < 1) throw std::domain_error("refined_rhs: v must be >= 1");
    const double root_u = std::sqrt(p.u);
    double first = iter_log_plus(v, root_u);
    for (int i = 1; i <= v; ++i) first *= iter_log_plus(i, root_u);
    const double second = iter_log_plus(v, p.u / std::abs(p.m));
    return p.m * p.m / (2.0 * p.u) - 2.0 - std::log(std::max(first, second));
}

inline double refined_rhs(const MomentPoint& p, int v) { return std::exp(log_refined_rhs(p, v)); }

// ---------------------------------------------------------------------------

struct SeriesBound {
    double partial = 0.0;     // sum_{i=0}^{200} e^{-i} ln(1 + sqrt i)
    double tail_bound = 0.0;  // e^{-200} ln(1 + sqrt 200) / (1 - e^{-1})
    double value() const { return partial + tail_bound; }
};

inline SeriesBound series_bound_value() {
    KahanSum s;
    for (int i = 0; i <= 200; ++i) s += std::exp(-i) * std::log1p(std::sqrt(static_cast<double>(i)));
    return {s.value(), std::exp(-200.0) * std::log1p(std::sqrt(200.0)) / (1.0 - std::exp(-1.0))};
}

struct ChebyshevVerdict {
    bool monotone = false;   // f nondecreasing and g nonincreasing on the sample grid
    bool holds = false;
    double lhs = 0.0;        // ∫ f g
    double rhs = 0.0;        // (1/(b-a)) ∫ f ∫ g
};

// Integral inequality ∫fg <= (1/(b-a)) ∫f ∫g for f nondecreasing, g
// nonincreasing on (a, b]. Monotonicity is checked on 1001 samples.
inline ChebyshevVerdict chebyshev_integral_check(const std::function<double(double)>& f,
                                                 const std::function<double(double)>& g,
                                                 double a, double b, const QuadratureSpec& q = {}) {
    if (!(b > a)) throw std::invalid_argument("chebyshev_integral_check: requires a < b");
    ChebyshevVerdict out;
    out.monotone = true;
    constexpr int kSamples = 1000;
    double pf = f(a + (b - a) / kSamples), pg = g(a + (b - a) / kSamples);
    for (int i = 2; i <= kSamples; ++i) {
        const double x = a + (b - a) * i / kSamples;
        const double fx = f(x), gx = g(x);
        if (fx < pf || gx > pg) out.monotone = false;
        pf = fx;
        pg = gx;
    }
    auto fg = integrate([&](double x) { return f(x) * g(x); }, a, b, q);
    auto fi = integrate(f, a, b, q);
    auto gi = integrate(g, a, b, q);
    out.lhs = fg.value;
    out.rhs = fi.value * gi.value / (b - a);
    const double slack = fg.abs_error + (std::abs(fi.value) * gi.abs_error +
                                         std::abs(gi.value) * fi.abs_error) / (b - a) +
                         1e-12 * std::max(1.0, std::abs(out.rhs));
    out.holds = out.monotone && out.lhs <= out.rhs + slack;
    return out;
}

}  // namespace lil
