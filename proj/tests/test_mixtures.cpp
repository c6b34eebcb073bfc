#include <gtest/gtest.h>

#include <cmath>

#include "lil/boundaries.hpp"
#include "lil/mixtures.hpp"

using namespace lil;

namespace {

// Independent oracle: composite Simpson in w = ln(1/lambda) on a fixed grid
// for the v = 1 mixed moment, with the inner tail (w > w_max) bounded
// by its mass 1/w_max times the integrand's supremum there (which is
// e^{lambda m} <= e^{m/w_max... } ~ 1 for the tested points).
double simpson_super_v1(double m, double u) {
    auto f = [&](double w) {
        const double lam = std::exp(-w);
        const double g = std::exp(lam * m - lam * lam * u / 2.0) + std::exp(-lam * m - lam * lam * u / 2.0);
        return g / (w * w);  // P(dlambda) = dw / w^2 for v = 1
    };
    const double a = 2.0, b = 60.0;
    const int n = 200000;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0 + 2.0 / b;  // integrand ~ 2 for w > 60 where lambda < 1e-26
}

// Log of the same Simpson oracle with exp(shift) factored out of the
// integrand, for points where the moment itself overflows a double.
double log_simpson_super_v1(double m, double u, double shift) {
    auto f = [&](double w) {
        const double lam = std::exp(-w);
        const double q = -lam * lam * u / 2.0 - shift;
        return (std::exp(lam * m + q) + std::exp(-lam * m + q)) / (w * w);
    };
    const double a = 2.0, b = 60.0;
    const int n = 400000;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return std::log(s * h / 3.0) + shift;
}

}  // namespace

TEST(Density, SpecExamples) {
    const MixtureDensity d(1);
    EXPECT_NEAR(density_eval(d, std::exp(-3.0)), std::exp(3.0) / 9.0, 1e-13);
    EXPECT_EQ(density_eval(d, -std::exp(-3.0)), density_eval(d, std::exp(-3.0)));
    EXPECT_NEAR(density_tail_mass(d, std::exp(-3.0)) - density_tail_mass(d, std::exp(-4.0)), 1.0 / 12.0, 1e-15);
}

TEST(Density, SupportAndDomain) {
    EXPECT_NEAR(MixtureDensity(1).support_bound(), std::exp(-2.0), 1e-17);
    EXPECT_NEAR(MixtureDensity(2).support_bound(), 1.0 / std::exp(kE2), 1e-14 * std::exp(-kE2));
    EXPECT_THROW(MixtureDensity(0), std::invalid_argument);
    EXPECT_THROW(density_eval(MixtureDensity(1), 0.0), std::domain_error);
    EXPECT_THROW(density_eval(MixtureDensity(1), 0.2), std::domain_error);
    EXPECT_NEAR(density_tail_mass(MixtureDensity(2), MixtureDensity(2).support_bound()), 0.5, 1e-15);
}

TEST(Density, LevelTwoMatchesFormula) {
    const MixtureDensity d(2);
    const double lam = 1e-5;
    const double l1 = std::log(1.0 / lam), l2 = std::log(l1);
    EXPECT_NEAR(density_eval(d, lam), 1.0 / (lam * l2 * l1 * l2), 1e-6);
}

TEST(Density, UnitMass) {
    for (int v = 1; v <= 3; ++v) {
        auto r = density_mass(MixtureDensity(v));
        EXPECT_NEAR(r.value, 1.0, 1e-6) << "v=" << v;
        EXPECT_LT(r.abs_error, 1e-6);
    }
}

TEST(MixtureSuper, MatchesSimpsonOracle) {
    for (auto [m, u] : {std::pair{50.0, 1e4}, std::pair{0.0, 1e4}, std::pair{300.0, 2e4}}) {
        const double adaptive = mixture_integral_super({m, u}, MixtureDensity(1));
        EXPECT_NEAR(adaptive, simpson_super_v1(m, u), 1e-8 * adaptive) << "m=" << m << " u=" << u;
    }
}

TEST(MixtureSuper, FrozenValues) {
    EXPECT_NEAR(mixture_integral_super({50.0, 1e4}, MixtureDensity(1)), 0.461266193402593710, 1e-9);
    const double tiny_u = mixture_integral_super({0.0, 1e-12}, MixtureDensity(1));
    EXPECT_GE(tiny_u, 1.0 - 1e-6);
    EXPECT_LE(tiny_u, 1.0 + 1e-12);
}

TEST(MixtureSuper, DecaysInU) {
    const MixtureDensity d(1);
    EXPECT_LT(mixture_integral_super({0.0, 1e8}, d), mixture_integral_super({0.0, 1e4}, d));
    double prev = 2.0;
    for (double u = 1.0; u < 1e12; u *= 10.0) {
        const double val = mixture_integral_super({0.0, u}, d);
        EXPECT_LT(val, prev);
        prev = val;
    }
}

TEST(MixtureSuper, AboveLowerBoundAtExample) {
    EXPECT_GE(mixture_integral_super({50.0, 1e4}, MixtureDensity(1)), mixture_lower_rhs({50.0, 1e4}));
}

TEST(MixtureSuper, EvenInM) {
    for (int v : {1, 2})
        for (double m : {1.0, 30.0, 400.0})
            EXPECT_NEAR(mixture_integral_super({m, 1e4}, MixtureDensity(v)),
                        mixture_integral_super({-m, 1e4}, MixtureDensity(v)), 1e-14);
}

TEST(MixtureSuper, LogFormSurvivesOverflow) {
    // exp(m^2/2u) with m = 0.1 u at u = 1e8 is far beyond binary64.
    auto r = log_mixture_integral_super({1e7, 1e8}, MixtureDensity(1));
    EXPECT_TRUE(std::isfinite(r.log_value));
    EXPECT_GT(r.log_value, 700.0);
    EXPECT_LT(r.rel_error, 1e-8);
}

TEST(MixtureSuper, SelfConsistentUnderTighterTolerance) {
    const MomentPoint p{120.0, 5e4};
    auto loose = log_mixture_integral_super(p, MixtureDensity(1), {1e-8, 1e-300, 10000});
    auto tight = log_mixture_integral_super(p, MixtureDensity(1), {5e-9, 1e-300, 10000});
    EXPECT_LE(std::abs(loose.log_value - tight.log_value), std::max(loose.rel_error, 1e-15) + 1e-15);
}

TEST(MixtureSub, FrozenValueAndBound) {
    const double v = mixture_integral_sub({0.0, 1e6});
    EXPECT_NEAR(v, 0.303486563708646420, 1e-9);
    EXPECT_LE(v, g_upper({0.0, 1e6}));
}

TEST(MixtureSub, EvenAndUnitMassLimit) {
    EXPECT_NEAR(mixture_integral_sub({25.0, 1e5}), mixture_integral_sub({-25.0, 1e5}), 1e-14);
    EXPECT_NEAR(mixture_integral_sub({0.0, 1e-12}), 1.0, 1e-6);
    EXPECT_THROW(mixture_integral_sub({0.0, 1.0, 1.5}), std::domain_error);
    EXPECT_THROW(mixture_integral_sub({0.0, 0.0}), std::domain_error);
}

TEST(MixtureLowerRhs, Values) {
    EXPECT_NEAR(mixture_lower_rhs({50.0, 1e4}), 0.0572962518146261857, 1e-14);
    EXPECT_NEAR(mixture_lower_rhs({10.0, 1e4}), 0.0332468967695929679, 1e-14);
    EXPECT_EQ(mixture_lower_rhs({50.0, 1e4}), mixture_lower_rhs({-50.0, 1e4}));
}

TEST(MixtureLowerRhs, DomainErrors) {
    EXPECT_THROW(mixture_lower_rhs({0.0, 1e4}), std::domain_error);
    EXPECT_THROW(mixture_lower_rhs({900.0, 1e4}), std::domain_error);  // > lambda0 u = 858
}

TEST(GUpper, Values) {
    EXPECT_NEAR(g_upper({0.0, 1e6}), 2.35906581657827436, 1e-13);
    const double k = 1.0 / 3.0, u = 1e5, m = 1e4;
    // exp(m^2/4ku) = e^750 overflows; compare in log form.
    EXPECT_NEAR(log_g_upper({m, u}), std::log(7.0) + m * m / (4 * k * u) - std::log(std::log(std::sqrt(k * u))), 1e-12);
}

TEST(GUpper, BothCasesFiniteAtSplit) {
    const double k = 1.0 / 3.0, u = 1e6;
    const double split = 2.0 * k / kE2 * u;
    const double first = log_g_upper({split, u});
    const double second = log_g_upper({std::nextafter(split, 1e300), u});
    EXPECT_TRUE(std::isfinite(first));
    EXPECT_TRUE(std::isfinite(second));
    const double a1 = 2 * k * u / (split + 2 * std::sqrt(k * u));
    const double a2 = std::sqrt(k * u);
    EXPECT_NEAR(std::exp(first - second), 15.0 / 7.0 * std::log(a2) / std::log(a1), 1e-9);
}

TEST(GUpper, DomainError) { EXPECT_THROW(g_upper({0.0, 2.0}), std::domain_error); }

TEST(RefinedRhs, ClampFloor) {
    // sqrt(u) < e: all log+ terms are 1 for v = 1.
    const double m = 0.5, u = 4.0;
    const double expected = std::exp(m * m / (2 * u)) / kE2 / std::max(1.0, iter_log_plus(1, u / m));
    EXPECT_NEAR(refined_rhs({m, u}, 1), expected, 1e-15);
}

TEST(RefinedRhs, TermByTerm) {
    const double m = 50.0, u = 1e4;
    const double l = std::log(100.0);
    const double expected = std::exp(0.125) / (kE2 * std::max(l * l, std::log(u / m)));
    EXPECT_NEAR(refined_rhs({m, u}, 1), expected, 1e-15);
    EXPECT_THROW(refined_rhs({0.0, u}, 1), std::domain_error);
}

TEST(RefinedRhs, HoldsForSmallMLevelOne) {
    // Inside |m| <= 2 sqrt(u) the refined lower bound holds with margin.
    for (double u : {1e4, 1e6, 1e8})
        for (double f : {0.1, 0.5, 1.0}) {
            const MomentPoint p{2.0 * f * std::sqrt(u), u};
            EXPECT_GT(log_mixture_integral_super(p, MixtureDensity(1)).log_value, log_refined_rhs(p, 1));
        }
}

TEST(RefinedRhs, FailsForLargeMLevelOne) {
    // A documented counterexample: at u = 1e6, m = u / e^2 (the edge of the
    // v = 1 support) the mixed moment falls below the refined bound.
    const MomentPoint p{1e6 / kE2, 1e6};
    const double gap = log_mixture_integral_super(p, MixtureDensity(1)).log_value - log_refined_rhs(p, 1);
    EXPECT_NEAR(gap, -0.2029550613732514, 1e-6);
    // The independent Simpson oracle agrees that the bound is violated.
    const double oracle = log_simpson_super_v1(p.m, p.u, p.m * p.m / (2.0 * p.u));
    EXPECT_NEAR(oracle - log_refined_rhs(p, 1), gap, 1e-6);
}

TEST(TwoPointMixture, DominatesOneSidedTerm) {
    const double l0 = lambda0_of(1.0 / 3.0);
    for (double u : {1.0, 1e2, 1e4, 1e6})
        for (double m : {-300.0, -1.0, 0.0, 2.0, 50.0, 700.0}) {
            const double two = 0.5 * (std::exp(l0 * m - l0 * l0 * u / 2) + std::exp(-l0 * m - l0 * l0 * u / 2));
            EXPECT_GE(two, 0.5 * std::exp(l0 * std::abs(m) - l0 * l0 * u / 2));
        }
}

TEST(SeriesBound, ValueAndBound) {
    auto s = series_bound_value();
    EXPECT_NEAR(s.partial, 0.457322854394500722, 1e-15);
    EXPECT_LT(s.tail_bound, 1e-80);
    EXPECT_LE(s.value(), 1.5);
}

TEST(Chebyshev, SpecExamples) {
    auto a = chebyshev_integral_check([](double x) { return x; }, [](double x) { return 1.0 / x; }, 1.0, 2.0);
    EXPECT_TRUE(a.holds);
    EXPECT_NEAR(a.lhs, 1.0, 1e-14);
    EXPECT_NEAR(a.rhs, 1.5 * std::log(2.0), 1e-14);

    auto b = chebyshev_integral_check([](double) { return 3.0; }, [](double) { return 2.0; }, 0.0, 1.0);
    EXPECT_TRUE(b.holds);
    EXPECT_NEAR(b.lhs, b.rhs, 1e-14);

    auto c = chebyshev_integral_check([](double x) { return std::exp(x); }, [](double x) { return std::exp(-x); },
                                      0.0, 1.0);
    EXPECT_TRUE(c.holds);
    EXPECT_NEAR(c.rhs, 1.08616126963048756, 1e-13);
}

TEST(Chebyshev, ReportsMonotonicityViolation) {
    auto r = chebyshev_integral_check([](double x) { return -x; }, [](double x) { return 1.0 / x; }, 1.0, 2.0);
    EXPECT_FALSE(r.monotone);
    EXPECT_FALSE(r.holds);
}
