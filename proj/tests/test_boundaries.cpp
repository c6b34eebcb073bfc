#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>

#include "lil/boundaries.hpp"

using namespace lil;

namespace {

BoundarySpec spec_of(Family f, double delta = 0.05) {
    BoundarySpec s;
    s.family = f;
    s.delta = delta;
    return s;
}

// Oracle values below come from an independent 30-digit evaluation.
constexpr double kRel = 1e-12;

}  // namespace

TEST(Lambda0, ClosedFormValues) {
    EXPECT_NEAR(lambda0_of(1.0 / 3.0), 0.0857991315436501605, kRel);
    EXPECT_NEAR(lambda0_of(0.25), 0.0902235221577417946, kRel);
    for (double k : {1e-9, 0.1, 0.5, 0.999}) EXPECT_LT(lambda0_of(k), 1.0 / kE2);
}

TEST(Lambda0, DomainErrors) {
    EXPECT_THROW(lambda0_of(0.0), std::domain_error);
    EXPECT_THROW(lambda0_of(1.0), std::domain_error);
    EXPECT_THROW(lambda0_of(-0.5), std::domain_error);
}

TEST(BoundarySpec, ValidationRejectsOutOfRange) {
    BoundarySpec s;
    s.delta = 1.5;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = {};
    s.k = 1.0;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = {};
    s.v = 0;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = {};
    s.c1 = -1.0;
    EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Family, StringRoundTrip) {
    for (auto f : {Family::rademacher, Family::hoeffding, Family::bernstein, Family::generic, Family::anti,
                   Family::sharper})
        EXPECT_EQ(family_from_string(to_string(f)), f);
    EXPECT_THROW(family_from_string("gaussian"), std::invalid_argument);
}

TEST(Tau0, DefaultConstant) {
    auto s = spec_of(Family::generic);
    EXPECT_NEAR(tau0_threshold(s), 1190.526932753785, 1e-9);
    EXPECT_EQ(tau0_of(s, [](std::int64_t t) { return static_cast<double>(t); }), 1191);
}

TEST(Tau0, Constant173) {
    auto s = spec_of(Family::hoeffding);
    s.hoeffding_c173 = true;
    EXPECT_NEAR(tau0_threshold(s), 173.0 * std::log(80.0), 1e-12);
    EXPECT_EQ(tau0_of(s, [](std::int64_t t) { return static_cast<double>(t); }), 759);
}

TEST(Tau0, DeltaNearOneStillPositive) {
    auto s = spec_of(Family::generic, 0.999999);
    const double thr = tau0_threshold(s);
    EXPECT_GT(thr, 0.0);
    EXPECT_NEAR(thr, 2.0 / std::pow(lambda0(s), 2) * std::log(4.0 / 0.999999), 1e-9);
    const auto t0 = tau0_of(s, [](std::int64_t t) { return static_cast<double>(t); });
    EXPECT_GE(t0, 1);
    EXPECT_GE(static_cast<double>(t0), thr);
    EXPECT_LT(static_cast<double>(t0 - 1), thr);
}

TEST(Tau0, NonlinearSchedule) {
    auto s = spec_of(Family::bernstein);
    auto sched = [](std::int64_t t) { return bernstein_proxy(static_cast<double>(t)); };
    const auto t0 = tau0_of(s, sched);
    EXPECT_GE(sched(t0), tau0_threshold(s));
    EXPECT_LT(sched(t0 - 1), tau0_threshold(s));
}

TEST(LlnBoundary, Values) {
    auto s = spec_of(Family::generic);
    EXPECT_NEAR(lln_boundary(s, {1191.0}), 102.186765668487341, 1e-11);
    EXPECT_EQ(lln_boundary(s, {0.0}), 0.0);
    EXPECT_NEAR(lln_boundary(s, {1e4}), 857.991315436501605, 1e-10);
}

TEST(Residual, RademacherExample) {
    EXPECT_NEAR(boundary_residual(spec_of(Family::rademacher), {1000.0}, 150.0), 18.5731248356912074, 1e-11);
}

TEST(Residual, VacuousClauseIsPlusInfinity) {
    // 5t/(2m) <= e  <=>  m >= 5t/(2e)
    const double m = 5.0 * 1000.0 / (2.0 * kE);
    EXPECT_TRUE(std::isinf(boundary_residual(spec_of(Family::rademacher), {1000.0}, m)));
    EXPECT_GT(boundary_residual(spec_of(Family::rademacher), {1000.0}, m), 0.0);
}

TEST(Residual, GenericExample) {
    EXPECT_NEAR(boundary_residual(spec_of(Family::generic), {1e4}, 300.0), -146.230355603128222, 1e-10);
}

TEST(Residual, DomainErrors) {
    EXPECT_THROW(boundary_residual(spec_of(Family::generic), {1e4}, 0.0), std::domain_error);
    EXPECT_THROW(boundary_residual(spec_of(Family::generic), {0.0}, 1.0), std::domain_error);
    EXPECT_THROW(boundary_residual(spec_of(Family::anti), {1e4}, 1.0), std::invalid_argument);
}

TEST(FixedPoint, RademacherUnconstrained) {
    auto fp = lil_fixed_point(spec_of(Family::rademacher), {1000.0});
    ASSERT_TRUE(fp);
    EXPECT_NEAR(*fp, 132.413198741533681, 1e-9);
    EXPECT_LE(std::abs(boundary_residual(spec_of(Family::rademacher), {1000.0}, *fp)), 1e-9 * *fp);
}

TEST(SolveBoundary, LlnBindsAtSmallU) {
    // The unconstrained fixed point 132.41 exceeds lambda0 * 1000 = 85.80.
    auto r = solve_boundary(spec_of(Family::rademacher), {1000.0});
    EXPECT_EQ(r.binding_clause, Clause::lln);
    EXPECT_NEAR(r.radius, lambda0_of(1.0 / 3.0) * 1000.0, 1e-12);
}

TEST(SolveBoundary, BernsteinFixedPoint) {
    const double u = bernstein_proxy(1e4);
    auto r = solve_boundary(spec_of(Family::bernstein), {u});
    EXPECT_EQ(r.binding_clause, Clause::lil);
    EXPECT_NEAR(r.radius, 521.760367015259779, 1e-8);
    EXPECT_LE(r.radius, lambda0_of(1.0 / 3.0) * u);
}

TEST(SolveBoundary, FixedPointCertificate) {
    for (auto f : {Family::rademacher, Family::hoeffding, Family::bernstein, Family::generic, Family::sharper})
        for (double u : {1e4, 1e6, 1e9})
            for (double d : {0.01, 0.05, 0.2}) {
                auto s = spec_of(f, d);
                auto r = solve_boundary(s, {u});
                ASSERT_LE(r.radius, lambda0(s) * u * (1 + 1e-15));
                if (r.binding_clause == Clause::lil) {
                    const double rhs = *lil_rhs(s, u, r.radius);
                    EXPECT_LE(std::abs(r.radius - rhs), 1e-9 * r.radius) << to_string(f) << " u=" << u;
                } else {
                    EXPECT_LE(boundary_residual(s, {u}, r.radius), 0.0);
                }
            }
}

TEST(SolveBoundary, ClauseConsistency) {
    for (auto f : {Family::rademacher, Family::generic, Family::bernstein})
        for (double u : {1200.0, 3000.0, 1e4, 1e6}) {
            auto s = spec_of(f);
            const bool lil_inside = boundary_residual(s, {u}, lambda0(s) * u) > 0.0;
            EXPECT_EQ(solve_boundary(s, {u}).binding_clause == Clause::lil, lil_inside);
        }
}

TEST(SolveBoundary, MonotoneInDeltaAndU) {
    for (auto f : {Family::rademacher, Family::generic, Family::bernstein, Family::sharper}) {
        double prev = 0.0;
        for (double u = 1200.0; u < 1e9; u *= 1.7) {
            const double r = solve_boundary(spec_of(f), {u}).radius;
            EXPECT_GE(r, prev) << to_string(f) << " u=" << u;
            prev = r;
        }
        for (double u : {2e3, 1e5, 1e8}) {
            EXPECT_GE(solve_boundary(spec_of(f, 0.01), {u}).radius, solve_boundary(spec_of(f, 0.05), {u}).radius);
            EXPECT_GE(solve_boundary(spec_of(f, 0.05), {u}).radius, solve_boundary(spec_of(f, 0.3), {u}).radius);
        }
    }
}

TEST(SolveBoundary, BelowExplicitCorollary) {
    for (double d : {0.01, 0.05, 0.2})
        for (std::int64_t t = 1191; t < 100000000; t = t * 3 / 2) {
            const double solved = solve_boundary(spec_of(Family::rademacher, d), {static_cast<double>(t)}).radius;
            EXPECT_LE(solved, std::max(explicit_rademacher_boundary(t, d), 1.0));
        }
}

TEST(SolveBoundary, RejectsNonPositiveU) {
    EXPECT_THROW(solve_boundary(spec_of(Family::generic), {0.0}), std::domain_error);
}

TEST(ExplicitRademacher, Values) {
    EXPECT_NEAR(explicit_rademacher_boundary(1000, 0.05), 153.002775278856150, 1e-10);
    EXPECT_NEAR(explicit_rademacher_boundary(1, 0.5), 1.906398, 1e-6);
    EXPECT_GT(explicit_rademacher_boundary(10000, 0.05), explicit_rademacher_boundary(1000, 0.05));
    EXPECT_GE(explicit_rademacher_boundary(1, 0.99), 1.0);
}

TEST(InitialSegment, Values) {
    EXPECT_NEAR(initial_segment_bound(spec_of(Family::generic)), 85.9887364299771549, 1e-11);
    EXPECT_NEAR(initial_segment_bound(spec_of(Family::generic, 2.0 / kE)), 2.0 / lambda0_of(1.0 / 3.0), 1e-12);
    EXPECT_NEAR(initial_segment_bound(spec_of(Family::generic, 0.01)), 123.505151421084649, 1e-11);
}

TEST(Stitched, PiecesAndSwitch) {
    auto s = spec_of(Family::generic);
    EXPECT_EQ(stitched_boundary(s, {0.0}), initial_segment_bound(s));
    const double thr = tau0_threshold(s);
    EXPECT_EQ(stitched_boundary(s, {thr}), solve_boundary(s, {thr}).radius);
    EXPECT_EQ(stitched_boundary(s, {std::nextafter(thr, 0.0)}), initial_segment_bound(s));
    EXPECT_EQ(stitched_boundary(s, {1e6}), solve_boundary(s, {1e6}).radius);
    for (double u = 0.0; u < 1e7; u = u * 2 + 1) EXPECT_TRUE(std::isfinite(stitched_boundary(s, {u})));
}

TEST(Anti, RhsAndFixedPoint) {
    auto rhs = anti_rhs(1e6, 0.001, 0.0, kDefaultC1);
    ASSERT_TRUE(rhs);
    EXPECT_NEAR(*rhs, 990.898885822760134, 1e-9);
    const double m = solve_anti(1000000, 0.001, kDefaultC1);
    EXPECT_NEAR(m, 956.761796758850771, 1e-8);
    EXPECT_LE(std::abs(anti_boundary_residual(1000000, 0.001, m, kDefaultC1)), 1e-9 * m);
}

TEST(Anti, WindowIsEmptyAtDeskScale) {
    auto w = anti_window(1000000, 0.05, kDefaultC1);
    EXPECT_NEAR(w.lower, 0.314542133611302124, 1e-12);
    EXPECT_NEAR(w.upper, 0.000685941043083900, 1e-15);
    EXPECT_TRUE(w.empty());
    EXPECT_FALSE(w.contains_delta);
}

TEST(Anti, NegativeRadicandClampsToZero) {
    // At the default constants ln(1/(C1 delta)) dominates for moderate t.
    auto rhs = anti_rhs(1e4, 0.05, 10.0, kDefaultC1);
    ASSERT_TRUE(rhs);
    EXPECT_EQ(*rhs, 0.0);
}

TEST(Anti, SmallTIsDomainError) {
    EXPECT_THROW(anti_boundary_residual(3, 0.05, 0.0, kDefaultC1), std::domain_error);
}

TEST(SigmaDelta, Value) { EXPECT_NEAR(sigma_delta(0.05), 604.217981669687742, 1e-10); }

TEST(Sharper, Values) {
    EXPECT_NEAR(sharper_boundary(1e6, std::nullopt, 0.05, 1), 4371.30848189556791, 1e-8);
    const double v1 = sharper_boundary(1e12, std::nullopt, 0.05, 1);
    const double v2 = sharper_boundary(1e12, std::nullopt, 0.05, 2);
    EXPECT_LT(v2, v1);
    EXPECT_TRUE(std::isfinite(sharper_boundary(2.0, std::nullopt, 0.05, 2)));
    EXPECT_THROW(sharper_boundary(0.0, std::nullopt, 0.05, 1), std::domain_error);
}

TEST(Sharper, BelowGenericRadiusAtLargeU) {
    auto s = spec_of(Family::sharper);
    s.v = 2;
    const double sharper = solve_boundary(s, {1e12}).radius;
    const double generic = solve_boundary(spec_of(Family::generic), {1e12}).radius;
    EXPECT_NEAR(sharper, 4541953.626, 1e-2);
    EXPECT_NEAR(generic, 5145302.800, 1e-2);
    EXPECT_LT(sharper, generic);
}
