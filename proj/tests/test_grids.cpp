#include <gtest/gtest.h>

#include "lil/grids.hpp"

using namespace lil;

TEST(Grids, DocumentedShapes) {
    GridConfig c;
    EXPECT_EQ(lower_bound_grid(c).size(), 100u);
    EXPECT_EQ(g_upper_grid(c).size(), 100u);
    EXPECT_EQ(refined_grid(c, 1).size(), 100u);
    EXPECT_EQ(refined_grid(c, 2).size(), 100u);
    BoundarySpec s;
    const double l0 = lambda0(s);
    for (auto p : lower_bound_grid(c)) {
        EXPECT_GT(p.m, 0.0);
        EXPECT_LE(p.m, l0 * p.u * (1 + 1e-15));
        EXPECT_GE(p.u, tau0_threshold(s));
        EXPECT_LE(p.u, 1e8);
    }
}

TEST(Grids, LowerBoundHoldsEverywhere) {
    auto g = check_lower_bound_grid();
    EXPECT_EQ(g.violations, 0);
    EXPECT_EQ(g.failures, 0);
    EXPECT_LT(g.max_rel_error, 1e-8);
    EXPECT_TRUE(g.passed());
}

TEST(Grids, GUpperHoldsInBothCases) {
    auto g = check_g_upper_grid();
    EXPECT_TRUE(g.passed()) << g.violations << " violations, worst " << g.worst_log_slack;
    int first = 0, second = 0;
    for (const auto& r : g.rows) (r.point.m <= 2.0 / (3.0 * kE2) * r.point.u ? first : second)++;
    EXPECT_GT(first, 0);
    EXPECT_GT(second, 0);
}

TEST(Grids, RefinedLevelTwoHolds) { EXPECT_TRUE(check_refined_grid(2).passed()); }

TEST(Grids, RefinedLevelOneFailsOutsideSmallM) {
    auto g = check_refined_grid(1);
    EXPECT_GT(g.violations, 0);
    EXPECT_EQ(g.small_m_violations, 0);
    EXPECT_GT(g.small_m_points, 0);
    EXPECT_LT(g.max_rel_error, 1e-8);
}

TEST(Grids, CorruptionHookProducesViolations) {
    GridConfig c;
    c.corrupt_log_shift = 5.0;
    EXPECT_FALSE(check_lower_bound_grid(c).passed());
    EXPECT_FALSE(check_g_upper_grid(c).passed());
}

TEST(Grids, UnitMass) {
    for (int v = 1; v <= 3; ++v) EXPECT_TRUE(check_unit_mass(v).passed());
}

TEST(Grids, InvalidConfig) {
    GridConfig c;
    c.delta = 0.0;
    EXPECT_THROW(check_lower_bound_grid(c), std::invalid_argument);
}
