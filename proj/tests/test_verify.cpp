#include <gtest/gtest.h>

#include "lil/verify.hpp"

using namespace lil;

TEST(Verify, ExhaustiveCountsAreBinomial) {
    const auto c = exhaustive_plus_counts(10);
    ASSERT_EQ(c.size(), 11u);
    const std::uint64_t expected[] = {1, 10, 45, 120, 210, 252, 210, 120, 45, 10, 1};
    for (int j = 0; j <= 10; ++j) EXPECT_EQ(c[j], expected[j]);
    EXPECT_EQ(exhaustive_plus_counts(0), std::vector<std::uint64_t>{1});
}

TEST(Verify, MomentFromCountsHandValues) {
    // t = 1: |M| = 1 surely, so the moment is exp(lambda - lambda^2/2).
    EXPECT_NEAR(moment_from_counts(exhaustive_plus_counts(1), 0.3), std::exp(0.3 - 0.045), 1e-15);
    // t = 2: |M| in {0, 2} with probabilities 1/2 each.
    EXPECT_NEAR(moment_from_counts(exhaustive_plus_counts(2), 0.5), 0.5 * std::exp(-0.25) + 0.5 * std::exp(0.75),
                1e-15);
    EXPECT_EQ(moment_from_counts(exhaustive_plus_counts(0), 1.0), 1.0);
}

TEST(Verify, SolverCertificatesCoverFiftyTriples) {
    const auto st = solver_certificates(certificate_families(), certificate_u_values(), certificate_deltas());
    EXPECT_EQ(st.triples, 50);
    EXPECT_EQ(st.lil_bound + st.lln_bound, 50);
    EXPECT_EQ(st.violations, 0);
    EXPECT_LE(st.max_rel_residual, 1e-9);
}

TEST(Verify, CertificateCatchesLooseTolerance) {
    // A negative tolerance can never be met, so every iterated-log triple
    // must be reported.
    const auto st = solver_certificates(certificate_families(), certificate_u_values(), certificate_deltas(), -1.0);
    EXPECT_EQ(st.violations, st.lil_bound);
}

TEST(Verify, AntiCertificatesAtDefaultConstantsClampToZero) {
    const auto s = anti_certificate_suite({1000, 100000}, {0.05});
    EXPECT_TRUE(s.passed);
    EXPECT_NE(s.summary.find("2 clamped to 0"), std::string::npos) << s.summary;
    const auto x = anti_certificate_suite({10000, 100000}, {0.5}, 1e-6);
    EXPECT_TRUE(x.passed);
    EXPECT_NE(x.summary.find("2 interior"), std::string::npos) << x.summary;
}

TEST(Verify, GridSuiteSummarizesViolations) {
    GridConfig c;
    c.n_u = 2;
    c.corrupt_log_shift = 1e6;
    const auto s = grid_suite(check_g_upper_grid(c));
    EXPECT_FALSE(s.passed);
    EXPECT_NE(s.summary.find("violations (5 of 5 with"), std::string::npos) << s.summary;
}

TEST(Verify, SmallSuitesPass) {
    EXPECT_TRUE(inequality_suite(1000).passed);
    EXPECT_TRUE(series_suite().passed);
    EXPECT_TRUE(exact_moment_suite(12).passed);
    EXPECT_TRUE(one_step_suite(5000, 3).passed);
    for (const auto& s : optional_stopping_suites(2000, 2000, 4)) EXPECT_TRUE(s.passed) << s.summary;
}
