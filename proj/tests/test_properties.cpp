#include <gtest/gtest.h>

#include "property_checks.hpp"

namespace {

void expect_ok(const checks::Result& r) { EXPECT_TRUE(r.ok) << r.name << ": " << r.detail; }

}  // namespace

TEST(Properties, PermutationInvariance) { expect_ok(checks::permutation_invariance()); }
TEST(Properties, SignInvariance) { expect_ok(checks::sign_invariance()); }
TEST(Properties, HanovaLocationScaleInvariance) { expect_ok(checks::hanova_location_scale_invariance()); }
TEST(Properties, KMonotonicity) { expect_ok(checks::k_monotonicity()); }
TEST(Properties, PartialSelectionMatchesSort) { expect_ok(checks::partial_selection_matches_sort()); }
TEST(Properties, DeterminismUnderParallelism) { expect_ok(checks::determinism_under_parallelism()); }
TEST(Properties, OrderStatisticNearNormal) { expect_ok(checks::order_statistic_ks()); }
TEST(Properties, ExpOrderStatisticNearNormal) { expect_ok(checks::exp_order_statistic_ks()); }
