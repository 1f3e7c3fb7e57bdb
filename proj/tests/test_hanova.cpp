#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oracles/oracles.hpp"
#include "orderthresh/calibration.hpp"
#include "orderthresh/errors.hpp"
#include "orderthresh/hanova.hpp"
#include "orderthresh/rng.hpp"
#include "orderthresh/special_functions.hpp"

using namespace orderthresh;

namespace {

std::vector<std::vector<double>> grouped(std::size_t a, std::size_t n, std::uint64_t seed, double effect = 0.0) {
  std::vector<std::vector<double>> rows(a, std::vector<double>(n));
  VariateStream stream(seed, 0);
  for (std::size_t i = 0; i < a; ++i) {
    stream.fill_normal(rows[i]);
    if (i < a / 10) {
      for (double& v : rows[i]) v += effect;
    }
  }
  return rows;
}

std::vector<std::vector<double>> affine(std::vector<std::vector<double>> rows, double c, double d) {
  for (auto& r : rows) {
    for (double& v : r) v = c * v + d;
  }
  return rows;
}

// Finite-a centering and scaling for squares of N(t / sqrt(a), 1) variates,
// built directly from the noncentral chi-square(1) distribution.
struct NoncentralConstants {
  double mu;
  double sigma2;
};

double noncentral_upper_quantile(double q, double lambda) {
  double lo = 0.0;
  double hi = 200.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - noncentral_chisq1_cdf(mid, lambda) > q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

NoncentralConstants noncentral_constants(std::size_t a, std::size_t k, double lambda) {
  const auto nu = oracle::nu_tilde(a);
  std::vector<long double> g(a);
  long double mu = 0;
  for (std::size_t j = 0; j < a; ++j) {
    const double q = std::exp(-static_cast<double>(nu[j]));
    const double h = noncentral_upper_quantile(q, lambda);
    g[j] = q / noncentral_chisq1_pdf(h, lambda);
    if (j >= a - k) mu += h;
  }
  const auto alpha = oracle::order_weights(a, k, g);
  long double s2 = 0;
  for (auto w : alpha) s2 += w * w;
  return {static_cast<double>(mu / a), static_cast<double>(s2 / a)};
}

// Two-observation groups whose studentized effects have the given two-sided
// p-values. Consecutive pairs get opposite signs, so p must come in equal pairs.
std::vector<std::vector<double>> rows_with_pvalues(const std::vector<double>& p) {
  std::vector<std::vector<double>> rows(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double z = std_normal_quantile(1 - p[i] / 2) * (i % 2 == 0 ? 1 : -1);
    rows[i] = {z + 1.0, z - 1.0};  // MSE = 2, so Z_i = z
  }
  return rows;
}

}  // namespace

TEST(GroupedData, Degenerate) {
  EXPECT_THROW(GroupedData::summarize({{0.0, 0.0}, {0.0, 0.0}}), DegenerateDataError);
  EXPECT_THROW(GroupedData::summarize({{1.0, 1.0}, {3.0, 3.0}}), DegenerateDataError);
  EXPECT_THROW(GroupedData::summarize({{1.0, 2.0}, {3.0}}), UnsupportedError);
  EXPECT_THROW(GroupedData::summarize({{1.0, 2.0}}), DomainError);
  EXPECT_THROW(GroupedData::summarize({{1.0}, {2.0}}), DomainError);
}

TEST(GroupedData, HandComputedF) {
  const auto g = GroupedData::summarize({{1.0, 1.0002}, {3.0, 2.9998}});
  // Means 1.0001 and 2.9999, grand mean 2.
  const double mst = 2 * (0.9999 * 0.9999 + 0.9999 * 0.9999) / 1;
  const double mse = (2 * 0.0001 * 0.0001 + 2 * 0.0001 * 0.0001) / 2;
  EXPECT_NEAR(g.mst() / mst, 1.0, 1e-9);
  EXPECT_NEAR(g.mse() / mse, 1.0, 1e-6);
  EXPECT_NEAR(g.f_stat() / (mst / mse), 1.0, 1e-6);
  EXPECT_EQ(g.groups(), 2u);
  EXPECT_EQ(g.per_group(), 2u);
}

TEST(GroupedData, RowMajorMatchesRows) {
  const auto rows = grouped(7, 4, 3);
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  const auto a = GroupedData::summarize(rows);
  const auto b = GroupedData::summarize(flat, 7, 4);
  EXPECT_EQ(a.f_stat(), b.f_stat());
  EXPECT_EQ(a.group_means(), b.group_means());
}

TEST(StudentizedEffects, SumOfSquaresIsScaledF) {
  for (auto [a, n] : {std::pair<std::size_t, std::size_t>{2, 2}, {10, 3}, {500, 3}, {1000, 5}}) {
    for (double effect : {0.0, 1.5}) {
      const auto g = GroupedData::summarize(grouped(a, n, a + n, effect));
      const auto z = studentized_effects(g);
      double s = 0.0;
      double lin = 0.0;
      for (double v : z) {
        s += v * v;
        lin += v;
      }
      EXPECT_NEAR(s / ((a - 1) * g.f_stat()), 1.0, 1e-10) << a << " " << n;
      EXPECT_NEAR(lin, 0.0, 1e-9 * std::sqrt(double(a)));
    }
  }
}

TEST(StudentizedEffects, EqualMeansGiveZero) {
  const auto g = GroupedData::summarize({{1.0, 3.0}, {3.0, 1.0}, {2.5, 1.5}});
  for (double z : studentized_effects(g)) EXPECT_NEAR(z, 0.0, 1e-15);
  for (double p : hanova_pvalues(g)) EXPECT_NEAR(p, 1.0, 1e-15);
}

TEST(HanovaOrder, FullSumIsScaledF) {
  const auto g = GroupedData::summarize(grouped(200, 4, 8, 0.7));
  const auto out = hanova_order_test(g, 200, 0.05);
  EXPECT_NEAR(out.statistic / (199 * g.f_stat()), 1.0, 1e-10);
  EXPECT_EQ(out.k_used, 200u);
}

TEST(HanovaOrder, StandardizationAndDecision) {
  const std::size_t a = 300;
  const std::size_t n = 3;
  const auto g = GroupedData::summarize(grouped(a, n, 21, 1.0));
  for (std::size_t k : {17u, 60u, 300u}) {
    for (auto v : {NullVariance::kSaturatedRatio, NullVariance::kPlugInRatio}) {
      const auto out = hanova_order_test(g, k, 0.05, v);
      const auto m = order_moments(a, k);
      EXPECT_NEAR(out.standardized, (out.statistic - a * m.mu) / (std::sqrt(double(a)) * std::sqrt(m.sigma2)), 1e-12);
      const double ratio2 = v == NullVariance::kSaturatedRatio ? 0.5 : m.mu * m.mu / m.sigma2;
      EXPECT_NEAR(out.null_variance, 1 + 2 * ratio2 / (n - 1), 1e-14);
      EXPECT_GE(out.null_variance, 1.0);
      EXPECT_NEAR(out.p_value, static_cast<double>(oracle::normal_sf(out.standardized / std::sqrt(out.null_variance))),
                  1e-14);
      EXPECT_EQ(out.reject, out.standardized > std::sqrt(out.null_variance) * std_normal_quantile(0.95));
    }
  }
  EXPECT_THROW(hanova_order_test(g, 0, 0.05), DomainError);
  EXPECT_THROW(hanova_order_test(g, a + 1, 0.05), DomainError);
}

TEST(HanovaOrder, NullVarianceShrinksWithGroupSize) {
  const auto out = hanova_outcome(100.0, 50, 101, 50, 0.05);
  EXPECT_NEAR(out.null_variance, 1.01, 1e-12);
  const auto lim = limit_ratio(1.0);
  EXPECT_NEAR(lim.mu_r * lim.mu_r / lim.sigma_r2, 0.5, 1e-3);
}

TEST(HanovaOrder, MonotoneInK) {
  const auto g = GroupedData::summarize(grouped(120, 3, 5, 0.5));
  double prev = 0.0;
  for (std::size_t k = 1; k <= 120; ++k) {
    const double s = hanova_order_test(g, k, 0.05).statistic;
    EXPECT_GE(s, prev);
    prev = s;
  }
}

TEST(Hanova, LocationAndScaleInvariance) {
  const auto rows = grouped(150, 4, 6, 0.8);
  const auto base = GroupedData::summarize(rows);
  const auto z0 = studentized_effects(base);
  const auto p0 = hanova_pvalues(base);
  for (auto [c, d] : {std::pair<double, double>{1.0, 17.0}, {-3.0, 0.0}, {0.25, -4.0}}) {
    const auto g = GroupedData::summarize(affine(rows, c, d));
    EXPECT_NEAR(g.f_stat() / base.f_stat(), 1.0, 1e-10);
    const auto z = studentized_effects(g);
    const auto p = hanova_pvalues(g);
    for (std::size_t i = 0; i < z.size(); ++i) {
      EXPECT_NEAR(z[i], (c > 0 ? 1 : -1) * z0[i], 1e-10);
      EXPECT_NEAR(p[i], p0[i], 1e-10);
    }
    const auto a = hanova_order_test(base, 20, 0.05);
    const auto b = hanova_order_test(g, 20, 0.05);
    EXPECT_NEAR(a.statistic, b.statistic, 1e-10 * a.statistic);
    EXPECT_NEAR(a.standardized, b.standardized, 1e-10);
    EXPECT_EQ(hanova_storey_k(base), hanova_storey_k(g));
  }
}

TEST(HanovaPValues, MatchEffects) {
  const auto g = GroupedData::summarize(grouped(40, 3, 9, 0.4));
  const auto z = studentized_effects(g);
  const auto p = hanova_pvalues(g);
  for (std::size_t i = 0; i < z.size(); ++i) {
    EXPECT_NEAR(p[i], static_cast<double>(2 * oracle::normal_sf(std::fabs(z[i]))), 1e-15);
  }
}

TEST(HanovaStorey, UniformLikeNullUsesLowerBound) {
  std::vector<double> p(1000);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = (i / 2 * 2 + 1.0) / p.size();
  const auto g = GroupedData::summarize(rows_with_pvalues(p));
  EXPECT_EQ(hanova_storey_k(g), 18u);
}

TEST(HanovaStorey, CountAboveBound) {
  // 520 of 1000 p-values at or below the median 0.5.
  std::vector<double> p;
  p.insert(p.end(), 498, 0.2);
  p.insert(p.end(), 22, 0.5);
  p.insert(p.end(), 480, 0.8);
  EXPECT_EQ(storey_k_hat(p), 38u);
  const auto g = GroupedData::summarize(rows_with_pvalues(p));
  const auto got = hanova_pvalues(g);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(got[i], p[i], 1e-12);
  EXPECT_EQ(hanova_storey_k(g), 38u);
}

TEST(FTest, MatchesReference) {
  const auto g = GroupedData::summarize(grouped(50, 4, 14, 0.6));
  const auto out = f_test(g, 0.05);
  EXPECT_EQ(out.statistic, g.f_stat());
  EXPECT_NEAR(out.p_value, f_sf(g.f_stat(), 49, 150), 1e-15);
  EXPECT_EQ(out.reject, out.p_value < 0.05);
}

TEST(NoncentralCalibration, SmallShiftStandardizedSumIsNearNormal) {
  const std::size_t a = 1000;
  const std::size_t k = 100;
  const double t = 3.0;
  const double lambda = t * t / a;
  const auto c0 = noncentral_constants(a, k, 0.0);
  const auto m0 = order_moments(a, k);
  EXPECT_NEAR(c0.mu / m0.mu, 1.0, 1e-6);
  EXPECT_NEAR(c0.sigma2 / m0.sigma2, 1.0, 1e-6);
  const auto ct = noncentral_constants(a, k, lambda);
  EXPECT_GT(ct.mu, c0.mu);
  std::vector<double> z(3000);
  std::vector<double> x(a);
  for (std::size_t r = 0; r < z.size(); ++r) {
    VariateStream(404, r).fill_normal(x);
    for (double& v : x) v = (v + t / std::sqrt(double(a))) * (v + t / std::sqrt(double(a)));
    std::nth_element(x.begin(), x.begin() + (a - k), x.end());
    const double s = std::accumulate(x.begin() + (a - k), x.end(), 0.0);
    z[r] = (s - a * ct.mu) / (std::sqrt(double(a)) * std::sqrt(ct.sigma2));
  }
  EXPECT_LT(oracle::ks_to_normal(z), 0.035);
}
