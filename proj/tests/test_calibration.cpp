#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oracles/oracles.hpp"
#include "orderthresh/calibration.hpp"
#include "orderthresh/errors.hpp"
#include "orderthresh/rng.hpp"
#include "orderthresh/single_sequence.hpp"

using namespace orderthresh;

namespace {

struct Summary {
  double mean;
  double var;
  double mean_se;
  double var_se;
};

Summary summarize(const std::vector<double>& v) {
  const double m = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / m;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : v) {
    const double d = (x - mean) * (x - mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= m;
  m4 /= m;
  return {mean, m2 * m / (m - 1), std::sqrt(m2 / m), std::sqrt((m4 - m2 * m2) / m)};
}

std::vector<double> null_top_sums(std::size_t n, std::size_t k, std::size_t reps, std::uint64_t seed) {
  std::vector<double> out(reps);
  std::vector<double> x(n);
  std::vector<double> y(n);
  for (std::size_t r = 0; r < reps; ++r) {
    VariateStream stream(seed, r);
    stream.fill_normal(x);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * x[i];
    out[r] = top_k_sum(y, k);
  }
  return out;
}

}  // namespace

TEST(NuTilde, SmallCase) {
  const auto nu = nu_tilde(3);
  ASSERT_EQ(nu.size(), 3u);
  EXPECT_NEAR(nu[0], 1.0 / 3, 1e-15);
  EXPECT_NEAR(nu[1], 1.0 / 3 + 0.5, 1e-15);
  EXPECT_NEAR(nu[2], 1.0 / 3 + 0.5 + 1.0, 1e-15);
}

TEST(NuTilde, MatchesDirectSum) {
  for (std::size_t n : {1u, 7u, 100u, 500u, 2000u}) {
    const auto got = nu_tilde(n);
    const auto want = oracle::nu_tilde(n);
    EXPECT_DOUBLE_EQ(got.front(), 1.0 / n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(got[i], static_cast<double>(want[i]), 1e-13) << n << " " << i;
  }
  EXPECT_NEAR(nu_tilde(500).back(), 6.79282, 5e-6);
  EXPECT_THROW(nu_tilde(0), DomainError);
}

TEST(HTilde, MedianLimitAndMonotone) {
  EXPECT_NEAR(h_tilde(std::log(2.0)), 0.454936, 1e-6);
  EXPECT_NEAR(h_tilde(std::log(2.0)), static_cast<double>(oracle::chisq1_quantile_sf(0.5L)), 1e-13);
  EXPECT_LT(h_tilde(1e-12), 1e-20);
  const double at30 = h_tilde_prime(30.0);
  EXPECT_GT(at30, 1.9);
  EXPECT_LT(at30, 2.0);
  double prev_h = 0.0;
  double prev_hp = 0.0;
  for (double v = 0.01; v < 40; v *= 1.3) {
    EXPECT_GT(h_tilde(v), prev_h) << v;
    EXPECT_GT(h_tilde_prime(v), prev_hp) << v;
    prev_h = h_tilde(v);
    prev_hp = h_tilde_prime(v);
  }
  EXPECT_THROW(h_tilde(0.0), DomainError);
  EXPECT_THROW(h_tilde_prime(-1.0), DomainError);
}

TEST(HTilde, DerivativeMatchesOracle) {
  for (double v : {0.05, 0.5, 1.0, 3.0, 6.79, 12.0}) {
    const double want = static_cast<double>(oracle::h_prime(v));
    EXPECT_NEAR(h_tilde_prime(v) / want, 1.0, 1e-12) << v;
  }
}

TEST(OrderWeights, TwoPointExample) {
  const auto nu = nu_tilde(2);
  const auto a = order_weights(2, 2);
  EXPECT_NEAR(a[0], (h_tilde_prime(nu[0]) + h_tilde_prime(nu[1])) / 2, 1e-15);
  EXPECT_NEAR(a[1], h_tilde_prime(nu[1]), 1e-15);
  EXPECT_THROW(order_weights(5, 0), DomainError);
  EXPECT_THROW(order_weights(5, 6), DomainError);
}

TEST(OrderWeights, AgreesWithDoubleLoopForAllSmallN) {
  double worst = 0.0;
  for (std::size_t n = 1; n <= 200; ++n) {
    const auto nu = nu_tilde(n);
    std::vector<long double> hp(n);
    for (std::size_t j = 0; j < n; ++j) hp[j] = h_tilde_prime(nu[j]);
    for (std::size_t k = 1; k <= n; ++k) {
      const auto got = order_weights(n, k);
      const auto want = oracle::order_weights(n, k, hp);
      for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, static_cast<double>(std::fabs(got[i] - want[i])));
      }
    }
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(OrderWeights, NondecreasingAndLargeCase) {
  const std::size_t n = 500;
  const std::size_t k = 22;
  const auto nu = nu_tilde(n);
  std::vector<long double> hp(n);
  for (std::size_t j = 0; j < n; ++j) hp[j] = h_tilde_prime(nu[j]);
  const auto got = order_weights(n, k);
  const auto want = oracle::order_weights(n, k, hp);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(got[i], static_cast<double>(want[i]), 1e-12);
  for (std::size_t i = 1; i < n; ++i) EXPECT_GE(got[i], got[i - 1]) << i;
}

TEST(OrderMoments, MatchDefinition) {
  for (auto [n, k] : {std::pair<std::size_t, std::size_t>{50, 7}, {200, 14}, {500, 22}, {500, 500}}) {
    const auto nu = nu_tilde(n);
    const auto alpha = order_weights(n, k);
    long double mu = 0;
    long double s2 = 0;
    for (std::size_t i = n - k; i < n; ++i) mu += h_tilde(nu[i]);
    for (double a : alpha) s2 += static_cast<long double>(a) * a;
    const auto got = order_moments(n, k);
    EXPECT_NEAR(got.mu, static_cast<double>(mu / n), 1e-12 * got.mu);
    EXPECT_NEAR(got.sigma2, static_cast<double>(s2 / n), 1e-12 * got.sigma2);
  }
}

TEST(OrderMoments, StrictlyIncreasingInK) {
  for (std::size_t n : {30u, 500u}) {
    auto prev = order_moments(n, 1);
    for (std::size_t k = 2; k <= n; ++k) {
      const auto cur = order_moments(n, k);
      EXPECT_GT(cur.mu, prev.mu) << n << " " << k;
      EXPECT_GT(cur.sigma2, prev.sigma2) << n << " " << k;
      prev = cur;
    }
  }
}

TEST(OrderMoments, FullSumTendsToChiSquareMean) {
  EXPECT_LT(std::fabs(order_moments(2000, 2000).mu - 1.0), 0.01);
  const auto one = order_moments(10, 1);
  EXPECT_TRUE(std::isfinite(one.mu));
  EXPECT_GT(one.sigma2, 0.0);
}

TEST(OrderMoments, NullMeanAndVarianceMatchSimulation) {
  std::uint64_t seed = 11;
  for (auto [n, k] : {std::pair<std::size_t, std::size_t>{200, 14}, {500, 22}, {500, 500}}) {
    const auto sums = null_top_sums(n, k, 30000, seed++);
    const auto s = summarize(sums);
    const auto m = order_moments(n, k);
    EXPECT_NEAR(s.mean, n * m.mu, 4 * s.mean_se) << n << " " << k;
    EXPECT_NEAR(s.var, n * m.sigma2, 4 * s.var_se) << n << " " << k;
  }
}

TEST(CalibrationTable, CachedMatchesFresh) {
  const auto fresh = make_calibration_table(300, 17);
  const auto a = cached_calibration(300, 17);
  const auto b = cached_calibration(300, 17);
  EXPECT_EQ(a.get(), b.get());
  EXPECT_EQ(a->mu, fresh.mu);
  EXPECT_EQ(a->sigma2, fresh.sigma2);
  EXPECT_EQ(a->alpha, fresh.alpha);
  EXPECT_EQ(a->nu_tilde, fresh.nu_tilde);
}

TEST(ExpWeights, Examples) {
  const auto w = exp_weights(5, 2);
  const std::vector<double> want = {2.0 / 5, 2.0 / 4, 2.0 / 3, 1.0, 1.0};
  ASSERT_EQ(w.size(), want.size());
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_DOUBLE_EQ(w[i], want[i]);
  EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 3.5667, 5e-5);
  for (double x : exp_weights(9, 9)) EXPECT_EQ(x, 1.0);
  EXPECT_THROW(exp_weights(4, 5), DomainError);
}

TEST(ExpWeights, CenteringMatchesSimulatedMean) {
  const std::size_t n = 200;
  const std::size_t k = 20;
  const auto w = exp_weights(n, k);
  const double centre = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<double> sums(100000);
  std::vector<double> v(n);
  for (std::size_t r = 0; r < sums.size(); ++r) {
    VariateStream stream(5, r);
    stream.fill_exponential(v);
    sums[r] = top_k_sum(v, k);
  }
  const auto s = summarize(sums);
  EXPECT_NEAR(s.mean, centre, 4 * s.mean_se);
}

TEST(RecommendedDelta, Examples) {
  EXPECT_NEAR(recommended_delta(500, 1.0, 2.0), 5.1216, 5e-5);
  EXPECT_NEAR(recommended_delta(200, 1.0, 2.0), 3.9271, 5e-5);
  EXPECT_NEAR(recommended_delta(1000, 1.0, 0.0), 2 * std::log(1000.0), 1e-12);
  EXPECT_THROW(recommended_delta(2, 1.0, 2.0), DomainError);
  EXPECT_THROW(recommended_delta(100, 0.0, 2.0), DomainError);
}

TEST(HardMoments, MatchQuadrature) {
  for (double delta : {0.5, 2.0, 3.1216, 5.1216, 9.0, 15.0}) {
    const auto h = hard_moments(1, delta);
    const double m0 = static_cast<double>(oracle::truncated_moment(0, delta));
    const double m1 = static_cast<double>(oracle::truncated_moment(1, delta));
    const double m2 = static_cast<double>(oracle::truncated_moment(2, delta));
    EXPECT_NEAR(h.expected_count, m0, 1e-9) << delta;
    EXPECT_NEAR(h.mean_total, m1, 1e-9) << delta;
    EXPECT_NEAR(h.var_total, m2 - m1 * m1, 1e-9) << delta;
  }
  EXPECT_THROW(hard_moments(10, 0.0), DomainError);
}

TEST(HardMoments, ExpectedCounts) {
  EXPECT_NEAR(hard_moments(500, 5.1216).expected_count, 11.81, 0.05);
  EXPECT_NEAR(hard_moments(500, 3.1216).expected_count, 38.63, 0.05);
}

TEST(HardMoments, MatchSimulation) {
  const std::size_t n = 500;
  const double delta = 5.1216;
  std::vector<double> stats(100000);
  std::vector<double> x(n);
  std::vector<double> y(n);
  for (std::size_t r = 0; r < stats.size(); ++r) {
    VariateStream stream(23, r);
    stream.fill_normal(x);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * x[i];
    stats[r] = hard_threshold_statistic(y, delta);
  }
  const auto s = summarize(stats);
  const auto h = hard_moments(n, delta);
  EXPECT_NEAR(s.mean, h.mean_total, 4 * s.mean_se);
  EXPECT_NEAR(s.var, h.var_total, 4 * s.var_se);
}

TEST(HardMoments, AsymptoticApproachesExactForLargeDelta) {
  const auto exact = hard_moments(1000, 40.0);
  const auto approx = hard_moments_asymptotic(1000, 40.0);
  EXPECT_NEAR(approx.mean_total / exact.mean_total, 1.0, 5e-3);
  EXPECT_NEAR(approx.var_total / exact.var_total, 1.0, 5e-3);
}

TEST(LimitRatio, FullRange) {
  const auto l = limit_ratio(1.0);
  EXPECT_NEAR(l.mu_r, 1.0, 1e-3);
  EXPECT_NEAR(l.sigma_r2, 2.0, 1e-3);
  EXPECT_NEAR(l.mu_r / std::sqrt(l.sigma_r2), 1.0 / std::sqrt(2.0), 1e-3);
  EXPECT_THROW(limit_ratio(0.0), DomainError);
  EXPECT_THROW(limit_ratio(1.5), DomainError);
}

TEST(LimitRatio, MatchesTruncatedMomentForm) {
  for (double r : {0.01, 0.05, 0.2, 0.5, 0.8, 1.0}) {
    const auto got = limit_ratio(r);
    const auto want = oracle::limit_closed_form(r);
    EXPECT_NEAR(got.mu_r / static_cast<double>(want.mu), 1.0, 1e-4) << r;
    EXPECT_NEAR(got.sigma_r2 / static_cast<double>(want.sigma2), 1.0, 1e-4) << r;
  }
  EXPECT_LT(limit_ratio(1e-6).mu_r, 1e-3);
}

TEST(LimitRatio, AgreesWithFiniteCalibration) {
  const auto lim = limit_ratio(0.5);
  const auto fin = order_moments(4000, 2000);
  EXPECT_NEAR(fin.mu, lim.mu_r, 1e-2);
  EXPECT_NEAR(fin.sigma2, lim.sigma_r2, 1e-2);
}
