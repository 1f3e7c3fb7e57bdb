#pragma once

// One-way ANOVA with many groups: X_ij ~ N(theta_i, sigma^2), i = 1..a,
// j = 1..n (balanced). The order threshold statistic sums the k largest
// squared studentized effects and is referred to a normal whose variance is
// inflated by the estimation of sigma^2.

#include <cstddef>
#include <span>
#include <vector>

#include "orderthresh/single_sequence.hpp"

namespace orderthresh {

class GroupedData {
 public:
  /// Balanced layout from one row per group. Throws UnsupportedError for
  /// ragged rows, DomainError for a < 2 or n < 2, and DegenerateDataError
  /// when every group is constant (MSE = 0).
  static GroupedData summarize(const std::vector<std::vector<double>>& rows);

  /// Row-major a x n matrix.
  static GroupedData summarize(std::span<const double> values, std::size_t a, std::size_t n);

  std::size_t groups() const { return a_; }
  std::size_t per_group() const { return n_; }
  const std::vector<double>& group_means() const { return means_; }
  double grand_mean() const { return grand_mean_; }
  double mst() const { return mst_; }
  double mse() const { return mse_; }
  double f_stat() const { return mst_ / mse_; }

 private:
  std::size_t a_ = 0;
  std::size_t n_ = 0;
  std::vector<double> means_;
  double grand_mean_ = 0.0;
  double mst_ = 0.0;
  double mse_ = 0.0;
};

/// Ratio mu / sigma used in the null variance 1 + 2 (mu / sigma)^2 / (n - 1).
enum class NullVariance {
  kSaturatedRatio,  ///< the k = a limit, (mu / sigma)^2 = 1/2, for every k
  kPlugInRatio,     ///< the finite-a calibration constants of the chosen k
};

struct HanovaOutcome {
  double statistic = 0.0;      ///< sum of the k largest squared studentized effects
  double standardized = 0.0;   ///< (statistic - a mu) / (sqrt(a) sigma)
  double null_variance = 1.0;  ///< 1 + 2 (mu / sigma)^2 / (n - 1)
  double p_value = 1.0;
  bool reject = false;
  std::size_t k_used = 0;
};

/// sqrt(n) (mean_i - grand mean) / sqrt(MSE) for each group.
std::vector<double> studentized_effects(const GroupedData& g);

HanovaOutcome hanova_order_test(const GroupedData& g, std::size_t k, double alpha,
                                NullVariance variance = NullVariance::kSaturatedRatio);

/// Standardization of a precomputed statistic (shared with the simulation engine).
HanovaOutcome hanova_outcome(double statistic, std::size_t a, std::size_t n, std::size_t k,
                             double alpha, NullVariance variance = NullVariance::kSaturatedRatio);

/// 2 (1 - Phi(|Z_i|)) with Z_i the studentized effects.
std::vector<double> hanova_pvalues(const GroupedData& g);

/// storey_k_hat applied to hanova_pvalues.
std::size_t hanova_storey_k(const GroupedData& g);

/// Classical F test against F(a - 1, a(n - 1)).
TestOutcome f_test(const GroupedData& g, double alpha);

}  // namespace orderthresh
