#pragma once

// Global tests of H0: theta_1 = ... = theta_n = 0 from X_i ~ N(theta_i, 1):
// order thresholding (sum of the k largest X_i^2), hard thresholding, the
// chi-square omnibus, and Simes, plus the exponential-data order statistic.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace orderthresh {

enum class Reference {
  kStdNormal,    ///< p = 1 - Phi(standardized)
  kScaledChiSq,  ///< statistic / b ~ chi-square(nu)
  kSimesMin,     ///< statistic compared to an adjusted level directly
  kFisherF,      ///< statistic ~ F(b, nu)
};

struct TestOutcome {
  double statistic = 0.0;
  double standardized = 0.0;
  Reference reference = Reference::kStdNormal;
  double b = 0.0;   // scale (kScaledChiSq) or numerator df (kFisherF)
  double nu = 0.0;  // df (kScaledChiSq) or denominator df (kFisherF)
  double p_value = 1.0;  // the Simes statistic itself for kSimesMin
  bool reject = false;
  double alpha = 0.05;
  std::size_t k_used = 0;  // order statistics only; 0 otherwise
};

/// Observations X_i with the squares Y_i = X_i^2 derived on first use.
/// Copies share the (immutable) derived squares.
class ObservationVector {
 public:
  explicit ObservationVector(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<const double> squared() const;

 private:
  struct Squares;
  std::vector<double> values_;
  std::shared_ptr<Squares> squares_;
};

/// How the hard threshold statistic is centered and scaled.
enum class HardCentering {
  kExact,       ///< exact truncated chi-square(1) moments
  kAsymptotic,  ///< classical large-delta (Mills ratio) approximations
};

// Raw statistics. All sums run in ascending order of the summands, so the
// result depends only on the multiset of inputs.

/// Sum of the k largest entries, by partial selection.
double top_k_sum(std::span<const double> y, std::size_t k);

/// Sum of the last k entries of an ascending-sorted range; equals top_k_sum.
double top_k_sum_sorted(std::span<const double> sorted_ascending, std::size_t k);

/// sum y_i 1{y_i > delta}
double hard_threshold_statistic(std::span<const double> y, double delta);

// Tests.

TestOutcome order_threshold_test(const ObservationVector& x, std::size_t k, double alpha);

/// Same statistic, referred to b chi-square(nu) with b nu = n mu and 2 b^2 nu = n sigma^2.
TestOutcome order_threshold_test_chisq(const ObservationVector& x, std::size_t k, double alpha);

/// sum Y_i against its exact chi-square(n) null distribution.
TestOutcome chisq_test(const ObservationVector& x, double alpha);

TestOutcome hard_threshold_test(const ObservationVector& x, double delta, double alpha,
                                HardCentering centering = HardCentering::kAsymptotic);

/// Simes global test; with k_opt the level is raised to alpha / (1 - k_opt / n).
TestOutcome simes_test(std::span<const double> pvalues, double alpha,
                       std::optional<std::size_t> k_opt = std::nullopt);

/// Two-sided p-values 2 (1 - Phi(|x_i|)).
std::vector<double> pvalues_from_normals(std::span<const double> x);

/// (n G_n(lambda) - n lambda - 1) / (1 - lambda), G_n the empirical cdf.
double storey_count(std::span<const double> pvalues, double lambda);

/// Storey estimate of the number of false nulls with lambda = median p-value,
/// bounded below by log^{3/2} n, rounded to nearest and clamped to [1, n].
std::size_t storey_k_hat(std::span<const double> pvalues);

/// Order test at k = storey_k_hat(pvalues_from_normals(x)), on the same data.
TestOutcome order_threshold_test_data_driven(const ObservationVector& x, double alpha,
                                             Reference reference = Reference::kStdNormal);

/// Sum of the k largest of nonnegative (exponential-scale) values, standardized
/// by sum(alpha_E) and sqrt(sum(alpha_E^2)).
TestOutcome exp_order_threshold_test(std::span<const double> v, std::size_t k, double alpha);

// Standardization helpers shared with the simulation engine.

TestOutcome order_outcome(double statistic, std::size_t n, std::size_t k, double alpha,
                          Reference reference);
TestOutcome hard_outcome(double statistic, std::size_t n, double delta, double alpha,
                         HardCentering centering);

}  // namespace orderthresh
