#pragma once

// Deterministic centering and scaling constants for order threshold statistics.
//
// For Y_i iid chi-square(1), the sum of the k largest Y_i is standardized as
// (T - n mu) / (sqrt(n) sigma), where mu and sigma^2 come from the expected
// exponential order statistics nu_tilde_i = sum_{j<=i} 1/(n-j+1) pushed
// through H(v) = F^{-1}(1 - e^{-v}) and its derivative.

#include <cstddef>
#include <memory>
#include <vector>

namespace orderthresh {

/// Standardization constants for one (n, k) pair. Immutable once built.
struct CalibrationTable {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<double> nu_tilde;  ///< expected Exp(1) order statistics, increasing
  std::vector<double> alpha;     ///< L-statistic weights alpha_in(k)
  double mu = 0.0;               ///< mean of T / n
  double sigma2 = 0.0;           ///< variance of T / n
};

/// Moments of the hard threshold statistic sum Y_i 1{Y_i > delta}.
struct HardMoments {
  double delta = 0.0;
  double mean_total = 0.0;
  double var_total = 0.0;
  double expected_count = 0.0;
};

/// Limits of mu and sigma^2 as k/n -> r.
struct LimitRatio {
  double r = 0.0;
  double mu_r = 0.0;
  double sigma_r2 = 0.0;
};

std::vector<double> nu_tilde(std::size_t n);

/// H(v) = F^{-1}(1 - e^{-v}) with F the chi-square(1) cdf.
double h_tilde(double v);

/// H'(v) = e^{-v} / f(H(v)).
double h_tilde_prime(double v);

/// alpha_in(k) for i = 1..n (stored 0-based), via suffix sums of H'(nu_tilde).
std::vector<double> order_weights(std::size_t n, std::size_t k);

struct OrderMoments {
  double mu = 0.0;
  double sigma2 = 0.0;
};

OrderMoments order_moments(std::size_t n, std::size_t k);

/// Full table for (n, k). Built from scratch; see calibration_cache() for reuse.
CalibrationTable make_calibration_table(std::size_t n, std::size_t k);

/// Process-wide cache of calibration tables keyed by (n, k). Population is
/// idempotent and safe under concurrent callers; returned tables are shared.
std::shared_ptr<const CalibrationTable> cached_calibration(std::size_t n, std::size_t k);

/// Weights of the exponential-data representation: k/(n-j+1) for j <= n-k, else 1.
std::vector<double> exp_weights(std::size_t n, std::size_t k);

/// delta_n = 2 log(n c (log n)^{-d}).
double recommended_delta(std::size_t n, double c, double d);

/// Exact moments of sum Y_i 1{Y_i > delta} for n iid chi-square(1) observations.
HardMoments hard_moments(std::size_t n, double delta);

/// Mills-ratio (large-delta) approximations of the same moments, i.e. the
/// classical centering sqrt(2/pi) a^{-1} delta^{1/2} (1 + 1/delta) and scaling
/// sqrt(2/pi) a^{-1} delta^{3/2} (1 + 3/delta) with n a = e^{delta/2}.
HardMoments hard_moments_asymptotic(std::size_t n, double delta);

/// mu_r = int_{1-r}^1 G^{-1}(t) dt and
/// sigma_r^2 = int int_{t,s>1-r} (min(t,s) - ts) dG^{-1}(t) dG^{-1}(s), by quadrature.
LimitRatio limit_ratio(double r);

}  // namespace orderthresh
