#include "orderthresh/single_sequence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include "orderthresh/calibration.hpp"
#include "orderthresh/errors.hpp"
#include "orderthresh/kernels.hpp"
#include "orderthresh/special_functions.hpp"

namespace orderthresh {

struct ObservationVector::Squares {
  std::once_flag once;
  std::vector<double> values;
};

ObservationVector::ObservationVector(std::vector<double> values)
    : values_(std::move(values)), squares_(std::make_shared<Squares>()) {}

std::span<const double> ObservationVector::squared() const {
  std::call_once(squares_->once, [this] {
    squares_->values.resize(values_.size());
    kernels::square(values_, squares_->values);
  });
  return squares_->values;
}

namespace {

void check_alpha(double alpha) {
  detail::require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
}

double ascending_sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

TestOutcome normal_outcome(double statistic, double z, double alpha) {
  TestOutcome out;
  out.statistic = statistic;
  out.standardized = z;
  out.reference = Reference::kStdNormal;
  out.p_value = std_normal_sf(z);
  out.reject = out.p_value < alpha;
  out.alpha = alpha;
  return out;
}

}  // namespace

double top_k_sum(std::span<const double> y, std::size_t k) {
  detail::require(k >= 1 && k <= y.size(), "top_k_sum: k must lie in [1, n]");
  std::vector<double> work(y.begin(), y.end());
  const auto cut = work.begin() + static_cast<std::ptrdiff_t>(work.size() - k);
  std::nth_element(work.begin(), cut, work.end());
  std::sort(cut, work.end());
  return ascending_sum({&*cut, k});
}

double top_k_sum_sorted(std::span<const double> sorted_ascending, std::size_t k) {
  detail::require(k >= 1 && k <= sorted_ascending.size(), "top_k_sum_sorted: k must lie in [1, n]");
  return ascending_sum(sorted_ascending.last(k));
}

double hard_threshold_statistic(std::span<const double> y, double delta) {
  detail::require(delta > 0.0, "hard threshold delta must be positive");
  std::vector<double> kept(y.size());
  kept.resize(kernels::active().compact_above(y.data(), y.size(), delta, kept.data()));
  std::sort(kept.begin(), kept.end());
  return ascending_sum(kept);
}

TestOutcome order_outcome(double statistic, std::size_t n, std::size_t k, double alpha,
                          Reference reference) {
  check_alpha(alpha);
  const auto table = cached_calibration(n, k);
  const double nn = static_cast<double>(n);
  const double z = (statistic - nn * table->mu) / std::sqrt(nn * table->sigma2);
  TestOutcome out;
  if (reference == Reference::kScaledChiSq) {
    out.statistic = statistic;
    out.standardized = z;
    out.reference = reference;
    out.b = table->sigma2 / (2.0 * table->mu);
    out.nu = 2.0 * nn * table->mu * table->mu / table->sigma2;
    out.p_value = chisq_sf(statistic / out.b, out.nu);
    out.reject = out.p_value < alpha;
    out.alpha = alpha;
  } else {
    detail::require(reference == Reference::kStdNormal, "order statistic: unsupported reference");
    out = normal_outcome(statistic, z, alpha);
  }
  out.k_used = k;
  return out;
}

TestOutcome hard_outcome(double statistic, std::size_t n, double delta, double alpha,
                         HardCentering centering) {
  check_alpha(alpha);
  const HardMoments m = centering == HardCentering::kExact ? hard_moments(n, delta)
                                                           : hard_moments_asymptotic(n, delta);
  return normal_outcome(statistic, (statistic - m.mean_total) / std::sqrt(m.var_total), alpha);
}

TestOutcome order_threshold_test(const ObservationVector& x, std::size_t k, double alpha) {
  detail::require(x.size() >= 1, "order_threshold_test: empty input");
  detail::require(k >= 1 && k <= x.size(), "order_threshold_test: k must lie in [1, n]");
  return order_outcome(top_k_sum(x.squared(), k), x.size(), k, alpha, Reference::kStdNormal);
}

TestOutcome order_threshold_test_chisq(const ObservationVector& x, std::size_t k, double alpha) {
  detail::require(x.size() >= 1, "order_threshold_test_chisq: empty input");
  detail::require(k >= 1 && k <= x.size(), "order_threshold_test_chisq: k must lie in [1, n]");
  return order_outcome(top_k_sum(x.squared(), k), x.size(), k, alpha, Reference::kScaledChiSq);
}

TestOutcome chisq_test(const ObservationVector& x, double alpha) {
  check_alpha(alpha);
  detail::require(x.size() >= 1, "chisq_test: empty input");
  const double n = static_cast<double>(x.size());
  const double t = top_k_sum(x.squared(), x.size());
  TestOutcome out;
  out.statistic = t;
  out.standardized = (t - n) / std::sqrt(2.0 * n);
  out.reference = Reference::kScaledChiSq;
  out.b = 1.0;
  out.nu = n;
  out.p_value = chisq_sf(t, n);
  out.reject = out.p_value < alpha;
  out.alpha = alpha;
  out.k_used = x.size();
  return out;
}

TestOutcome hard_threshold_test(const ObservationVector& x, double delta, double alpha,
                                HardCentering centering) {
  detail::require(delta > 0.0, "hard_threshold_test: delta must be positive");
  return hard_outcome(hard_threshold_statistic(x.squared(), delta), x.size(), delta, alpha,
                      centering);
}

TestOutcome simes_test(std::span<const double> pvalues, double alpha,
                       std::optional<std::size_t> k_opt) {
  check_alpha(alpha);
  const std::size_t n = pvalues.size();
  detail::require(n >= 1, "simes_test: no p-values");
  for (double p : pvalues) detail::require(p >= 0.0 && p <= 1.0, "simes_test: p-values must lie in [0, 1]");
  const std::size_t k0 = k_opt.value_or(0);
  detail::require(k0 < n, "simes_test: k_opt must be smaller than n");

  std::vector<double> sorted(pvalues.begin(), pvalues.end());
  std::sort(sorted.begin(), sorted.end());
  double stat = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    stat = std::min(stat, static_cast<double>(n) * sorted[i] / static_cast<double>(i + 1));
  }
  const double level = alpha / (1.0 - static_cast<double>(k0) / static_cast<double>(n));
  TestOutcome out;
  out.statistic = stat;
  out.standardized = stat;
  out.reference = Reference::kSimesMin;
  out.p_value = stat;
  out.reject = stat < level;
  out.alpha = level;
  return out;
}

std::vector<double> pvalues_from_normals(std::span<const double> x) {
  std::vector<double> p(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    p[i] = std::erfc(std::fabs(x[i]) / std::numbers::sqrt2);
  }
  return p;
}

double storey_count(std::span<const double> pvalues, double lambda) {
  detail::require(!pvalues.empty(), "storey_count: no p-values");
  detail::require(lambda >= 0.0 && lambda < 1.0, "storey_count: lambda must lie in [0, 1)");
  const double n = static_cast<double>(pvalues.size());
  const auto below = std::count_if(pvalues.begin(), pvalues.end(), [lambda](double p) { return p <= lambda; });
  return (static_cast<double>(below) - n * lambda - 1.0) / (1.0 - lambda);
}

std::size_t storey_k_hat(std::span<const double> pvalues) {
  const std::size_t n = pvalues.size();
  detail::require(n >= 1, "storey_k_hat: no p-values");
  std::vector<double> sorted(pvalues.begin(), pvalues.end());
  std::sort(sorted.begin(), sorted.end());
  const double lambda = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  const double bound = std::pow(std::log(static_cast<double>(n)), 1.5);
  const double estimate = lambda < 1.0 ? std::max(storey_count(pvalues, lambda), bound) : bound;
  const double rounded = std::nearbyint(estimate);
  return static_cast<std::size_t>(std::clamp(rounded, 1.0, static_cast<double>(n)));
}

TestOutcome order_threshold_test_data_driven(const ObservationVector& x, double alpha,
                                             Reference reference) {
  detail::require(x.size() >= 1, "order_threshold_test_data_driven: empty input");
  const std::size_t k = storey_k_hat(pvalues_from_normals(x.values()));
  return order_outcome(top_k_sum(x.squared(), k), x.size(), k, alpha, reference);
}

TestOutcome exp_order_threshold_test(std::span<const double> v, std::size_t k, double alpha) {
  check_alpha(alpha);
  const std::size_t n = v.size();
  detail::require(n >= 1, "exp_order_threshold_test: empty input");
  detail::require(k >= 1 && k <= n, "exp_order_threshold_test: k must lie in [1, n]");
  for (double x : v) detail::require(x >= 0.0, "exp_order_threshold_test: values must be nonnegative");
  const auto w = exp_weights(n, k);
  double sum = 0.0;
  double sq = 0.0;
  for (double a : w) {
    sum += a;
    sq += a * a;
  }
  const double t = top_k_sum(v, k);
  TestOutcome out = normal_outcome(t, (t - sum) / std::sqrt(sq), alpha);
  out.k_used = k;
  return out;
}

}  // namespace orderthresh
