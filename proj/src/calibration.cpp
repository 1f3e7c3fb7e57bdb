#include "orderthresh/calibration.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <utility>

#include "orderthresh/errors.hpp"
#include "orderthresh/special_functions.hpp"

namespace orderthresh {
namespace {

void check_order_args(std::size_t n, std::size_t k) {
  detail::require(n >= 1, "calibration: n must be positive");
  detail::require(k >= 1 && k <= n, "calibration: k must lie in [1, n]");
}

// H and H' evaluated at every nu_tilde for one n. Shared by all k.
struct ExtremeProfile {
  std::vector<double> nu;
  std::vector<double> h;
  std::vector<double> h_prime;
};

ExtremeProfile make_profile(std::size_t n, std::size_t first) {
  ExtremeProfile p;
  p.nu = nu_tilde(n);
  p.h.assign(n, 0.0);
  p.h_prime.assign(n, 0.0);
  for (std::size_t i = first; i < n; ++i) {
    p.h[i] = h_tilde(p.nu[i]);
    p.h_prime[i] = std::exp(-p.nu[i]) / chisq1_pdf(p.h[i]);
  }
  return p;
}

CalibrationTable table_from_profile(const ExtremeProfile& p, std::size_t n, std::size_t k) {
  CalibrationTable t;
  t.n = n;
  t.k = k;
  t.nu_tilde = p.nu;
  t.alpha.assign(n, 0.0);

  const std::size_t cut = n - k;  // 0-based index of the first selected order statistic
  double suffix = 0.0;
  double mu_sum = 0.0;
  for (std::size_t i = n; i-- > cut;) {
    suffix += p.h_prime[i];
    mu_sum += p.h[i];
    t.alpha[i] = suffix / static_cast<double>(n - i);
  }
  for (std::size_t i = 0; i < cut; ++i) t.alpha[i] = suffix / static_cast<double>(n - i);

  double sq = 0.0;
  for (double a : t.alpha) sq += a * a;
  t.mu = mu_sum / static_cast<double>(n);
  t.sigma2 = sq / static_cast<double>(n);
  return t;
}

template <class Key, class Value>
class SharedCache {
 public:
  template <class Make>
  std::shared_ptr<const Value> get(const Key& key, Make make) {
    {
      std::shared_lock lock(mutex_);
      if (auto it = map_.find(key); it != map_.end()) return it->second;
    }
    auto value = std::make_shared<const Value>(make());
    std::unique_lock lock(mutex_);
    return map_.try_emplace(key, std::move(value)).first->second;
  }

 private:
  std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const Value>> map_;
};

SharedCache<std::size_t, ExtremeProfile>& profile_cache() {
  static SharedCache<std::size_t, ExtremeProfile> cache;
  return cache;
}

SharedCache<std::pair<std::size_t, std::size_t>, CalibrationTable>& table_cache() {
  static SharedCache<std::pair<std::size_t, std::size_t>, CalibrationTable> cache;
  return cache;
}

}  // namespace

std::vector<double> nu_tilde(std::size_t n) {
  detail::require(n >= 1, "nu_tilde: n must be positive");
  std::vector<double> nu(n);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    acc += 1.0 / static_cast<double>(n - j);
    nu[j] = acc;
  }
  return nu;
}

double h_tilde(double v) {
  detail::require(v > 0.0, "h_tilde: v must be positive");
  return chisq1_quantile_from_survival(std::exp(-v));
}

double h_tilde_prime(double v) {
  detail::require(v > 0.0, "h_tilde_prime: v must be positive");
  return std::exp(-v) / chisq1_pdf(h_tilde(v));
}

std::vector<double> order_weights(std::size_t n, std::size_t k) {
  return make_calibration_table(n, k).alpha;
}

OrderMoments order_moments(std::size_t n, std::size_t k) {
  const auto t = make_calibration_table(n, k);
  return {t.mu, t.sigma2};
}

CalibrationTable make_calibration_table(std::size_t n, std::size_t k) {
  check_order_args(n, k);
  return table_from_profile(make_profile(n, n - k), n, k);
}

std::shared_ptr<const CalibrationTable> cached_calibration(std::size_t n, std::size_t k) {
  check_order_args(n, k);
  return table_cache().get({n, k}, [n, k] {
    const auto profile = profile_cache().get(n, [n] { return make_profile(n, 0); });
    return table_from_profile(*profile, n, k);
  });
}

std::vector<double> exp_weights(std::size_t n, std::size_t k) {
  check_order_args(n, k);
  std::vector<double> w(n, 1.0);
  for (std::size_t j = 0; j < n - k; ++j) w[j] = static_cast<double>(k) / static_cast<double>(n - j);
  return w;
}

double recommended_delta(std::size_t n, double c, double d) {
  detail::require(n >= 3, "recommended_delta: n must be at least 3");
  detail::require(c > 0.0, "recommended_delta: c must be positive");
  const double ln = std::log(static_cast<double>(n));
  return 2.0 * (ln + std::log(c) - d * std::log(ln));
}

HardMoments hard_moments(std::size_t n, double delta) {
  detail::require(delta > 0.0, "hard_moments: delta must be positive");
  const double c = std::sqrt(delta);
  const double tail = std_normal_sf(c);
  const double dens = std_normal_pdf(c);
  const double m1 = 2.0 * (c * dens + tail);
  const double m2 = 2.0 * ((c * c * c + 3.0 * c) * dens + 3.0 * tail);
  const double nn = static_cast<double>(n);
  return {delta, nn * m1, nn * (m2 - m1 * m1), 2.0 * nn * tail};
}

HardMoments hard_moments_asymptotic(std::size_t n, double delta) {
  detail::require(delta > 0.0, "hard_moments_asymptotic: delta must be positive");
  const double c = std::sqrt(delta);
  const double scale = 2.0 * static_cast<double>(n) * std_normal_pdf(c);
  return {delta, scale * (c + 1.0 / c), scale * (c * c * c + 3.0 * c), scale / c};
}

LimitRatio limit_ratio(double r) {
  detail::require(r > 0.0 && r <= 1.0, "limit_ratio: r must lie in (0, 1]");
  const double xi = chisq1_quantile_from_survival(r);

  // Integrate over u with x = u^2, where F(u^2) = erf(u / sqrt 2) is smooth.
  // sigma_r^2 = 2 int_{xi<x<y} F(x) (1 - F(y)) dx dy, folded into one pass by
  // carrying the running inner integral A(y) = int_xi^y F(x) dx.
  constexpr int kIntervals = 20000;
  constexpr double kUpper = 12.0;
  const double u0 = std::sqrt(xi);
  const double h = (kUpper - u0) / kIntervals;

  auto point = [&](int i) {
    const double u = u0 + h * i;
    const double w = std::erfc(u / std::numbers::sqrt2);
    return std::pair{2.0 * u * (1.0 - w), 2.0 * u * w};  // (F dx/du, (1-F) dx/du)
  };

  double inner = 0.0;
  double tail_area = 0.0;
  double outer = 0.0;
  auto [f_prev, s_prev] = point(0);
  double outer_prev = 0.0;
  for (int i = 1; i <= kIntervals; ++i) {
    auto [f_cur, s_cur] = point(i);
    inner += 0.5 * h * (f_prev + f_cur);
    tail_area += 0.5 * h * (s_prev + s_cur);
    const double outer_cur = s_cur * inner;
    outer += 0.5 * h * (outer_prev + outer_cur);
    f_prev = f_cur;
    s_prev = s_cur;
    outer_prev = outer_cur;
  }
  return {r, r * xi + tail_area, 2.0 * outer};
}

}  // namespace orderthresh
