#include "orderthresh/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "orderthresh/errors.hpp"
#include "root_finding.hpp"

namespace orderthresh {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxSeriesTerms = 100000;

// Logarithm of the common prefactor x^a e^{-x} / Gamma(a).
double log_gamma_prefactor(double a, double x) {
  return a * std::log(x) - x - std::lgamma(a);
}

// P(a, x) by its power series; valid and fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int i = 0; i < kMaxSeriesTerms; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return std::exp(std::log(sum) + log_gamma_prefactor(a, x));
}

// Q(a, x) by the modified Lentz continued fraction; valid for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxSeriesTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(std::log(h) + log_gamma_prefactor(a, x));
}

// Continued fraction for the incomplete beta function.
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxSeriesTerms; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h;
}

// Abramowitz & Stegun 26.2.23 starting point for the lower-tail quantile.
double lower_tail_normal_guess(double p) {
  const double t = std::sqrt(-2.0 * std::log(p));
  const double num = 2.515517 + t * (0.802853 + t * 0.010328);
  const double den = 1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308));
  return -(t - num / den);
}

}  // namespace

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double std_normal_cdf(double x) {
  detail::require(std::isfinite(x), "std_normal_cdf: argument must be finite");
  const double tail = 0.5 * std::erfc(std::fabs(x) / std::numbers::sqrt2);
  return x < 0.0 ? tail : 1.0 - tail;
}

double std_normal_sf(double x) {
  detail::require(std::isfinite(x), "std_normal_sf: argument must be finite");
  return std_normal_cdf(-x);
}

double std_normal_quantile(double p) {
  detail::require(p > 0.0 && p < 1.0, "std_normal_quantile: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  // Solve in the lower tail, where Phi keeps full relative precision.
  const double lower = p < 0.5 ? p : 1.0 - p;
  const double x = detail::solve_increasing(
      [](double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }, std_normal_pdf, lower,
      -40.0, 0.0, lower_tail_normal_guess(lower));
  return p < 0.5 ? x : -x;
}

double gamma_p(double a, double x) {
  detail::require(a > 0.0, "gamma_p: shape must be positive");
  detail::require(x >= 0.0, "gamma_p: argument must be nonnegative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_continued_fraction(a, x);
}

double gamma_q(double a, double x) {
  detail::require(a > 0.0, "gamma_q: shape must be positive");
  detail::require(x >= 0.0, "gamma_q: argument must be nonnegative");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_continued_fraction(a, x);
}

double incomplete_beta(double a, double b, double x) {
  detail::require(a > 0.0 && b > 0.0, "incomplete_beta: shapes must be positive");
  detail::require(x >= 0.0 && x <= 1.0, "incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double chisq_cdf(double y, double df) {
  detail::require(df > 0.0, "chisq_cdf: df must be positive");
  detail::require(y >= 0.0, "chisq_cdf: y must be nonnegative");
  return gamma_p(0.5 * df, 0.5 * y);
}

double chisq_sf(double y, double df) {
  detail::require(df > 0.0, "chisq_sf: df must be positive");
  detail::require(y >= 0.0, "chisq_sf: y must be nonnegative");
  return gamma_q(0.5 * df, 0.5 * y);
}

double chisq1_pdf(double y) {
  detail::require(y > 0.0, "chisq1_pdf: y must be positive");
  return std::exp(-0.5 * y) / std::sqrt(2.0 * std::numbers::pi * y);
}

double chisq1_sf(double y) {
  detail::require(y >= 0.0, "chisq1_sf: y must be nonnegative");
  return std::erfc(std::sqrt(0.5 * y));
}

double chisq1_quantile_from_survival(double q) {
  detail::require(q > 0.0 && q <= 1.0, "chisq1_quantile_from_survival: q must lie in (0, 1]");
  if (q == 1.0) return 0.0;
  // P(Y > y) = 2 Phi(-sqrt(y)), so sqrt(y) = -Phi^{-1}(q / 2).
  const double z = std_normal_quantile(0.5 * q);
  return z * z;
}

double noncentral_chisq1_pdf(double y, double lambda) {
  detail::require(y > 0.0, "noncentral_chisq1_pdf: y must be positive");
  detail::require(lambda >= 0.0, "noncentral_chisq1_pdf: lambda must be nonnegative");
  if (lambda == 0.0) return chisq1_pdf(y);

  // sum_k (lambda y / 4)^k / (k! Gamma(k + 1/2))
  const double z = 0.25 * lambda * y;
  double term = std::numbers::inv_sqrtpi;
  double sum = term;
  for (int k = 0; k < 1000; ++k) {
    const double ratio = z / ((k + 1.0) * (k + 0.5));
    term *= ratio;
    sum += term;
    if (ratio < 1.0 && term < 1e-15 * sum) break;
  }
  return std::exp(-0.5 * (y + lambda)) / std::sqrt(2.0 * y) * sum;
}

double noncentral_chisq1_cdf(double y, double lambda) {
  detail::require(y >= 0.0, "noncentral_chisq1_cdf: y must be nonnegative");
  detail::require(lambda >= 0.0, "noncentral_chisq1_cdf: lambda must be nonnegative");
  if (y == 0.0) return 0.0;
  if (lambda == 0.0) return chisq_cdf(y, 1.0);

  const double half = 0.5 * lambda;
  double weight = std::exp(-half);
  double used_weight = 0.0;
  double sum = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double g = chisq_cdf(y, 2.0 * k + 1.0);
    const double term = weight * g;
    sum += term;
    used_weight += weight;
    // Remaining terms are bounded by the unused Poisson mass times g.
    if (k + 1 > half && (term < 1e-15 * sum || (1.0 - used_weight) * g < 1e-15 * sum)) break;
    weight *= half / (k + 1.0);
  }
  return sum;
}

double f_sf(double f, double d1, double d2) {
  detail::require(d1 > 0.0 && d2 > 0.0, "f_sf: degrees of freedom must be positive");
  detail::require(f >= 0.0, "f_sf: f must be nonnegative");
  if (f == 0.0) return 1.0;
  return incomplete_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f));
}

double f_quantile_upper(double q, double d1, double d2) {
  detail::require(q > 0.0 && q < 1.0, "f_quantile_upper: q must lie in (0, 1)");
  double hi = 1.0;
  while (f_sf(hi, d1, d2) > q) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f_sf(mid, d1, d2) > q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace orderthresh
