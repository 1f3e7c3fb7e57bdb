#pragma once

// Distribution functions used by the order thresholding statistics.
//
// Every function is pure and thread-safe. Arguments outside the documented
// domain raise orderthresh::DomainError.

namespace orderthresh {

/// Standard normal density.
double std_normal_pdf(double x);

/// Standard normal distribution function. Evaluated symmetrically so that
/// std_normal_cdf(-x) is the complement of std_normal_cdf(x) to rounding.
double std_normal_cdf(double x);

/// Upper tail 1 - Phi(x), accurate far into the tail.
double std_normal_sf(double x);

/// Inverse of std_normal_cdf on (0, 1).
double std_normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed
/// directly (no cancellation) when x is large.
double gamma_q(double a, double x);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Chi-square distribution function with (possibly non-integer) df.
double chisq_cdf(double y, double df);

/// Chi-square upper tail probability.
double chisq_sf(double y, double df);

/// Density of the central chi-square with one degree of freedom.
double chisq1_pdf(double y);

/// Upper tail of chi-square(1), 2 * (1 - Phi(sqrt(y))).
double chisq1_sf(double y);

/// The y with P(chi-square(1) > y) = q. Works from the survival probability
/// so that q down to ~1e-300 keeps full relative precision.
double chisq1_quantile_from_survival(double q);

/// Density of chi-square(1) with noncentrality lambda.
double noncentral_chisq1_pdf(double y, double lambda);

/// Distribution function of chi-square(1) with noncentrality lambda,
/// as the Poisson(lambda/2) mixture of central chi-square(2k+1) cdfs.
double noncentral_chisq1_cdf(double y, double lambda);

/// Snedecor F distribution upper tail P(F(d1, d2) > f).
double f_sf(double f, double d1, double d2);

/// Upper quantile: the f with f_sf(f, d1, d2) = q.
double f_quantile_upper(double q, double d1, double d2);

}  // namespace orderthresh
