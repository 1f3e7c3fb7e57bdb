#pragma once

#include <cmath>

namespace orderthresh::detail {

/// Root of value(x) = target for an increasing function on [lo, hi], by Newton
/// steps that fall back to bisection whenever a step would leave the bracket.
/// Iterates until the step is below ~2 ulp of x or 200 iterations.
template <class Value, class Slope>
double solve_increasing(Value value, Slope slope, double target, double lo, double hi,
                        double start) {
  double x = (start > lo && start < hi) ? start : 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double residual = value(x) - target;
    if (residual == 0.0) return x;
    if (residual < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double d = slope(x);
    double next = (d > 0.0 && std::isfinite(d)) ? x - residual / d : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::fabs(next - x);
    x = next;
    if (step <= 4e-16 * std::fabs(x) || hi - lo <= 4e-16 * std::fabs(x)) break;
  }
  return x;
}

}  // namespace orderthresh::detail
