#include "orderthresh/hanova.hpp"

#include <cmath>

#include "orderthresh/calibration.hpp"
#include "orderthresh/errors.hpp"
#include "orderthresh/special_functions.hpp"

namespace orderthresh {

GroupedData GroupedData::summarize(const std::vector<std::vector<double>>& rows) {
  detail::require(rows.size() >= 2, "hanova: need at least two groups");
  const std::size_t n = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * n);
  for (const auto& row : rows) {
    if (row.size() != n) throw UnsupportedError("hanova: unbalanced layouts are not supported");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return summarize(flat, rows.size(), n);
}

GroupedData GroupedData::summarize(std::span<const double> values, std::size_t a, std::size_t n) {
  detail::require(a >= 2, "hanova: need at least two groups");
  detail::require(n >= 2, "hanova: need at least two observations per group");
  detail::require(values.size() == a * n, "hanova: matrix size does not match a x n");

  GroupedData g;
  g.a_ = a;
  g.n_ = n;
  g.means_.resize(a);
  double sse = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < a; ++i) {
    const auto row = values.subspan(i * n, n);
    double s = 0.0;
    for (double x : row) s += x;
    const double m = s / static_cast<double>(n);
    for (double x : row) sse += (x - m) * (x - m);
    g.means_[i] = m;
    total += m;
  }
  g.grand_mean_ = total / static_cast<double>(a);

  double between = 0.0;
  for (double m : g.means_) between += (m - g.grand_mean_) * (m - g.grand_mean_);
  g.mst_ = static_cast<double>(n) * between / static_cast<double>(a - 1);
  g.mse_ = sse / static_cast<double>(a * n - a);
  if (!(g.mse_ > 0.0)) throw DegenerateDataError("hanova: zero within-group variance (MSE = 0)");
  return g;
}

std::vector<double> studentized_effects(const GroupedData& g) {
  const double scale = std::sqrt(static_cast<double>(g.per_group()) / g.mse());
  std::vector<double> z(g.groups());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = scale * (g.group_means()[i] - g.grand_mean());
  return z;
}

HanovaOutcome hanova_outcome(double statistic, std::size_t a, std::size_t n, std::size_t k,
                             double alpha, NullVariance variance) {
  detail::require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  detail::require(n >= 2, "hanova: need at least two observations per group");
  const auto table = cached_calibration(a, k);
  const double aa = static_cast<double>(a);
  HanovaOutcome out;
  out.statistic = statistic;
  out.standardized = (statistic - aa * table->mu) / std::sqrt(aa * table->sigma2);
  const double ratio2 =
      variance == NullVariance::kSaturatedRatio ? 0.5 : table->mu * table->mu / table->sigma2;
  out.null_variance = 1.0 + 2.0 * ratio2 / static_cast<double>(n - 1);
  const double scaled = out.standardized / std::sqrt(out.null_variance);
  out.p_value = std_normal_sf(scaled);
  out.reject = scaled > std_normal_quantile(1.0 - alpha);
  out.k_used = k;
  return out;
}

HanovaOutcome hanova_order_test(const GroupedData& g, std::size_t k, double alpha,
                                NullVariance variance) {
  detail::require(k >= 1 && k <= g.groups(), "hanova_order_test: k must lie in [1, a]");
  auto z = studentized_effects(g);
  for (double& v : z) v *= v;
  return hanova_outcome(top_k_sum(z, k), g.groups(), g.per_group(), k, alpha, variance);
}

std::vector<double> hanova_pvalues(const GroupedData& g) {
  return pvalues_from_normals(studentized_effects(g));
}

std::size_t hanova_storey_k(const GroupedData& g) { return storey_k_hat(hanova_pvalues(g)); }

TestOutcome f_test(const GroupedData& g, double alpha) {
  detail::require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  const double d1 = static_cast<double>(g.groups() - 1);
  const double d2 = static_cast<double>(g.groups() * (g.per_group() - 1));
  TestOutcome out;
  out.statistic = g.f_stat();
  out.standardized = g.f_stat();
  out.reference = Reference::kFisherF;
  out.b = d1;
  out.nu = d2;
  out.p_value = f_sf(g.f_stat(), d1, d2);
  out.reject = out.p_value < alpha;
  out.alpha = alpha;
  return out;
}

}  // namespace orderthresh
