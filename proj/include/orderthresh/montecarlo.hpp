#pragma once

// Seed-deterministic simulation of rejection rates. Replicate i of a study
// always draws from VariateStream(row_seed, i), and rejections are tallied as
// integers, so results are identical for any number of worker threads.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "orderthresh/single_sequence.hpp"

namespace orderthresh {

enum class ScenarioKind { kSingleSequence, kHanova };

/// Data-generating setting. Under H_r, theta_j = eta_{j+r-1} where eta is
/// zero beyond its listed support; an empty eta is the global null.
struct SimulationScenario {
  ScenarioKind kind = ScenarioKind::kSingleSequence;
  std::size_t n = 0;  ///< sequence length, or observations per group
  std::size_t a = 0;  ///< number of groups (HANOVA only)
  std::vector<double> eta;
  std::size_t shift_r = 1;
  std::string label = "null";

  /// Means theta_1..theta_m (m = n, or a for HANOVA). Requires
  /// 1 <= shift_r <= eta.size() + 1.
  std::vector<double> theta() const;
  /// Number of nonzero theta under this H_r.
  std::size_t k_opt() const;
  std::size_t dimension() const { return kind == ScenarioKind::kHanova ? a : n; }
};

SimulationScenario null_single(std::size_t n);
SimulationScenario null_hanova(std::size_t a, std::size_t n);

enum class StatKind {
  kOrder,                // T_L(k), normal reference
  kOrderChiSq,           // T_L(k), b chi-square(nu) reference
  kOrderDataDriven,      // T_L(k_hat), normal reference
  kOrderDataDrivenChiSq, // T_L(k_hat), b chi-square(nu) reference
  kHard,                 // T_H(delta), asymptotic centering
  kHardExact,            // T_H(delta), exact-moment centering
  kSimes,                // Simes at alpha / (1 - k_opt / n), k_opt from the scenario
  kChiSq,                // sum Y_i against chi-square(n)
  kHanovaOrder,          // HANOVA T~_L(k)
  kHanovaOrderPlugIn,    // HANOVA T~_L(k), plug-in null variance
  kHanovaDataDriven,     // HANOVA T~_L(k_hat)
  kFisherF,              // classical F test
};

struct StatisticSpec {
  StatKind kind = StatKind::kOrder;
  double parameter = 0.0;  ///< k or delta where applicable

  std::string label() const;
  bool applies_to(ScenarioKind kind) const;
};

/// Parse "order:22", "hard:5.1216", "simes", "order-khat", ... (see README).
StatisticSpec parse_statistic(const std::string& text);

struct StudyOptions {
  std::uint64_t replicates = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 0;  ///< 0 = all hardware threads
  double alpha = 0.05;
};

struct StudyRow {
  std::string scenario;
  std::string statistic;
  double parameter = 0.0;
  double rate = 0.0;
  std::uint64_t replicates = 0;
  std::uint64_t seed = 0;
  std::size_t k_opt = 0;  ///< nonzero means under the scenario

  /// Monte Carlo standard error sqrt(p (1 - p) / replicates).
  double se() const;
};

struct StudyResult {
  std::vector<StudyRow> rows;

  /// scenario,statistic,parameter,rate,replicates,se with 6 significant digits.
  std::string to_csv() const;
};

/// Rejection rates of every statistic in grid under one scenario.
StudyResult run_study(const SimulationScenario& scenario, std::span<const StatisticSpec> grid,
                      const StudyOptions& options);

/// Null rejection rates (the scenario's eta is ignored).
StudyResult run_type1_study(const SimulationScenario& dims, std::span<const StatisticSpec> grid,
                            const StudyOptions& options);

/// One block of rows per H_r, r in shifts (all r = 1..len(eta) when empty).
/// Each H_r uses its own seed derived from options.seed and r.
StudyResult run_power_study(const SimulationScenario& family, std::span<const StatisticSpec> grid,
                            const StudyOptions& options, std::span<const std::size_t> shifts = {});

/// Seed used for the block of replicates of H_r in run_power_study.
std::uint64_t shift_seed(std::uint64_t seed, std::size_t r);

/// Standardized statistic of every replicate, in replicate order.
std::vector<double> simulate_standardized(const SimulationScenario& scenario,
                                          const StatisticSpec& spec, const StudyOptions& options);

struct DensityPoint {
  double x = 0.0;
  double density = 0.0;
  double reference = 0.0;  ///< N(0, reference_variance) density
};

/// Silverman bandwidth 0.9 min(sd, IQR / 1.34) m^{-1/5}.
double silverman_bandwidth(std::span<const double> sample);

/// Gaussian kernel density estimate on 512 points spanning [min - 3h, max + 3h].
std::vector<DensityPoint> kernel_density(std::span<const double> sample, double reference_variance = 1.0);

struct DensityCurve {
  std::string statistic;
  double parameter = 0.0;
  std::vector<DensityPoint> points;
};

/// KDE of the standardized statistic for each parameter value. For HANOVA
/// statistics the reference curve uses the inflated null variance.
std::vector<DensityCurve> density_export(const SimulationScenario& scenario,
                                         std::span<const StatisticSpec> specs,
                                         const StudyOptions& options);

std::string density_csv(std::span<const DensityCurve> curves);

/// The signal sequences used in the power studies, keyed by name
/// ("example3.1", "example3.2", "example3.3", "example4.1", "example4.2").
const std::map<std::string, std::vector<double>>& scenario_catalog();

}  // namespace orderthresh
