#include "orderthresh/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <thread>

#include "orderthresh/errors.hpp"
#include "orderthresh/hanova.hpp"
#include "orderthresh/kernels.hpp"
#include "orderthresh/rng.hpp"
#include "orderthresh/special_functions.hpp"

namespace orderthresh {

std::vector<double> SimulationScenario::theta() const {
  const std::size_t m = dimension();
  detail::require(shift_r >= 1 && shift_r <= eta.size() + 1,
                  "scenario: shift r must lie in [1, len(eta) + 1]");
  std::vector<double> t(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t idx = j + shift_r - 1;
    if (idx < eta.size()) t[j] = eta[idx];
  }
  return t;
}

std::size_t SimulationScenario::k_opt() const {
  const auto t = theta();
  return static_cast<std::size_t>(std::count_if(t.begin(), t.end(), [](double v) { return v != 0.0; }));
}

SimulationScenario null_single(std::size_t n) {
  SimulationScenario s;
  s.kind = ScenarioKind::kSingleSequence;
  s.n = n;
  s.label = "null";
  return s;
}

SimulationScenario null_hanova(std::size_t a, std::size_t n) {
  SimulationScenario s;
  s.kind = ScenarioKind::kHanova;
  s.a = a;
  s.n = n;
  s.label = "null";
  return s;
}

namespace {

struct KindName {
  StatKind kind;
  const char* name;
  bool takes_parameter;
  bool hanova;
};

constexpr KindName kKindNames[] = {
    {StatKind::kOrder, "order", true, false},
    {StatKind::kOrderChiSq, "order-chisq", true, false},
    {StatKind::kOrderDataDriven, "order-khat", false, false},
    {StatKind::kOrderDataDrivenChiSq, "order-khat-chisq", false, false},
    {StatKind::kHard, "hard", true, false},
    {StatKind::kHardExact, "hard-exact", true, false},
    {StatKind::kSimes, "simes", false, false},
    {StatKind::kChiSq, "chisq", false, false},
    {StatKind::kHanovaOrder, "hanova", true, true},
    {StatKind::kHanovaOrderPlugIn, "hanova-plugin", true, true},
    {StatKind::kHanovaDataDriven, "hanova-khat", false, true},
    {StatKind::kFisherF, "f", false, true},
};

const KindName& kind_info(StatKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k;
  }
  throw DomainError("unknown statistic kind");
}

std::string format6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string StatisticSpec::label() const { return kind_info(kind).name; }

bool StatisticSpec::applies_to(ScenarioKind scenario) const {
  return kind_info(kind).hanova == (scenario == ScenarioKind::kHanova);
}

StatisticSpec parse_statistic(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  for (const auto& k : kKindNames) {
    if (name != k.name) continue;
    StatisticSpec spec{k.kind, 0.0};
    if (k.takes_parameter) {
      if (colon == std::string::npos) throw DomainError("statistic '" + name + "' needs a parameter, e.g. " + name + ":22");
      std::size_t used = 0;
      const std::string arg = text.substr(colon + 1);
      try {
        spec.parameter = std::stod(arg, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != arg.size()) throw DomainError("bad parameter in statistic '" + text + "'");
    } else if (colon != std::string::npos) {
      throw DomainError("statistic '" + name + "' takes no parameter");
    }
    return spec;
  }
  throw DomainError("unknown statistic '" + text + "'");
}

double StudyRow::se() const {
  return replicates == 0 ? 0.0 : std::sqrt(rate * (1.0 - rate) / static_cast<double>(replicates));
}

std::string StudyResult::to_csv() const {
  std::ostringstream os;
  os << "scenario,statistic,parameter,rate,replicates,se\n";
  for (const auto& r : rows) {
    os << r.scenario << ',' << r.statistic << ',' << format6(r.parameter) << ',' << format6(r.rate)
       << ',' << r.replicates << ',' << format6(r.se()) << '\n';
  }
  return os.str();
}

namespace {

struct Evaluation {
  bool reject = false;
  double standardized = 0.0;
};

// Per-worker state: draws one replicate and evaluates statistics on it.
class ReplicateEvaluator {
 public:
  ReplicateEvaluator(const SimulationScenario& scenario, double alpha)
      : s_(scenario), alpha_(alpha), theta_(scenario.theta()), k_opt_(scenario.k_opt()),
        stream_(0, 0) {
    if (s_.kind == ScenarioKind::kHanova) {
      detail::require(s_.a >= 2 && s_.n >= 2, "scenario: HANOVA needs a >= 2 and n >= 2");
      const double d1 = static_cast<double>(s_.a - 1);
      const double d2 = static_cast<double>(s_.a * (s_.n - 1));
      f_critical_ = f_quantile_upper(alpha, d1, d2);
      noise_.resize(s_.a * s_.n);
    } else {
      detail::require(s_.n >= 1, "scenario: n must be positive");
      noise_.resize(s_.n);
    }
  }

  void draw(std::uint64_t seed, std::uint64_t replicate) {
    stream_.reset(seed, replicate);
    stream_.fill_normal(noise_);
    if (s_.kind == ScenarioKind::kSingleSequence) {
      x_.resize(s_.n);
      kernels::add(noise_, theta_, x_);
      squares_.resize(s_.n);
      kernels::square(x_, squares_);
    } else {
      for (std::size_t i = 0; i < s_.a; ++i) {
        for (std::size_t j = 0; j < s_.n; ++j) noise_[i * s_.n + j] += theta_[i];
      }
      grouped_ = GroupedData::summarize(noise_, s_.a, s_.n);
      x_ = studentized_effects(grouped_);
      squares_.resize(s_.a);
      kernels::square(x_, squares_);
    }
    sorted_ = squares_;
    std::sort(sorted_.begin(), sorted_.end());
    pvalues_.clear();
  }

  Evaluation evaluate(const StatisticSpec& spec) {
    const std::size_t dim = s_.dimension();
    auto as_k = [&](double p) {
      detail::require(p >= 1.0 && p <= static_cast<double>(dim) && p == std::floor(p),
                      "statistic: k must be an integer in [1, dimension]");
      return static_cast<std::size_t>(p);
    };
    switch (spec.kind) {
      case StatKind::kOrder:
      case StatKind::kOrderChiSq: {
        const std::size_t k = as_k(spec.parameter);
        return from(order_outcome(top_k_sum_sorted(sorted_, k), dim, k, alpha_, reference(spec)));
      }
      case StatKind::kOrderDataDriven:
      case StatKind::kOrderDataDrivenChiSq: {
        const std::size_t k = storey_k_hat(pvalues());
        return from(order_outcome(top_k_sum_sorted(sorted_, k), dim, k, alpha_, reference(spec)));
      }
      case StatKind::kHard:
      case StatKind::kHardExact:
        return from(hard_outcome(hard_threshold_statistic(squares_, spec.parameter), dim,
                                 spec.parameter, alpha_,
                                 spec.kind == StatKind::kHard ? HardCentering::kAsymptotic
                                                              : HardCentering::kExact));
      case StatKind::kSimes:
        return from(simes_test(pvalues(), alpha_,
                               k_opt_ > 0 ? std::optional<std::size_t>(k_opt_) : std::nullopt));
      case StatKind::kChiSq: {
        const double t = top_k_sum_sorted(sorted_, dim);
        const double nn = static_cast<double>(dim);
        return {chisq_sf(t, nn) < alpha_, (t - nn) / std::sqrt(2.0 * nn)};
      }
      case StatKind::kHanovaOrder:
      case StatKind::kHanovaOrderPlugIn: {
        const std::size_t k = as_k(spec.parameter);
        return from(hanova_outcome(top_k_sum_sorted(sorted_, k), s_.a, s_.n, k, alpha_,
                                   spec.kind == StatKind::kHanovaOrder ? NullVariance::kSaturatedRatio
                                                                       : NullVariance::kPlugInRatio));
      }
      case StatKind::kHanovaDataDriven: {
        const std::size_t k = storey_k_hat(pvalues());
        return from(hanova_outcome(top_k_sum_sorted(sorted_, k), s_.a, s_.n, k, alpha_));
      }
      case StatKind::kFisherF: {
        const double f = grouped_.f_stat();
        return {f > f_critical_, f};
      }
    }
    throw DomainError("unhandled statistic");
  }

 private:
  static Reference reference(const StatisticSpec& spec) {
    return spec.kind == StatKind::kOrderChiSq || spec.kind == StatKind::kOrderDataDrivenChiSq
               ? Reference::kScaledChiSq
               : Reference::kStdNormal;
  }
  static Evaluation from(const TestOutcome& o) { return {o.reject, o.standardized}; }
  static Evaluation from(const HanovaOutcome& o) { return {o.reject, o.standardized}; }

  const std::vector<double>& pvalues() {
    if (pvalues_.empty()) pvalues_ = pvalues_from_normals(x_);
    return pvalues_;
  }

  const SimulationScenario& s_;
  double alpha_;
  std::vector<double> theta_;
  std::size_t k_opt_;
  double f_critical_ = 0.0;
  VariateStream stream_;
  std::vector<double> noise_, x_, squares_, sorted_, pvalues_;
  GroupedData grouped_;
};

unsigned worker_count(unsigned requested, std::uint64_t replicates) {
  unsigned t = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(t, std::max<std::uint64_t>(1, replicates)));
}

// Runs body(evaluator, replicate) for every replicate across workers. Each
// worker owns its evaluator; replicates are handed out in fixed-size chunks.
template <class Body>
void parallel_replicates(const SimulationScenario& scenario, const StudyOptions& options, Body body) {
  const unsigned workers = worker_count(options.threads, options.replicates);
  constexpr std::uint64_t kChunk = 64;
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&](unsigned worker) {
    try {
      ReplicateEvaluator ev(scenario, options.alpha);
      for (;;) {
        const std::uint64_t begin = next.fetch_add(kChunk);
        if (begin >= options.replicates || failed.load()) break;
        const std::uint64_t end = std::min(options.replicates, begin + kChunk);
        for (std::uint64_t r = begin; r < end; ++r) body(worker, ev, r);
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  if (failure) std::rethrow_exception(failure);
}

void check_grid(const SimulationScenario& scenario, std::span<const StatisticSpec> grid) {
  for (const auto& spec : grid) {
    if (!spec.applies_to(scenario.kind)) {
      throw DomainError("statistic '" + spec.label() + "' does not apply to this scenario kind");
    }
  }
}

}  // namespace

StudyResult run_study(const SimulationScenario& scenario, std::span<const StatisticSpec> grid,
                      const StudyOptions& options) {
  detail::require(options.replicates >= 1, "study: replicates must be positive");
  detail::require(options.alpha > 0.0 && options.alpha < 1.0, "study: alpha must lie in (0, 1)");
  check_grid(scenario, grid);
  const unsigned workers = worker_count(options.threads, options.replicates);
  std::vector<std::vector<std::uint64_t>> tallies(workers, std::vector<std::uint64_t>(grid.size(), 0));
  parallel_replicates(scenario, options, [&](unsigned w, ReplicateEvaluator& ev, std::uint64_t r) {
    ev.draw(options.seed, r);
    for (std::size_t s = 0; s < grid.size(); ++s) {
      if (ev.evaluate(grid[s]).reject) ++tallies[w][s];
    }
  });

  StudyResult result;
  for (std::size_t s = 0; s < grid.size(); ++s) {
    std::uint64_t count = 0;
    for (const auto& t : tallies) count += t[s];
    result.rows.push_back({scenario.label, grid[s].label(), grid[s].parameter,
                           static_cast<double>(count) / static_cast<double>(options.replicates),
                           options.replicates, options.seed, scenario.k_opt()});
  }
  return result;
}

StudyResult run_type1_study(const SimulationScenario& dims, std::span<const StatisticSpec> grid,
                            const StudyOptions& options) {
  detail::require(options.replicates >= 100, "type I study: at least 100 replicates required");
  SimulationScenario null = dims;
  null.eta.clear();
  null.shift_r = 1;
  null.label = "null";
  return run_study(null, grid, options);
}

std::uint64_t shift_seed(std::uint64_t seed, std::size_t r) {
  return mix64(seed ^ (0xA24BAED4963EE407ull * static_cast<std::uint64_t>(r)));
}

StudyResult run_power_study(const SimulationScenario& family, std::span<const StatisticSpec> grid,
                            const StudyOptions& options, std::span<const std::size_t> shifts) {
  detail::require(options.replicates >= 100, "power study: at least 100 replicates required");
  std::vector<std::size_t> rs(shifts.begin(), shifts.end());
  if (rs.empty()) {
    for (std::size_t r = 1; r <= family.eta.size(); ++r) rs.push_back(r);
  }
  StudyResult result;
  for (std::size_t r : rs) {
    SimulationScenario s = family;
    s.shift_r = r;
    s.label = "H" + std::to_string(r);
    StudyOptions o = options;
    o.seed = shift_seed(options.seed, r);
    auto block = run_study(s, grid, o);
    for (auto& row : block.rows) result.rows.push_back(std::move(row));
  }
  return result;
}

std::vector<double> simulate_standardized(const SimulationScenario& scenario,
                                          const StatisticSpec& spec, const StudyOptions& options) {
  detail::require(options.replicates >= 1, "simulate_standardized: replicates must be positive");
  const StatisticSpec one[] = {spec};
  check_grid(scenario, one);
  std::vector<double> values(options.replicates);
  parallel_replicates(scenario, options, [&](unsigned, ReplicateEvaluator& ev, std::uint64_t r) {
    ev.draw(options.seed, r);
    values[r] = ev.evaluate(spec).standardized;
  });
  return values;
}

double silverman_bandwidth(std::span<const double> sample) {
  const std::size_t m = sample.size();
  detail::require(m >= 2, "silverman_bandwidth: need at least two points");
  double mean = 0.0;
  for (double v : sample) mean += v;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double v : sample) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));

  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(m - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, m - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd > 0.0 ? sd : 1.0;
  return 0.9 * spread * std::pow(static_cast<double>(m), -0.2);
}

std::vector<DensityPoint> kernel_density(std::span<const double> sample, double reference_variance) {
  constexpr std::size_t kGrid = 512;
  const double h = silverman_bandwidth(sample);
  const auto [mn, mx] = std::minmax_element(sample.begin(), sample.end());
  const double lo = *mn - 3.0 * h;
  const double hi = *mx + 3.0 * h;
  const double step = (hi - lo) / static_cast<double>(kGrid - 1);
  const double norm = 1.0 / (static_cast<double>(sample.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  const double ref_sd = std::sqrt(reference_variance);

  std::vector<DensityPoint> out(kGrid);
  for (std::size_t g = 0; g < kGrid; ++g) {
    const double x = lo + step * static_cast<double>(g);
    double acc = 0.0;
    for (double v : sample) {
      const double u = (x - v) / h;
      acc += std::exp(-0.5 * u * u);
    }
    out[g] = {x, acc * norm, std_normal_pdf(x / ref_sd) / ref_sd};
  }
  return out;
}

std::vector<DensityCurve> density_export(const SimulationScenario& scenario,
                                         std::span<const StatisticSpec> specs,
                                         const StudyOptions& options) {
  detail::require(options.replicates >= 1000, "density_export: at least 1000 replicates required");
  std::vector<DensityCurve> curves;
  for (const auto& spec : specs) {
    const auto sample = simulate_standardized(scenario, spec, options);
    double variance = 1.0;
    if (spec.kind == StatKind::kHanovaOrder || spec.kind == StatKind::kHanovaOrderPlugIn) {
      variance = hanova_outcome(0.0, scenario.a, scenario.n, static_cast<std::size_t>(spec.parameter),
                                options.alpha,
                                spec.kind == StatKind::kHanovaOrder ? NullVariance::kSaturatedRatio
                                                                    : NullVariance::kPlugInRatio)
                     .null_variance;
    }
    curves.push_back({spec.label(), spec.parameter, kernel_density(sample, variance)});
  }
  return curves;
}

std::string density_csv(std::span<const DensityCurve> curves) {
  std::ostringstream os;
  os << "statistic,parameter,x,density,reference\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      os << c.statistic << ',' << format6(c.parameter) << ',' << format6(p.x) << ','
         << format6(p.density) << ',' << format6(p.reference) << '\n';
    }
  }
  return os.str();
}

const std::map<std::string, std::vector<double>>& scenario_catalog() {
  static const std::map<std::string, std::vector<double>> catalog = {
      {"example3.1",
       {1.0674, -0.1656, 1.6253, 1.7877, 0.3535, 2.6909, 2.6892, 1.4624, 1.8273, 1.6746,
        1.3133, 2.2258, 0.9117, 3.6832, 1.3636, 1.6139, 2.5668, 1.5593, 1.4044, 0.6677,
        1.7944, 0.1638, 2.2143, 3.1236, 0.8082, 2.7540, -0.0937, 0.0590, 2.0711, 2.3579}},
      {"example3.2",
       {0.0512, 1.4647, 0.4995, 0.7216, 0.1151, 0.2716, 0.7842, 3.7876, 0.1967, 0.8103,
        0.4854, 0.2332, 0.5814, 0.3035, 1.7357, 0.9021, 0.0667, 0.0867, 0.8909, 0.1124,
        2.8491, 1.0416, 0.2068, 2.6191, 1.9740, 1.5957, 1.6158, 0.5045, 1.3012, 1.6153}},
      {"example3.3", std::vector<double>(30, 2.0)},
      {"example4.1",
       {1.8005, -1.0754, 0.4274, -0.0561, 1.5652, 1.0484, -0.1741, -1.9260, 1.2856, -0.2212,
        0.4617, 1.1677, 1.6873, 0.9528, -1.2949, -0.3772, 1.7419, 1.6676, -0.3589, 1.5746}},
      {"example4.2",
       {1.0949, 0.5511, 1.7587, 0.1128, 0.4033, 0.7991, 0.6868, 0.0993, 0.6919, 1.8255,
        1.1272, 2.1041, 0.3975, 1.4730, 0.4549, 1.5015, 0.1830, 0.6865, 0.1360, 2.1458}},
  };
  return catalog;
}

}  // namespace orderthresh
