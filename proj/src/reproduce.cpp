#include "orderthresh/reproduce.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "orderthresh/calibration.hpp"
#include "orderthresh/errors.hpp"
#include "published_tables.hpp"

namespace orderthresh {

namespace {

std::string format6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const std::vector<std::string> kGridColumns = {"log^1/2", "log", "log^3/2", "^1/2", "^2/3", "^3/4", "^7/8", "all"};

std::vector<std::string> grid_columns(const char* dim) {
  std::vector<std::string> cols;
  for (const auto& c : kGridColumns) {
    if (c == "all") {
      cols.emplace_back(dim);
    } else if (c[0] == '^') {
      cols.push_back(std::string(dim) + c);
    } else {
      cols.push_back(c + " " + dim);
    }
  }
  return cols;
}

StudyOptions study_options(const ReproduceOptions& o, std::uint64_t replicates, std::uint64_t seed) {
  StudyOptions s;
  s.replicates = replicates;
  s.seed = seed;
  s.threads = o.threads;
  s.alpha = 0.05;
  return s;
}

std::vector<double> rates(const StudyResult& r) {
  std::vector<double> v;
  for (const auto& row : r.rows) v.push_back(row.rate);
  return v;
}

ResultTable hard_levels(const std::string& name, const std::vector<double>& offsets,
                        const ReproduceOptions& o, std::uint64_t reps) {
  ResultTable t;
  t.name = name;
  for (double h : offsets) {
    t.columns.push_back(h == 0.0 ? std::string("delta") : "delta" + std::string(h > 0 ? "+" : "") + fixed(h, 1));
  }
  std::uint64_t row = 0;
  for (std::size_t n : {50, 100, 200, 500}) {
    const double delta = recommended_delta(n, 1.0, 2.0);
    std::vector<StatisticSpec> grid;
    for (double h : offsets) grid.push_back({StatKind::kHard, delta + h});
    t.rows.push_back("n=" + std::to_string(n));
    t.values.push_back(rates(run_type1_study(null_single(n), grid, study_options(o, reps, shift_seed(o.seed, ++row)))));
  }
  return t;
}

ResultTable order_levels(const std::string& name, StatKind kind, const ReproduceOptions& o, std::uint64_t reps) {
  ResultTable t;
  t.name = name;
  t.columns = grid_columns("n");
  std::uint64_t row = 0;
  for (std::size_t n : {50, 100, 200, 500}) {
    std::vector<StatisticSpec> grid;
    for (std::size_t k : order_k_grid(n)) grid.push_back({kind, static_cast<double>(k)});
    t.rows.push_back("n=" + std::to_string(n));
    t.values.push_back(rates(run_type1_study(null_single(n), grid, study_options(o, reps, shift_seed(o.seed, ++row)))));
  }
  return t;
}

ResultTable hanova_levels(const ReproduceOptions& o, std::uint64_t reps) {
  ResultTable t;
  t.name = "table8";
  t.columns = grid_columns("a");
  std::uint64_t row = 0;
  for (std::size_t a : {50, 100, 200, 500, 1000}) {
    for (std::size_t n : {3, 5}) {
      std::vector<StatisticSpec> grid;
      for (std::size_t k : order_k_grid(a)) grid.push_back({StatKind::kHanovaOrder, static_cast<double>(k)});
      t.rows.push_back("a=" + std::to_string(a) + " n=" + std::to_string(n));
      t.values.push_back(rates(run_type1_study(null_hanova(a, n), grid, study_options(o, reps, shift_seed(o.seed, ++row)))));
    }
  }
  return t;
}

struct PowerLayout {
  SimulationScenario family;
  std::vector<std::string> columns;  // after k_opt
  std::vector<StatisticSpec> grid;
  std::vector<std::size_t> shifts;
  bool null_row = false;
};

ResultTable power_table(const std::string& name, const PowerLayout& layout, const ReproduceOptions& o,
                        std::uint64_t reps) {
  ResultTable t;
  t.name = name;
  t.columns.push_back("k_opt");
  t.columns.insert(t.columns.end(), layout.columns.begin(), layout.columns.end());
  const auto opts = study_options(o, reps, o.seed);
  const auto result = run_power_study(layout.family, layout.grid, opts, layout.shifts);
  const std::size_t width = layout.grid.size();
  for (std::size_t i = 0; i < layout.shifts.size(); ++i) {
    t.rows.push_back("H" + std::to_string(layout.shifts[i]));
    std::vector<double> v{static_cast<double>(result.rows[i * width].k_opt)};
    for (std::size_t s = 0; s < width; ++s) v.push_back(result.rows[i * width + s].rate);
    t.values.push_back(std::move(v));
  }
  if (layout.null_row) {
    SimulationScenario null = layout.family;
    null.eta.clear();
    null.label = "H0G";
    const auto r = run_study(null, layout.grid, study_options(o, reps, shift_seed(o.seed, 0)));
    std::vector<double> v{0.0};
    for (double x : rates(r)) v.push_back(x);
    t.rows.push_back("H0G");
    t.values.push_back(std::move(v));
  }
  return t;
}

std::vector<std::size_t> range_list(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> v;
  for (std::size_t r = lo; r <= hi; ++r) v.push_back(r);
  return v;
}

std::vector<std::size_t> concat(std::vector<std::size_t> a, const std::vector<std::size_t>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

PowerLayout single_power_layout(const std::string& example, std::vector<std::size_t> shifts, bool null_row) {
  PowerLayout l;
  l.family.kind = ScenarioKind::kSingleSequence;
  l.family.n = 500;
  l.family.eta = scenario_catalog().at(example);
  l.family.label = example;
  const double delta = recommended_delta(500, 1.0, 2.0);
  l.columns = {"T_S", "T_H(5.122)", "T_L(khat)", "bchi2(khat)"};
  l.grid = {{StatKind::kSimes, 0.0},
            {StatKind::kHard, delta},
            {StatKind::kOrderDataDriven, 0.0},
            {StatKind::kOrderDataDrivenChiSq, 0.0}};
  for (int k : {15, 40, 70, 100, 200, 500}) {
    l.columns.push_back("T_L(" + std::to_string(k) + ")");
    l.grid.push_back({StatKind::kOrder, static_cast<double>(k)});
  }
  l.shifts = std::move(shifts);
  l.null_row = null_row;
  return l;
}

PowerLayout hanova_power_layout(const std::string& example) {
  PowerLayout l;
  l.family.kind = ScenarioKind::kHanova;
  l.family.a = 1000;
  l.family.n = 5;
  l.family.eta = scenario_catalog().at(example);
  l.family.label = example;
  l.columns = {"F"};
  l.grid = {{StatKind::kFisherF, 0.0}};
  for (int k : {20, 50, 100, 250, 500, 1000}) {
    l.columns.push_back("T_L(" + std::to_string(k) + ")");
    l.grid.push_back({StatKind::kHanovaOrder, static_cast<double>(k)});
  }
  l.shifts = range_list(1, 20);
  return l;
}

PowerLayout hanova_khat_layout() {
  PowerLayout l;
  l.family.kind = ScenarioKind::kHanova;
  l.family.a = 1000;
  l.family.n = 5;
  l.family.eta = scenario_catalog().at("example4.1");
  l.family.label = "example4.1";
  l.columns = {"T_L(khat)"};
  l.grid = {{StatKind::kHanovaDataDriven, 0.0}};
  l.shifts = range_list(1, 20);
  return l;
}

struct TableEntry {
  std::uint64_t replicates;
  std::function<ResultTable(const ReproduceOptions&, std::uint64_t)> build;
};

const std::map<std::string, TableEntry>& table_registry() {
  static const std::map<std::string, TableEntry> registry = [] {
    std::map<std::string, TableEntry> m;
    m["table1"] = {30000, [](const ReproduceOptions& o, std::uint64_t r) {
                     return hard_levels("table1", {-2.0, -1.6, -1.2, -0.8, -0.4, 0.0}, o, r);
                   }};
    m["table2"] = {30000, [](const ReproduceOptions& o, std::uint64_t r) {
                     return hard_levels("table2", {0.4, 0.8, 1.2, 1.6, 2.0}, o, r);
                   }};
    m["table3"] = {30000, [](const ReproduceOptions& o, std::uint64_t r) {
                     return order_levels("table3", StatKind::kOrder, o, r);
                   }};
    m["table3app"] = {30000, [](const ReproduceOptions& o, std::uint64_t r) {
                        return order_levels("table3app", StatKind::kOrderChiSq, o, r);
                      }};
    m["table4"] = {3000, [](const ReproduceOptions& o, std::uint64_t r) {
                     const auto shifts = concat({1, 3, 5, 7, 8}, range_list(10, 24));
                     return power_table("table4", single_power_layout("example3.1", shifts, true), o, r);
                   }};
    auto ex32 = [](const std::string& name) {
      return [name](const ReproduceOptions& o, std::uint64_t r) {
        const auto shifts = concat({1, 2, 3, 6, 7, 8, 10}, range_list(12, 24));
        return power_table(name, single_power_layout("example3.2", shifts, false), o, r);
      };
    };
    m["table5"] = {3000, ex32("table5")};
    m["table6"] = {3000, ex32("table6")};
    m["table7"] = {3000, [](const ReproduceOptions& o, std::uint64_t r) {
                     const auto shifts = concat({1, 3, 4, 6, 8, 10}, range_list(12, 25));
                     return power_table("table7", single_power_layout("example3.3", shifts, false), o, r);
                   }};
    m["table8"] = {20000, [](const ReproduceOptions& o, std::uint64_t r) { return hanova_levels(o, r); }};
    m["table9"] = {20000, [](const ReproduceOptions& o, std::uint64_t r) {
                     return power_table("table9", hanova_power_layout("example4.1"), o, r);
                   }};
    m["table10"] = {20000, [](const ReproduceOptions& o, std::uint64_t r) {
                      return power_table("table10", hanova_power_layout("example4.2"), o, r);
                    }};
    m["table11"] = {2000, [](const ReproduceOptions& o, std::uint64_t r) {
                      return power_table("table11", hanova_khat_layout(), o, r);
                    }};
    return m;
  }();
  return registry;
}

const TableEntry& table_entry(const std::string& name) {
  const auto& reg = table_registry();
  const auto it = reg.find(name);
  if (it == reg.end()) throw DomainError("unknown table '" + name + "'");
  return it->second;
}

// Published layouts reuse the simulated column headers without running a study.
std::vector<std::string> published_columns(const std::string& name) {
  if (name == "table1" || name == "table2") {
    const std::vector<double> offsets = name == "table1" ? std::vector<double>{-2.0, -1.6, -1.2, -0.8, -0.4, 0.0}
                                                         : std::vector<double>{0.4, 0.8, 1.2, 1.6, 2.0};
    std::vector<std::string> cols;
    for (double h : offsets) {
      cols.push_back(h == 0.0 ? std::string("delta") : "delta" + std::string(h > 0 ? "+" : "") + fixed(h, 1));
    }
    return cols;
  }
  if (name == "table3" || name == "table3app") return grid_columns("n");
  if (name == "table8") return grid_columns("a");
  std::vector<std::string> cols{"k_opt"};
  if (name == "table9" || name == "table10") {
    const auto l = hanova_power_layout(name == "table9" ? "example4.1" : "example4.2");
    cols.insert(cols.end(), l.columns.begin(), l.columns.end());
  } else if (name == "table11") {
    cols.push_back("T_L(khat)");
  } else {
    const auto l = single_power_layout("example3.1", {}, false);
    cols.insert(cols.end(), l.columns.begin(), l.columns.end());
  }
  return cols;
}

}  // namespace

std::string ResultTable::to_csv() const {
  std::ostringstream os;
  os << "row";
  for (const auto& c : columns) os << ',' << c;
  os << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << rows[i];
    for (double v : values[i]) os << ',' << format6(v);
    os << '\n';
  }
  return os.str();
}

std::vector<std::string> table_names() {
  std::vector<std::string> names;
  for (const auto& [name, entry] : table_registry()) names.push_back(name);
  return names;
}

std::vector<std::string> figure_names() { return {"fig1", "fig2"}; }

std::uint64_t default_replicates(const std::string& name) {
  if (name == "fig1" || name == "fig2") return 20000;
  return table_entry(name).replicates;
}

std::vector<std::size_t> order_k_grid(std::size_t m) {
  detail::require(m >= 1, "order_k_grid: dimension must be positive");
  const double x = static_cast<double>(m);
  const double lg = std::log(x);
  const double raw[] = {std::sqrt(lg),          lg,
                        std::pow(lg, 1.5),      std::sqrt(x),
                        std::pow(x, 2.0 / 3.0), std::pow(x, 0.75),
                        std::pow(x, 0.875),     x};
  std::vector<std::size_t> ks;
  for (double v : raw) {
    const double f = std::floor(v + 1e-9);
    ks.push_back(static_cast<std::size_t>(std::clamp(f, 1.0, x)));
  }
  return ks;
}

ResultTable reproduce_table(const std::string& name, const ReproduceOptions& options) {
  const auto& entry = table_entry(name);
  const std::uint64_t reps = options.replicates != 0 ? options.replicates : entry.replicates;
  return entry.build(options, reps);
}

ResultTable published_table(const std::string& name) {
  table_entry(name);
  const std::string source = name == "table5" ? "table6" : name;
  const auto* pub = detail::find_published(source);
  if (pub == nullptr) throw DomainError("no published values for '" + name + "'");
  ResultTable t;
  t.name = name;
  t.columns = published_columns(name);
  for (const auto& [label, values] : pub->rows) {
    t.rows.push_back(label);
    t.values.push_back(values);
  }
  return t;
}

std::vector<DensityCurve> reproduce_figure(const std::string& name, const ReproduceOptions& options) {
  const std::uint64_t reps = options.replicates != 0 ? options.replicates : default_replicates(name);
  StudyOptions o = study_options(options, reps, options.seed);
  if (name == "fig1") {
    std::vector<StatisticSpec> specs;
    for (double d : {1.842, 3.927, 5.672}) specs.push_back({StatKind::kHard, d});
    for (double k : {35.0, 10.0, 3.0}) specs.push_back({StatKind::kOrder, k});
    return density_export(null_single(200), specs, o);
  }
  if (name == "fig2") {
    std::vector<StatisticSpec> specs;
    for (double k : {22.0, 105.0, 229.0}) specs.push_back({StatKind::kHanovaOrder, k});
    return density_export(null_hanova(500, 3), specs, o);
  }
  throw DomainError("unknown figure '" + name + "'");
}

}  // namespace orderthresh
