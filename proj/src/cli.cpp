#include "orderthresh/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "orderthresh/calibration.hpp"
#include "orderthresh/errors.hpp"
#include "orderthresh/hanova.hpp"
#include "orderthresh/montecarlo.hpp"
#include "orderthresh/reproduce.hpp"
#include "orderthresh/single_sequence.hpp"

namespace orderthresh::cli {

namespace {

using json = nlohmann::json;

// Raised for malformed flags or configuration; maps to kExitUsage.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& token, const std::string& source, std::size_t line) {
  const std::string t = trim(token);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
    throw DomainError(source + ":" + std::to_string(line) + ": not a number: '" + t + "'");
  }
  return v;
}

std::string format6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("ORDER_THRESH_SEED");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || errno == ERANGE || env[0] == '-') {
    throw UsageError(std::string("ORDER_THRESH_SEED is not an unsigned integer: '") + env + "'");
  }
  return v;
}

// Opens the positional input file, or falls back to the supplied stream.
class Input {
 public:
  Input(const std::string& path, std::istream& fallback) : stream_(&fallback), name_("<stdin>") {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw DomainError("cannot open '" + path + "'");
      stream_ = &file_;
      name_ = path;
    }
  }
  std::istream& stream() { return *stream_; }
  const std::string& name() const { return name_; }

 private:
  std::ifstream file_;
  std::istream* stream_;
  std::string name_;
};

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot write '" + path + "'");
  f << text;
  if (!f) throw DomainError("write failed for '" + path + "'");
}

json outcome_json(const std::string& name, const TestOutcome& o) {
  json j;
  j["test"] = name;
  j["statistic"] = o.statistic;
  j["standardized"] = o.standardized;
  j["p_value"] = o.p_value;
  j["reject"] = o.reject;
  j["alpha"] = o.alpha;
  j["k_used"] = o.k_used;
  if (o.reference == Reference::kScaledChiSq) {
    j["b"] = o.b;
    j["nu"] = o.nu;
  }
  return j;
}

std::string calibration_csv(const CalibrationTable& t) {
  std::ostringstream os;
  os << "n,k,mu,sigma2\n"
     << t.n << ',' << t.k << ',' << format6(t.mu) << ',' << format6(t.sigma2) << '\n'
     << "i,nu_tilde,alpha\n";
  for (std::size_t i = 0; i < t.n; ++i) {
    os << (i + 1) << ',' << format6(t.nu_tilde[i]) << ',' << format6(t.alpha[i]) << '\n';
  }
  return os.str();
}

// ---- simulate configuration ----

const json& require_key(const json& obj, const char* key) {
  if (!obj.contains(key)) throw UsageError(std::string("config: missing key '") + key + "'");
  return obj.at(key);
}

std::uint64_t as_count(const json& v, const char* what) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw UsageError(std::string("config: '") + what + "' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw UsageError(std::string("config: unknown key '") + key + "' in " + where);
  }
}

struct SimulateConfig {
  SimulationScenario scenario;
  std::vector<StatisticSpec> statistics;
  StudyOptions options;
  bool power = false;
  std::vector<std::size_t> shifts;
  std::string output;
};

SimulateConfig parse_simulate_config(const json& cfg, std::uint64_t seed, unsigned threads) {
  if (!cfg.is_object()) throw UsageError("config: top level must be an object");
  reject_unknown(cfg, {"kind", "dims", "statistics", "replicates", "seed", "alpha", "scenario", "output"},
                 "config");
  SimulateConfig c;
  const std::string kind = require_key(cfg, "kind").get<std::string>();
  const json& dims = require_key(cfg, "dims");
  if (!dims.is_object()) throw UsageError("config: 'dims' must be an object");
  if (kind == "single") {
    reject_unknown(dims, {"n"}, "dims");
    c.scenario = null_single(as_count(require_key(dims, "n"), "dims.n"));
    if (c.scenario.n < 1) throw UsageError("config: dims.n must be positive");
  } else if (kind == "hanova") {
    reject_unknown(dims, {"a", "n"}, "dims");
    c.scenario = null_hanova(as_count(require_key(dims, "a"), "dims.a"), as_count(require_key(dims, "n"), "dims.n"));
    if (c.scenario.a < 2 || c.scenario.n < 2) throw UsageError("config: HANOVA needs a >= 2 and n >= 2");
  } else {
    throw UsageError("config: 'kind' must be \"single\" or \"hanova\"");
  }

  const json& stats = require_key(cfg, "statistics");
  if (!stats.is_array() || stats.empty()) throw UsageError("config: 'statistics' must be a nonempty array");
  for (const auto& s : stats) {
    if (!s.is_string()) throw UsageError("config: statistics must be strings such as \"order:22\"");
    StatisticSpec spec;
    try {
      spec = parse_statistic(s.get<std::string>());
    } catch (const DomainError& e) {
      throw UsageError(std::string("config: ") + e.what());
    }
    if (!spec.applies_to(c.scenario.kind)) {
      throw UsageError("config: statistic '" + s.get<std::string>() + "' does not apply to kind '" + kind + "'");
    }
    const bool needs_k = spec.kind == StatKind::kOrder || spec.kind == StatKind::kOrderChiSq ||
                         spec.kind == StatKind::kHanovaOrder || spec.kind == StatKind::kHanovaOrderPlugIn;
    if (needs_k && (spec.parameter < 1 || spec.parameter > static_cast<double>(c.scenario.dimension()) ||
                    spec.parameter != std::floor(spec.parameter))) {
      throw UsageError("config: k in '" + s.get<std::string>() + "' must be an integer in [1, " +
                       std::to_string(c.scenario.dimension()) + "]");
    }
    if ((spec.kind == StatKind::kHard || spec.kind == StatKind::kHardExact) && !(spec.parameter > 0.0)) {
      throw UsageError("config: delta in '" + s.get<std::string>() + "' must be positive");
    }
    c.statistics.push_back(spec);
  }

  c.options.replicates = as_count(require_key(cfg, "replicates"), "replicates");
  if (c.options.replicates < 100) throw UsageError("config: 'replicates' must be at least 100");
  c.options.seed = cfg.contains("seed") ? as_count(cfg.at("seed"), "seed") : seed;
  c.options.threads = threads;
  if (cfg.contains("alpha")) {
    if (!cfg.at("alpha").is_number()) throw UsageError("config: 'alpha' must be a number");
    c.options.alpha = cfg.at("alpha").get<double>();
    if (!(c.options.alpha > 0.0 && c.options.alpha < 1.0)) throw UsageError("config: 'alpha' must lie in (0, 1)");
  }
  if (cfg.contains("output")) c.output = cfg.at("output").get<std::string>();

  if (cfg.contains("scenario")) {
    const json& sc = cfg.at("scenario");
    if (!sc.is_object()) throw UsageError("config: 'scenario' must be an object");
    reject_unknown(sc, {"eta", "shifts"}, "scenario");
    const json& eta = require_key(sc, "eta");
    if (eta.is_string()) {
      const auto& catalog = scenario_catalog();
      const auto it = catalog.find(eta.get<std::string>());
      if (it == catalog.end()) throw UsageError("config: unknown scenario '" + eta.get<std::string>() + "'");
      c.scenario.eta = it->second;
      c.scenario.label = it->first;
    } else if (eta.is_array()) {
      for (const auto& v : eta) {
        if (!v.is_number()) throw UsageError("config: 'eta' entries must be numbers");
        c.scenario.eta.push_back(v.get<double>());
      }
      c.scenario.label = "custom";
    } else {
      throw UsageError("config: 'eta' must be a catalog name or an array of numbers");
    }
    if (c.scenario.eta.size() > c.scenario.dimension()) {
      throw UsageError("config: 'eta' is longer than the dimension");
    }
    if (sc.contains("shifts")) {
      if (!sc.at("shifts").is_array()) throw UsageError("config: 'shifts' must be an array");
      for (const auto& r : sc.at("shifts")) {
        const auto v = as_count(r, "shifts");
        if (v < 1 || v > c.scenario.eta.size() + 1) {
          throw UsageError("config: shifts must lie in [1, len(eta) + 1]");
        }
        c.shifts.push_back(v);
      }
    }
    c.power = true;
  }
  return c;
}

// ---- subcommand wiring ----

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  double alpha = 0.05;
};

void add_alpha(CLI::App* sub, double& alpha) {
  sub->add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
}

}  // namespace

std::vector<double> read_values(std::istream& in, const std::string& source) {
  std::vector<double> values;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    values.push_back(parse_number(line, source, number));
  }
  return values;
}

std::vector<std::vector<double>> read_rows(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(parse_number(cell, source, number));
    if (!line.empty() && line.back() == ',') parse_number("", source, number);
    rows.push_back(std::move(row));
  }
  return rows;
}

int parse_and_dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
                       std::ostream& err) {
  CLI::App app{"Order thresholding tests for sparse signals", "orderthresh"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  Common common;
  std::optional<std::uint64_t> seed_flag;
  std::string output;

  // calibrate
  std::size_t cal_n = 0, cal_k = 0;
  auto* calibrate = app.add_subcommand("calibrate", "Print the null calibration constants of T_L(k)");
  calibrate->add_option("--n", cal_n, "Sequence length")->required()->check(CLI::PositiveNumber);
  calibrate->add_option("--k", cal_k, "Number of largest squares summed")->required()->check(CLI::PositiveNumber);
  calibrate->add_option("--out", output, "Output file (default stdout)");

  // test
  std::string stat = "order", input;
  std::optional<std::size_t> test_k, k_opt;
  std::optional<double> delta;
  bool k_data_driven = false, pvalues_input = false, exact_centering = false;
  auto* test = app.add_subcommand("test", "Run one test on a sequence read from a file or stdin");
  test->add_option("--stat", stat, "Statistic")
      ->check(CLI::IsMember({"order", "order-chisq", "hard", "simes", "chisq", "exp-order"}))
      ->capture_default_str();
  test->add_option("--k", test_k, "Threshold k for order statistics");
  test->add_flag("--k-data-driven", k_data_driven, "Choose k by the Storey estimate");
  test->add_option("--delta", delta, "Hard threshold (default 2 log(n / log^2 n))");
  test->add_flag("--exact-centering", exact_centering, "Hard threshold: exact truncated moments");
  test->add_flag("--pvalues", pvalues_input, "Simes: input values are p-values");
  test->add_option("--k-opt", k_opt, "Simes: raise the level to alpha / (1 - k_opt / n)");
  add_alpha(test, common.alpha);
  test->add_option("input", input, "Input file, one value per line (default stdin)");

  // hanova
  std::optional<std::size_t> hanova_k;
  bool hanova_dd = false, plug_in = false;
  std::string hanova_input;
  auto* hanova = app.add_subcommand("hanova", "HANOVA order test and F test on CSV rows (one group per row)");
  hanova->add_option("--k", hanova_k, "Number of largest squared effects summed");
  hanova->add_flag("--k-data-driven", hanova_dd, "Choose k by the Storey estimate");
  hanova->add_flag("--plug-in-variance", plug_in, "Null variance from the calibration constants of k");
  add_alpha(hanova, common.alpha);
  hanova->add_option("input", hanova_input, "CSV input file (default stdin)");

  // simulate
  std::string config_path;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study described by a JSON config");
  simulate->add_option("config", config_path, "JSON config file ('-' for stdin)")->required();
  simulate->add_option("--seed", seed_flag, "Seed when the config has none (default $ORDER_THRESH_SEED or 1)");
  simulate->add_option("--threads", common.threads, "Worker threads (0 = all cores)");
  simulate->add_option("--out", output, "Output CSV (overrides the config)");

  // reproduce
  std::string target, out_dir;
  std::uint64_t replicates = 0;
  bool published_only = false;
  auto* reproduce = app.add_subcommand("reproduce", "Regenerate a published table or figure");
  reproduce->add_option("name", target, "table1 ... table11, table3app, fig1, fig2")->required();
  reproduce->add_option("--replicates", replicates, "Replicates (default: as published)");
  reproduce->add_option("--seed", seed_flag, "Seed (default $ORDER_THRESH_SEED or 1)");
  reproduce->add_option("--threads", common.threads, "Worker threads (0 = all cores)");
  reproduce->add_option("--out", out_dir, "Directory for NAME.csv and NAME.published.csv");
  reproduce->add_flag("--published", published_only, "Print the published values only");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return kExitUsage;
  }

  try {
    common.seed = seed_flag ? *seed_flag : default_seed();
    if (!(common.alpha > 0.0 && common.alpha < 1.0)) throw UsageError("--alpha must lie strictly between 0 and 1");

    if (calibrate->parsed()) {
      if (cal_k > cal_n) throw UsageError("calibrate: --k must not exceed --n");
      write_text(output, calibration_csv(make_calibration_table(cal_n, cal_k)), out);
      return kExitOk;
    }

    if (test->parsed()) {
      const bool order_like = stat == "order" || stat == "order-chisq" || stat == "exp-order";
      if (order_like && test_k.has_value() == k_data_driven) {
        throw UsageError("test: give exactly one of --k and --k-data-driven");
      }
      if (stat == "exp-order" && k_data_driven) throw UsageError("test: exp-order needs --k");
      if (!order_like && (test_k || k_data_driven)) throw UsageError("test: --k applies to order statistics only");
      if (delta && stat != "hard") throw UsageError("test: --delta applies to --stat hard only");
      if ((pvalues_input || k_opt) && stat != "simes") throw UsageError("test: --pvalues/--k-opt apply to simes only");
      Input src(input, in);
      auto values = read_values(src.stream(), src.name());
      if (values.empty()) throw DomainError("test: no observations in " + src.name());
      if (test_k && (*test_k < 1 || *test_k > values.size())) {
        throw DomainError("test: k must lie in [1, " + std::to_string(values.size()) + "]");
      }
      TestOutcome o;
      if (stat == "simes") {
        const auto p = pvalues_input ? values : pvalues_from_normals(values);
        o = simes_test(p, common.alpha, k_opt);
      } else if (stat == "exp-order") {
        o = exp_order_threshold_test(values, *test_k, common.alpha);
      } else {
        const ObservationVector x(std::move(values));
        if (stat == "order" || stat == "order-chisq") {
          const auto ref = stat == "order" ? Reference::kStdNormal : Reference::kScaledChiSq;
          o = k_data_driven ? order_threshold_test_data_driven(x, common.alpha, ref)
              : ref == Reference::kStdNormal ? order_threshold_test(x, *test_k, common.alpha)
                                              : order_threshold_test_chisq(x, *test_k, common.alpha);
        } else if (stat == "hard") {
          const double d = delta ? *delta : recommended_delta(x.size(), 1.0, 2.0);
          o = hard_threshold_test(x, d, common.alpha,
                                  exact_centering ? HardCentering::kExact : HardCentering::kAsymptotic);
        } else {
          o = chisq_test(x, common.alpha);
        }
      }
      out << outcome_json(stat, o).dump() << '\n';
      return kExitOk;
    }

    if (hanova->parsed()) {
      if (hanova_k.has_value() == hanova_dd) throw UsageError("hanova: give exactly one of --k and --k-data-driven");
      Input src(hanova_input, in);
      const auto g = GroupedData::summarize(read_rows(src.stream(), src.name()));
      const std::size_t k = hanova_dd ? hanova_storey_k(g) : *hanova_k;
      if (k < 1 || k > g.groups()) {
        throw DomainError("hanova: k must lie in [1, " + std::to_string(g.groups()) + "]");
      }
      const auto o = hanova_order_test(g, k, common.alpha,
                                       plug_in ? NullVariance::kPlugInRatio : NullVariance::kSaturatedRatio);
      const auto f = f_test(g, common.alpha);
      json j;
      j["groups"] = g.groups();
      j["per_group"] = g.per_group();
      j["f_stat"] = g.f_stat();
      j["f_p_value"] = f.p_value;
      j["f_reject"] = f.reject;
      j["statistic"] = o.statistic;
      j["standardized"] = o.standardized;
      j["null_variance"] = o.null_variance;
      j["p_value"] = o.p_value;
      j["reject"] = o.reject;
      j["alpha"] = common.alpha;
      j["k_used"] = o.k_used;
      out << j.dump() << '\n';
      return kExitOk;
    }

    if (simulate->parsed()) {
      json cfg;
      {
        Input src(config_path, in);
        try {
          cfg = json::parse(src.stream());
        } catch (const json::parse_error& e) {
          throw UsageError(std::string("config: ") + e.what());
        }
      }
      SimulateConfig c;
      try {
        c = parse_simulate_config(cfg, common.seed, common.threads);
      } catch (const json::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
      }
      if (!output.empty()) c.output = output;
      const auto result = c.power ? run_power_study(c.scenario, c.statistics, c.options, c.shifts)
                                  : run_type1_study(c.scenario, c.statistics, c.options);
      write_text(c.output, result.to_csv(), out);
      return kExitOk;
    }

    if (reproduce->parsed()) {
      ReproduceOptions o;
      o.replicates = replicates;
      o.seed = common.seed;
      o.threads = common.threads;
      const auto figures = figure_names();
      const bool figure = std::find(figures.begin(), figures.end(), target) != figures.end();
      const auto tables = table_names();
      if (!figure && std::find(tables.begin(), tables.end(), target) == tables.end()) {
        throw UsageError("reproduce: unknown name '" + target + "'");
      }
      if (figure && published_only) throw UsageError("reproduce: figures have no published values");

      std::string simulated, published;
      if (figure) {
        simulated = density_csv(reproduce_figure(target, o));
      } else {
        published = published_table(target).to_csv();
        if (!published_only) simulated = reproduce_table(target, o).to_csv();
      }
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const std::filesystem::path dir(out_dir);
        if (!published_only) write_text((dir / (target + ".csv")).string(), simulated, out);
        if (!published.empty()) write_text((dir / (target + ".published.csv")).string(), published, out);
      } else {
        out << (published_only ? published : simulated);
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitComputation;
  }
  return kExitUsage;
}

}  // namespace orderthresh::cli
