#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "orderthresh/calibration.hpp"
#include "orderthresh/cli.hpp"
#include "orderthresh/errors.hpp"
#include "orderthresh/single_sequence.hpp"

using namespace orderthresh;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out;
  std::ostringstream err;
  const int status = cli::parse_and_dispatch(args, in, out, err);
  return {status, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) v.push_back(l);
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> v;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) v.push_back(c);
  return v;
}

std::string six(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("orderthresh-cli-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string sample_values(std::size_t n, double shift) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < n; ++i) os << (static_cast<double>(i % 11) - 5.0) / 3.0 + (i < 5 ? shift : 0.0) << '\n';
  return os.str();
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).status, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).status, cli::kExitUsage);
  const auto r = run({"calibrate", "--n", "10"});
  EXPECT_EQ(r.status, cli::kExitUsage);
  EXPECT_NE(r.err.find("--k"), std::string::npos);
  EXPECT_EQ(run({"calibrate", "--n", "10", "--k", "11"}).status, cli::kExitUsage);
  EXPECT_EQ(run({"test", "--stat", "order"}, "1\n2\n").status, cli::kExitUsage);
  EXPECT_EQ(run({"test", "--stat", "bogus", "--k", "1"}, "1\n").status, cli::kExitUsage);
  EXPECT_EQ(run({"test", "--stat", "order", "--k", "2", "--alpha", "1.5"}, "1\n").status, cli::kExitUsage);
  EXPECT_EQ(run({"test", "--stat", "order", "--k", "1", "--alpha", "0"}, "1\n").status, cli::kExitUsage);
  EXPECT_EQ(run({"reproduce", "table99"}).status, cli::kExitUsage);
  EXPECT_EQ(run({"--help"}).status, cli::kExitOk);
}

TEST(Cli, CalibrateLayoutAndRoundTrip) {
  const auto r = run({"calibrate", "--n", "500", "--k", "22"});
  ASSERT_EQ(r.status, cli::kExitOk) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 503u);
  EXPECT_EQ(l[0], "n,k,mu,sigma2");
  EXPECT_EQ(l[2], "i,nu_tilde,alpha");
  const auto t = make_calibration_table(500, 22);
  const auto head = split(l[1]);
  ASSERT_EQ(head.size(), 4u);
  EXPECT_EQ(std::stoul(head[0]), 500u);
  EXPECT_EQ(std::stoul(head[1]), 22u);
  EXPECT_EQ(six(std::stod(head[2])), six(t.mu));
  EXPECT_EQ(six(std::stod(head[3])), six(t.sigma2));
  for (std::size_t i = 0; i < 500; ++i) {
    const auto row = split(l[3 + i]);
    ASSERT_EQ(row.size(), 3u);
    EXPECT_EQ(std::stoul(row[0]), i + 1);
    EXPECT_EQ(six(std::stod(row[1])), six(t.nu_tilde[i]));
    EXPECT_EQ(six(std::stod(row[2])), six(t.alpha[i]));
    EXPECT_NEAR(std::stod(row[2]), t.alpha[i], 5e-6 * t.alpha[i]);
  }
}

TEST(Cli, CalibrateWritesOnlyTheDeclaredFile) {
  TempDir dir;
  const auto path = (dir / "cal.csv").string();
  const auto r = run({"calibrate", "--n", "5", "--k", "2", "--out", path});
  ASSERT_EQ(r.status, cli::kExitOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(std::distance(fs::directory_iterator(dir.path()), fs::directory_iterator{}), 1);
  std::ifstream f(path);
  std::string first;
  std::getline(f, first);
  EXPECT_EQ(first, "n,k,mu,sigma2");
}

TEST(Cli, TestOrderJson) {
  const std::string data = sample_values(100, 4.0);
  const auto r = run({"test", "--stat", "order", "--k", "5", "--alpha", "0.05"}, data);
  ASSERT_EQ(r.status, cli::kExitOk) << r.err;
  ASSERT_EQ(lines(r.out).size(), 1u);
  const auto j = json::parse(r.out);
  std::vector<double> x;
  std::istringstream is(data);
  for (double v; is >> v;) x.push_back(v);
  const auto want = order_threshold_test(ObservationVector(x), 5, 0.05);
  EXPECT_EQ(j.at("statistic").get<double>(), want.statistic);
  EXPECT_EQ(j.at("standardized").get<double>(), want.standardized);
  EXPECT_EQ(j.at("p_value").get<double>(), want.p_value);
  EXPECT_EQ(j.at("reject").get<bool>(), want.reject);
  EXPECT_EQ(j.at("k_used").get<std::size_t>(), 5u);
}

TEST(Cli, TestOtherStatistics) {
  const std::string data = sample_values(200, 3.0);
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"test", "--stat", "order-chisq", "--k", "10"},
           {"test", "--stat", "order", "--k-data-driven"},
           {"test", "--stat", "hard"},
           {"test", "--stat", "hard", "--delta", "3.5", "--exact-centering"},
           {"test", "--stat", "simes", "--k-opt", "5"},
           {"test", "--stat", "chisq"},
       }) {
    const auto r = run(args, data);
    ASSERT_EQ(r.status, cli::kExitOk) << args[2] << ": " << r.err;
    const auto j = json::parse(r.out);
    EXPECT_TRUE(j.contains("p_value"));
    EXPECT_TRUE(j.contains("reject"));
  }
  const auto chi = json::parse(run({"test", "--stat", "order-chisq", "--k", "10"}, data).out);
  EXPECT_TRUE(chi.contains("b"));
  EXPECT_TRUE(chi.contains("nu"));
  const auto simes = json::parse(run({"test", "--stat", "simes", "--pvalues"}, "0.01\n0.2\n0.9\n").out);
  EXPECT_NEAR(simes.at("statistic").get<double>(), 0.03, 1e-15);
  EXPECT_TRUE(simes.at("reject").get<bool>());
  const auto exp = run({"test", "--stat", "exp-order", "--k", "2"}, "0.3\n2.0\n0.1\n1.2\n0.7\n");
  ASSERT_EQ(exp.status, cli::kExitOk) << exp.err;
  EXPECT_NEAR(json::parse(exp.out).at("statistic").get<double>(), 3.2, 1e-15);
}

TEST(Cli, InputErrors) {
  const auto bad = run({"test", "--stat", "order", "--k", "1"}, "1.0\n\n2.0\nabc\n");
  EXPECT_EQ(bad.status, cli::kExitComputation);
  EXPECT_NE(bad.err.find("<stdin>:4"), std::string::npos) << bad.err;
  EXPECT_EQ(run({"test", "--stat", "order", "--k", "9"}, "1\n2\n").status, cli::kExitComputation);
  EXPECT_EQ(run({"test", "--stat", "order", "--k", "1"}, "").status, cli::kExitComputation);
  EXPECT_EQ(run({"test", "--stat", "exp-order", "--k", "1"}, "-1\n2\n").status, cli::kExitComputation);
  EXPECT_EQ(run({"test", "--stat", "order", "--k", "1", "/nonexistent/file"}).status, cli::kExitComputation);
  std::istringstream rows("1,2\n\n3,x\n");
  try {
    cli::read_rows(rows, "groups.csv");
    FAIL() << "expected a parse error";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("groups.csv:3"), std::string::npos) << e.what();
  }
}

TEST(Cli, Hanova) {
  std::ostringstream csv;
  for (int i = 0; i < 40; ++i) {
    csv << (i % 7) * 0.3 + (i < 3 ? 4.0 : 0.0) << ',' << (i % 5) * 0.2 << ',' << -(i % 3) * 0.25 << '\n';
  }
  const auto r = run({"hanova", "--k", "6"}, csv.str());
  ASSERT_EQ(r.status, cli::kExitOk) << r.err;
  const auto j = json::parse(r.out);
  for (const char* key : {"f_stat", "statistic", "standardized", "null_variance", "p_value", "reject", "k_used"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j.at("groups").get<int>(), 40);
  EXPECT_EQ(j.at("per_group").get<int>(), 3);
  EXPECT_NEAR(j.at("null_variance").get<double>(), 1.5, 1e-15);
  const auto full = json::parse(run({"hanova", "--k", "40"}, csv.str()).out);
  EXPECT_NEAR(full.at("statistic").get<double>(), 39 * full.at("f_stat").get<double>(), 1e-9);
  const auto dd = run({"hanova", "--k-data-driven", "--plug-in-variance"}, csv.str());
  ASSERT_EQ(dd.status, cli::kExitOk) << dd.err;
  EXPECT_EQ(run({"hanova", "--k", "3"}, "1,1\n2,2\n").status, cli::kExitComputation);
  EXPECT_EQ(run({"hanova", "--k", "1"}, "1,2\n2\n").status, cli::kExitComputation);
  EXPECT_EQ(run({"hanova"}, csv.str()).status, cli::kExitUsage);
}

TEST(Cli, SimulateConfig) {
  TempDir dir;
  const auto cfg_path = (dir / "study.json").string();
  {
    std::ofstream f(cfg_path);
    f << R"({"kind": "single", "dims": {"n": 100}, "statistics": ["order:5", "hard:3.0", "simes"],
             "replicates": 200, "seed": 4, "scenario": {"eta": "example3.3", "shifts": [1, 31]}})";
  }
  const auto a = run({"simulate", cfg_path, "--threads", "1"});
  const auto b = run({"simulate", cfg_path, "--threads", "3"});
  ASSERT_EQ(a.status, cli::kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto l = lines(a.out);
  ASSERT_EQ(l.size(), 7u);
  EXPECT_EQ(l[0], "scenario,statistic,parameter,rate,replicates,se");
  EXPECT_EQ(split(l[1])[0], "H1");
  EXPECT_EQ(split(l[4])[0], "H31");

  const auto out_path = (dir / "null.csv").string();
  const auto null = run({"simulate", "-", "--out", out_path},
                        R"({"kind": "hanova", "dims": {"a": 50, "n": 3}, "statistics": ["hanova:7", "f"], "replicates": 100})");
  ASSERT_EQ(null.status, cli::kExitOk) << null.err;
  EXPECT_TRUE(null.out.empty());
  EXPECT_TRUE(fs::exists(out_path));

  for (const std::string bad : {
           R"({"kind": "single", "dims": {"n": 100}, "statistics": ["order:5"], "replicates": 50})",
           R"({"kind": "single", "dims": {"n": 100}, "statistics": ["f"], "replicates": 200})",
           R"({"kind": "single", "dims": {"n": 100}, "statistics": ["order:500"], "replicates": 200})",
           R"({"kind": "single", "dims": {"n": 100}, "statistics": ["order:5"], "replicates": 200, "extra": 1})",
           R"({"kind": "cube", "dims": {"n": 100}, "statistics": ["order:5"], "replicates": 200})",
           R"({"kind": "single", "dims": {"n": 100}, "statistics": ["order:5"], "replicates": 200,
               "scenario": {"eta": "example9"}})",
           R"({"kind": "single", "dims": {"n": 100}, "statistics": ["order:5"], "replicates": 200,
               "scenario": {"eta": [1, 2], "shifts": [4]}})",
           R"({not json)",
       }) {
    const auto r = run({"simulate", "-"}, bad);
    EXPECT_EQ(r.status, cli::kExitUsage) << bad;
    EXPECT_EQ(lines(r.err).size(), 1u) << r.err;
  }
}

TEST(Cli, SeedFromEnvironment) {
  const std::string cfg =
      R"({"kind": "single", "dims": {"n": 50}, "statistics": ["order:3"], "replicates": 500})";
  setenv("ORDER_THRESH_SEED", "77", 1);
  const auto env = run({"simulate", "-"}, cfg);
  unsetenv("ORDER_THRESH_SEED");
  const auto flag = run({"simulate", "-", "--seed", "77"}, cfg);
  const auto other = run({"simulate", "-", "--seed", "78"}, cfg);
  ASSERT_EQ(env.status, cli::kExitOk) << env.err;
  EXPECT_EQ(env.out, flag.out);
  EXPECT_NE(env.out, other.out);
  setenv("ORDER_THRESH_SEED", "seven", 1);
  EXPECT_EQ(run({"simulate", "-"}, cfg).status, cli::kExitUsage);
  unsetenv("ORDER_THRESH_SEED");
}

TEST(Cli, ReproduceTableShape) {
  const auto r = run({"reproduce", "table3", "--replicates", "300", "--seed", "7"});
  ASSERT_EQ(r.status, cli::kExitOk) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 5u);
  for (const auto& line : l) EXPECT_EQ(split(line).size(), 9u) << line;
  const auto pub = run({"reproduce", "table3", "--published"});
  ASSERT_EQ(pub.status, cli::kExitOk);
  EXPECT_EQ(lines(pub.out)[0], l[0]);
  EXPECT_NE(pub.out.find("0.0559"), std::string::npos);

  TempDir dir;
  const auto w = run({"reproduce", "table3", "--replicates", "100", "--out", dir.path().string()});
  ASSERT_EQ(w.status, cli::kExitOk) << w.err;
  EXPECT_TRUE(fs::exists(dir / "table3.csv"));
  EXPECT_TRUE(fs::exists(dir / "table3.published.csv"));
  EXPECT_EQ(run({"reproduce", "fig1", "--published"}).status, cli::kExitUsage);
}
