#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sdtest/config.hpp"
#include "sdtest/experiment.hpp"
#include "sdtest/plot.hpp"

namespace fs = std::filesystem;
using sdtest::ExperimentConfig;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sdtest_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t data_rows(const fs::path& p) { return sdtest::read_csv(p.string()).rows.size(); }

const char* kMinimal = R"([pair]
preset = pareto
[plan]
replicates = 100
critical_replicates = 2000
alpha = 0.01
seed = 7
[grid]
efficiency_eta = 0.5
balanced_n = 100
unbalanced_eta = 0.3
unbalanced_n = 120
)";

}  // namespace

TEST(Grid, RangesAndLists) {
  EXPECT_EQ(sdtest::parse_grid("0.1:0.5:0.1"), (std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5}));
  EXPECT_EQ(sdtest::parse_grid("200, 300 400"), (std::vector<double>{200, 300, 400}));
  EXPECT_EQ(sdtest::parse_grid("0.01:0.99:0.01").size(), 99u);
  EXPECT_THROW(sdtest::parse_grid("0.1:0.5"), sdtest::ConfigError);
  EXPECT_THROW(sdtest::parse_grid("abc"), sdtest::ConfigError);
  EXPECT_THROW(sdtest::parse_int_grid({"1.5"}, "n"), sdtest::ConfigError);
}

TEST(Config, PresetAndExplicitPairs) {
  const auto cfg = sdtest::parse_config_text(kMinimal);
  EXPECT_EQ(cfg.name, "pareto");
  EXPECT_EQ(cfg.replicates, 100);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.balanced_totals, (std::vector<std::int64_t>{100}));
  EXPECT_NO_THROW(cfg.validate());

  const auto lap = sdtest::parse_config_text(R"([pair]
first = {family:"laplace", a:0.0, b:1.0}
second = {family:"laplace", a:1.0, b:1.25}
[plan]
statistics = ks t:explicit:0.2;0.5 w:power:0.25
[grid]
efficiency_eta = 0.5
)");
  EXPECT_EQ(lap.first.cdf(0.0), 0.5);
  ASSERT_EQ(lap.statistics.size(), 3u);
  EXPECT_EQ(lap.statistics[1].name(), sdtest::StatisticKind::parse("t:explicit:0.2,0.5").name());
}

TEST(Config, Errors) {
  EXPECT_THROW(sdtest::parse_config_text("[pair]\npreset = pareto\n[plan]\nreplicats = 3\n"), sdtest::ConfigError);
  EXPECT_THROW(sdtest::parse_config_text("[plan]\nreplicates = 3\n"), sdtest::ConfigError);
  EXPECT_THROW(sdtest::parse_config_text("[pair]\npreset = nope\n"), sdtest::ConfigError);
  EXPECT_THROW(sdtest::parse_config_text("[pair]\npreset = fan\npreset = fan\n"), sdtest::ConfigError);
  auto cfg = sdtest::parse_config_text("[pair]\npreset = fan\n");
  EXPECT_THROW(cfg.validate(), sdtest::ConfigError);  // every grid empty
  cfg.balanced_totals = {100};
  cfg.critical_replicates = 1000;
  EXPECT_THROW(cfg.validate(), sdtest::InsufficientReplicatesError);
}

TEST(Config, ShippedPresetsParse) {
  for (const auto& entry : fs::recursive_directory_iterator(SDTEST_SOURCE_DIR "/configs")) {
    if (entry.path().extension() != ".ini") continue;
    SCOPED_TRACE(entry.path().string());
    const auto cfg = sdtest::load_config(entry.path().string());
    EXPECT_NO_THROW(cfg.validate());
    if (entry.path().string().find("-desk") != std::string::npos) {
      EXPECT_EQ(cfg.replicates, 2000);
      EXPECT_EQ(cfg.alpha, 0.01);
      for (auto n : cfg.balanced_totals) EXPECT_LE(n, 500);
      EXPECT_LE(cfg.unbalanced_total, 500);
    }
  }
}

TEST(RunExperiment, MinimalConfigWritesThreeOneRowCsvs) {
  auto cfg = sdtest::parse_config_text(kMinimal);
  cfg.output = scratch("minimal").string();
  const auto result = sdtest::run_experiment(cfg);
  for (const char* f : {"efficiency.csv", "balanced.csv", "unbalanced.csv"}) {
    ASSERT_TRUE(fs::exists(fs::path(cfg.output) / f)) << f;
    EXPECT_EQ(data_rows(fs::path(cfg.output) / f), 1u) << f;
  }
  EXPECT_EQ(result.completed_cells.size(), 3u);
  const auto manifest = nlohmann::json::parse(slurp(fs::path(cfg.output) / "manifest.json"));
  EXPECT_EQ(manifest["status"], "complete");
  EXPECT_EQ(manifest["config"]["seed"], 7);
}

TEST(RunExperiment, RerunIsByteIdentical) {
  auto cfg = sdtest::parse_config_text(kMinimal);
  cfg.output = scratch("rerun_a").string();
  cfg.threads = 1;
  sdtest::run_experiment(cfg);
  auto again = cfg;
  again.output = scratch("rerun_b").string();
  again.threads = 3;
  sdtest::run_experiment(again);
  for (const char* f : {"efficiency.csv", "balanced.csv", "unbalanced.csv", "balanced.svg"})
    EXPECT_EQ(slurp(fs::path(cfg.output) / f), slurp(fs::path(again.output) / f)) << f;
}

TEST(RunExperiment, FailureLeavesPartialManifest) {
  // T-circ has no admissible grid point at N = 4, so the second cell fails.
  auto cfg = sdtest::parse_config_text(R"([pair]
preset = pareto
[plan]
statistics = tcirc
include_ve = false
replicates = 50
critical_replicates = 2000
plots = false
[grid]
balanced_n = 40 4
)");
  cfg.output = scratch("partial").string();
  EXPECT_THROW(sdtest::run_experiment(cfg), sdtest::ExperimentError);
  const auto manifest = nlohmann::json::parse(slurp(fs::path(cfg.output) / "manifest.json"));
  EXPECT_EQ(manifest["status"], "failed");
  EXPECT_EQ(manifest["failed_cell"], "balanced:N=4");
  ASSERT_EQ(manifest["completed_cells"].size(), 1u);
  EXPECT_EQ(manifest["completed_cells"][0], "balanced:N=40");
  EXPECT_EQ(data_rows(fs::path(cfg.output) / "balanced.csv"), 1u);
}

TEST(RunExperiment, ParetoDeskScaledKsKeepsUp) {
  // V at the efficiency-scaled sizes should not lose to T* beyond MC error.
  auto cfg = sdtest::parse_config_text(R"([pair]
preset = pareto
[plan]
replicates = 2000
critical_replicates = 100000
alpha = 0.01
seed = 20240611
plots = false
[grid]
balanced_n = 200 300 400
)");
  cfg.output = scratch("pareto_desk").string();
  sdtest::run_experiment(cfg);
  const auto t = sdtest::read_csv((fs::path(cfg.output) / "balanced.csv").string());
  ASSERT_EQ(t.rows.size(), 3u);
  for (const auto& r : t.rows) {
    const double ve = std::stod(r[t.column("power_ks_e")]);
    const double ts = std::stod(r[t.column("power_tstar")]);
    const double se = std::sqrt((ve * (1 - ve) + ts * (1 - ts)) / 2000.0);
    EXPECT_GE(ve, ts - 3.0 * se) << "N = " << r[t.column("N")];
  }
}

TEST(PowerHeader, Golden) {
  ExperimentConfig cfg;
  EXPECT_EQ(sdtest::detail::join(sdtest::power_header(cfg)),
            "section,N,m,n,eta_n,alpha,e_tv,m_e,n_e,"
            "power_ks,lower_ks,upper_ks,critical_ks,"
            "power_tstar,lower_tstar,upper_tstar,critical_tstar,"
            "power_tcirc,lower_tcirc,upper_tcirc,critical_tcirc,"
            "power_ks_e,lower_ks_e,upper_ks_e,critical_ks_e,"
            "replicates,critical_replicates,seed,version");
  EXPECT_EQ(sdtest::detail::join(sdtest::efficiency_header()),
            "eta,e_tv,argmax_astar,sup_abar,sup_astar,argmax_abar,version");
}

TEST(Plot, EmptyDataIsAnErrorAndWritesNothing) {
  const fs::path dir = scratch("plot_empty");
  std::ofstream(dir / "e.csv") << "eta,e_tv,argmax_astar\n";
  EXPECT_THROW(sdtest::render_plot((dir / "e.csv").string(), (dir / "e.svg").string()), sdtest::ParseError);
  EXPECT_FALSE(fs::exists(dir / "e.svg"));
}

TEST(Plot, MalformedCsvNamesFileAndLine) {
  const fs::path dir = scratch("plot_bad");
  std::ofstream(dir / "e.csv") << "eta,e_tv,argmax_astar\n0.1,1.0,0.5\n0.2,1.1\n";
  try {
    sdtest::render_plot((dir / "e.csv").string(), (dir / "e.svg").string());
    FAIL() << "no error";
  } catch (const sdtest::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("e.csv:3"), std::string::npos) << e.what();
  }
  std::ofstream(dir / "f.csv") << "eta,e_tv,argmax_astar\n0.1,x,0.5\n";
  try {
    sdtest::render_plot((dir / "f.csv").string(), (dir / "f.svg").string());
    FAIL() << "no error";
  } catch (const sdtest::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("f.csv:2"), std::string::npos) << e.what();
  }
  EXPECT_FALSE(fs::exists(dir / "e.svg"));
}

TEST(Plot, SingleRowGivesMarkersOnly) {
  const fs::path dir = scratch("plot_one");
  std::ofstream(dir / "e.csv") << "eta,e_tv,argmax_astar\n0.5,1.2,0.4\n";
  sdtest::render_plot((dir / "e.csv").string(), (dir / "e.svg").string());
  const std::string svg = slurp(dir / "e.svg");
  EXPECT_EQ(svg.find("<polyline"), std::string::npos);
  std::size_t circles = 0;
  for (auto p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) ++circles;
  EXPECT_EQ(circles, 2u);  // one marker per series
}

TEST(Plot, MaximumOrdinateIsTheCsvMaximum) {
  const fs::path dir = scratch("plot_max");
  ExperimentConfig cfg = sdtest::parse_config_text("[pair]\npreset = laplace\n[grid]\nefficiency_eta = 0.1:0.9:0.2\n");
  cfg.output = dir.string();
  sdtest::run_experiment(cfg);
  const auto table = sdtest::read_csv((dir / "efficiency.csv").string());
  const auto spec = sdtest::plot_spec_from_csv(table, "efficiency.csv");
  double plotted = 0.0, tabulated = 0.0;
  for (const auto& [x, y] : spec.series.front().points) plotted = std::max(plotted, y);
  for (const auto& r : table.rows) tabulated = std::max(tabulated, std::stod(r[table.column("e_tv")]));
  EXPECT_EQ(plotted, tabulated);
  EXPECT_TRUE(fs::exists(dir / "efficiency.svg"));
}

TEST(Plot, BalancedAxisFollowsTheVaryingColumn) {
  const fs::path dir = scratch("plot_axis");
  std::ofstream(dir / "b.csv") << "section,N,alpha,power_ks\nbalanced,500,0.001,0.1\nbalanced,500,0.002,0.2\n";
  const auto spec = sdtest::plot_spec_from_csv(sdtest::read_csv((dir / "b.csv").string()), "b.csv");
  EXPECT_EQ(spec.x_label, "alpha");
}
