// sdtest: command-line front end.
//
//   sdtest <subcommand> [--config file] [--seed u64] [--threads k] [--out path]
//
// --out naming a file (.csv or .svg) writes that file; any other value is a
// directory that receives <subcommand>.csv and manifest.json. Without --out
// the CSV goes to stdout.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sdtest/config.hpp"
#include "sdtest/csv.hpp"
#include "sdtest/efficiency.hpp"
#include "sdtest/experiment.hpp"
#include "sdtest/montecarlo.hpp"
#include "sdtest/oracle.hpp"
#include "sdtest/plot.hpp"
#include "sdtest/statistics.hpp"

namespace fs = std::filesystem;
using namespace sdtest;

namespace {

constexpr int kExitError = 1;
constexpr int kExitIncomplete = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
};

std::string join_csv(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

/// Every option given on the command line, for the manifest.
std::map<std::string, std::string> echoed_flags(const CLI::App& app, const CLI::App* sub) {
  std::map<std::string, std::string> flags;
  auto collect = [&](const CLI::App& a) {
    for (const CLI::Option* opt : a.get_options()) {
      if (opt->count() == 0 || opt->get_name() == "--help") continue;
      std::string value;
      for (const auto& r : opt->results()) value += (value.empty() ? "" : " ") + r;
      flags[opt->get_name()] = value;
    }
  };
  collect(app);
  if (sub) collect(*sub);
  if (sub) flags["subcommand"] = sub->get_name();
  return flags;
}

bool names_file(const std::string& out) {
  const std::string ext = fs::path(out).extension().string();
  return ext == ".csv" || ext == ".svg" || ext == ".txt";
}

/// Writes a CSV to stdout, a file, or a directory with a manifest.
void emit(const std::string& csv, const std::string& name, const Common& common,
          const std::map<std::string, std::string>& flags) {
  if (common.out.empty()) {
    std::cout << csv;
    return;
  }
  fs::path file;
  if (names_file(common.out)) {
    file = common.out;
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
  } else {
    fs::create_directories(common.out);
    file = fs::path(common.out) / (name + ".csv");
    nlohmann::json manifest;
    manifest["version"] = version();
    manifest["flags"] = flags;
    manifest["files"] = {file.string()};
    manifest["status"] = "complete";
    std::ofstream(fs::path(common.out) / "manifest.json", std::ios::binary) << manifest.dump(2) << "\n";
  }
  std::ofstream f(file, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + file.string());
  f << csv;
}

/// Preset name, or an INI file with a [pair] section.
AlternativePair resolve_pair(const std::string& spec, const Common& common, double eta) {
  if (spec.empty()) {
    if (common.config.empty()) throw ConfigError("--pair or --config is required");
    return load_config(common.config).pair(eta);
  }
  if (fs::is_regular_file(spec)) return load_config(spec).pair(eta);
  return preset_pair(spec, eta);
}

std::vector<StatisticKind> statistics_from(const std::vector<std::string>& names) {
  return parse_statistics(names);
}

unsigned threads_of(const Common& c) { return c.threads.value_or(0); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-sided two-sample stochastic dominance tests"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(version()));
  Common common;
  app.add_option("--config", common.config, "Experiment configuration (INI with [pair], [plan], [grid])");
  app.add_option("--seed", common.seed, "Base seed");
  app.add_option("--threads", common.threads, "Worker threads (overrides SDTEST_THREADS)");
  app.add_option("--out", common.out, "Output file or directory");

  // stat
  auto* stat = app.add_subcommand("stat", "Evaluate a statistic on two samples");
  std::string stat_name = "ks";
  std::vector<double> xs;
  std::vector<double> ys;
  std::string ties = "error";
  stat->add_option("--statistic", stat_name, "ks | tstar | tcirc | w | t:<scheme> | w:<scheme>");
  stat->add_option("--x", xs, "First sample")->delimiter(',')->required();
  stat->add_option("--y", ys, "Second sample")->delimiter(',')->required();
  stat->add_option("--ties", ties, "error | random")->check(CLI::IsMember({"error", "random"}));

  // efficiency
  auto* eff = app.add_subcommand("efficiency", "e_TV over an eta grid");
  std::string pair_spec;
  std::string eta_grid = "0.01:0.99:0.01";
  eff->add_option("--pair", pair_spec, "Preset name or INI file with a [pair] section");
  eff->add_option("--eta-grid", eta_grid, "start:stop:step or a list");

  // oracle
  auto* orc = app.add_subcommand("oracle", "Exact null distribution by enumeration (N <= 16)");
  std::string oracle_stat = "ks";
  std::int64_t om = 0, on = 0;
  orc->add_option("--statistic", oracle_stat);
  orc->add_option("--m", om)->required();
  orc->add_option("--n", on)->required();

  // critval
  auto* crit = app.add_subcommand("critval", "Monte Carlo critical values");
  std::vector<std::string> crit_stats{"ks", "tstar", "tcirc", "w"};
  std::int64_t cm = 0, cn = 0;
  std::vector<double> crit_alphas{0.01, 0.05};
  std::int64_t crit_r = kDefaultCriticalReplicates;
  std::string sampling = "values";
  crit->add_option("--statistic", crit_stats)->delimiter(',');
  crit->add_option("--m", cm)->required();
  crit->add_option("--n", cn)->required();
  crit->add_option("--alpha", crit_alphas)->delimiter(',');
  crit->add_option("--replicates", crit_r);
  crit->add_option("--sampling", sampling)->check(CLI::IsMember({"values", "ranks"}));

  // power
  auto* pow = app.add_subcommand("power", "Empirical power at simulated critical values");
  std::vector<std::string> power_stats{"ks", "tstar", "tcirc"};
  std::int64_t pm = 0, pn = 0;
  double p_alpha = 0.01;
  std::int64_t p_r = kDefaultPowerReplicates;
  std::int64_t p_cr = kDefaultCriticalReplicates;
  double p_theta = 1.0;
  std::optional<double> p_q;
  bool p_ve = true;
  pow->add_option("--pair", pair_spec);
  pow->add_option("--statistic", power_stats)->delimiter(',');
  pow->add_option("--m", pm)->required();
  pow->add_option("--n", pn)->required();
  pow->add_option("--alpha", p_alpha);
  pow->add_option("--replicates", p_r);
  pow->add_option("--critical-replicates", p_cr);
  pow->add_option("--theta", p_theta, "Fixed contamination weight in (0,1]");
  pow->add_option("--q", p_q, "Contamination path theta_N = N^-q (overrides --theta)");
  pow->add_option("--ve", p_ve, "Include V at the efficiency-scaled sizes");

  // ratio
  auto* rat = app.add_subcommand("ratio", "Empirical sample-size ratio of two tests");
  std::string bench = "ks", chall = "tstar";
  std::int64_t r_total = 0;
  double r_eta = 0.5, r_alpha = 0.05, r_theta = 1.0, r_res = 0.02;
  std::optional<double> r_q;
  std::int64_t r_r = kDefaultPowerReplicates, r_cr = kDefaultCriticalReplicates, r_max = 64;
  rat->add_option("--pair", pair_spec);
  rat->add_option("--benchmark", bench);
  rat->add_option("--challenger", chall);
  rat->add_option("--N", r_total)->required();
  rat->add_option("--eta", r_eta);
  rat->add_option("--alpha", r_alpha);
  rat->add_option("--theta", r_theta);
  rat->add_option("--q", r_q);
  rat->add_option("--replicates", r_r);
  rat->add_option("--critical-replicates", r_cr);
  rat->add_option("--resolution", r_res);
  rat->add_option("--max-multiple", r_max);

  // mdev
  auto* mdev = app.add_subcommand("mdev", "Moderate-deviation slopes under the null");
  std::string mdev_stat = "ks";
  std::vector<std::int64_t> totals{100, 400, 1600};
  double exponent = 0.35, mdev_eta = 0.5;
  std::int64_t mdev_r = 100000, target = 0, max_r = 0;
  mdev->add_option("--statistic", mdev_stat);
  mdev->add_option("--totals", totals)->delimiter(',');
  mdev->add_option("--exponent", exponent, "w_N = N^-exponent");
  mdev->add_option("--eta", mdev_eta);
  mdev->add_option("--replicates", mdev_r);
  mdev->add_option("--target-exceedances", target);
  mdev->add_option("--max-replicates", max_r);

  // run
  auto* run = app.add_subcommand("run", "Run a figure-style experiment from --config");

  // plot
  auto* plot = app.add_subcommand("plot", "Render CSVs written by this tool as SVG");
  std::vector<std::string> csv_files;
  std::string x_column;
  plot->add_option("--csv", csv_files)->required();
  plot->add_option("--x", x_column, "Column for the horizontal axis");

  CLI11_PARSE(app, argc, argv);
  const CLI::App* sub = app.get_subcommands().front();
  const auto flags = echoed_flags(app, sub);
  const std::uint64_t seed = common.seed.value_or(1);

  try {
    if (stat->parsed()) {
      TwoSample sample{xs, ys};
      sample.validate();
      const StatisticKind kind = StatisticKind::parse(stat_name);
      double v = 0.0;
      if (ties == "random") {
        UniformStream stream(seed, 0, StreamTag::kTieBreak);
        v = evaluate(kind, rank_pattern(sample, TiePolicy::kRandomBreak, &stream));
      } else {
        v = evaluate(kind, sample);
      }
      std::printf("%.15g\n", v);
      return 0;
    }

    if (eff->parsed()) {
      const AlternativePair pair = resolve_pair(pair_spec, common, 0.5);
      std::string csv = join_csv(efficiency_header()) + "\n";
      for (const auto& r : efficiency_curve(pair, parse_grid(eta_grid, "--eta-grid"), std::max(1u, threads_of(common))))
        csv += efficiency_row(r).str() + "\n";
      emit(csv, "efficiency", common, flags);
      return 0;
    }

    if (orc->parsed()) {
      const auto dist = exact_null(StatisticKind::parse(oracle_stat), om, on);
      std::string csv = "statistic,m,n,value,count,probability,cdf,version\n";
      std::uint64_t below = 0;
      for (const auto& a : dist.atoms()) {
        below += a.count;
        CsvRow row;
        row.add(dist.statistic().name()).add(om).add(on).add(format_number(a.value, 15)).add(a.count);
        row.add(a.probability.str()).add(Rational(below, dist.assignments()).str()).add(version());
        csv += row.str() + "\n";
      }
      emit(csv, "oracle", common, flags);
      return 0;
    }

    if (crit->parsed()) {
      SimulationPlan plan = null_plan(statistics_from(crit_stats), cm, cn, crit_r, seed);
      plan.null_sampling = parse_sampling(sampling);
      plan.threads = threads_of(common);
      std::string csv = "statistic,m,n,alpha,critical,rank,replicates,seed,sampling,version\n";
      const CriticalValueTable table = critical_values(plan, crit_alphas);
      for (const auto& c : table.entries()) {
        CsvRow row;
        row.add(column_name(c.statistic)).add(c.m).add(c.n).add(c.alpha).add(format_number(c.value, 17));
        row.add(critical_rank(c.alpha, c.replicates)).add(c.replicates).add(c.seed).add(sampling).add(version());
        csv += row.str() + "\n";
      }
      emit(csv, "critval", common, flags);
      return 0;
    }

    if (pow->parsed()) {
      ExperimentConfig cfg;
      const AlternativePair pair = resolve_pair(pair_spec, common, 0.5);
      cfg.first = pair.f1();
      cfg.second = pair.g1();
      cfg.name = pair.name();
      cfg.statistics = statistics_from(power_stats);
      cfg.include_ve = p_ve;
      cfg.replicates = p_r;
      cfg.critical_replicates = p_cr;
      cfg.seed = seed;
      cfg.threads = threads_of(common);
      cfg.theta = p_q ? std::pow(static_cast<double>(pm + pn), -*p_q) : p_theta;
      if (!(cfg.theta > 0.0 && cfg.theta <= 1.0)) throw ConfigError("theta must lie in (0,1]");
      check_alpha(p_alpha, p_cr);
      CriticalValueTable cache;
      const PowerCell cell = power_cell(cfg, pm, pn, {p_alpha}, cache);
      emit(join_csv(power_header(cfg)) + "\n" + power_row(cfg, "power", cell, 0).str() + "\n", "power", common,
           flags);
      return 0;
    }

    if (rat->parsed()) {
      const AlternativePair pair = resolve_pair(pair_spec, common, r_eta);
      const double theta = r_q ? std::pow(static_cast<double>(r_total), -*r_q) : r_theta;
      SampleRatioSettings s;
      s.resolution = r_res;
      s.max_multiple = r_max;
      s.seed = seed;
      s.threads = threads_of(common);
      s.critical.replicates = r_cr;
      s.critical.seed = critical_seed(seed);
      s.critical.sampling = NullSampling::kRanks;
      const auto rep = empirical_sample_ratio(StatisticKind::parse(bench), StatisticKind::parse(chall), pair, theta,
                                              r_total, r_alpha, r_r, s);
      std::vector<std::vector<std::string>> rows{{"record", "benchmark", "challenger", "N", "eta", "alpha", "theta",
                                                  "M", "power", "lower", "upper", "ratio", "ratio_lower",
                                                  "ratio_upper", "saturated", "unbounded", "replicates",
                                                  "critical_replicates", "seed", "version"}};
      auto line = [&](const std::string& kind, std::int64_t M, const PowerEstimate& e) {
        CsvRow row;
        row.add(kind).add(column_name(StatisticKind::parse(bench).name()))
            .add(column_name(StatisticKind::parse(chall).name())).add(r_total).add(r_eta).add(r_alpha).add(theta);
        row.add(M).add(e.p_hat).add(e.lower).add(e.upper).add(rep.ratio).add(rep.ratio_lower).add(rep.ratio_upper);
        row.add(rep.saturated).add(rep.unbounded).add(r_r).add(r_cr).add(seed).add(version());
        return row.str();
      };
      std::string csv = join_csv(rows.front()) + "\n";
      csv += line("challenger", r_total, rep.challenger) + "\n";
      for (const auto& p : rep.probes) csv += line("probe", p.total, p.power) + "\n";
      emit(csv, "ratio", common, flags);
      return 0;
    }

    if (mdev->parsed()) {
      SlopeSettings s;
      s.eta = mdev_eta;
      s.seed = seed;
      s.threads = threads_of(common);
      s.target_exceedances = target;
      s.max_replicates = max_r;
      const StatisticKind kind = StatisticKind::parse(mdev_stat);
      const auto entries = mdev_slope(kind, totals, [exponent](std::int64_t n) {
        return std::pow(static_cast<double>(n), -exponent);
      }, mdev_r, s);
      std::string csv = "statistic,N,m,n,w,threshold,exceedances,replicates,p_hat,slope,flagged,seed,version\n";
      for (const auto& e : entries) {
        CsvRow row;
        row.add(column_name(kind.name())).add(e.total).add(e.m).add(e.n).add(e.w).add(e.threshold);
        row.add(e.exceedances).add(e.replicates).add(e.p_hat).add(e.slope).add(e.flagged).add(seed).add(version());
        csv += row.str() + "\n";
      }
      emit(csv, "mdev", common, flags);
      return 0;
    }

    if (run->parsed()) {
      if (common.config.empty()) throw ConfigError("run: --config is required");
      ExperimentConfig cfg = load_config(common.config);
      if (common.seed) cfg.seed = *common.seed;
      if (common.threads) cfg.threads = *common.threads;
      if (!common.out.empty()) cfg.output = common.out;
      cfg.flags = flags;
      try {
        const auto result = run_experiment(cfg);
        for (const auto& f : result.files) std::cout << f << "\n";
        std::cout << result.manifest << "\n";
      } catch (const ExperimentError& e) {
        std::cerr << "sdtest: " << e.what() << "\nsdtest: partial manifest " << e.manifest() << "\n";
        return kExitIncomplete;
      }
      return 0;
    }

    if (plot->parsed()) {
      if (csv_files.size() == 1 && names_file(common.out)) {
        render_plot(csv_files.front(), common.out, x_column);
        return 0;
      }
      for (const auto& csv : csv_files) {
        fs::path svg = fs::path(csv).replace_extension(".svg");
        if (!common.out.empty()) {
          fs::create_directories(common.out);
          svg = fs::path(common.out) / svg.filename();
        }
        render_plot(csv, svg.string(), x_column);
        std::cout << svg.string() << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "sdtest: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
