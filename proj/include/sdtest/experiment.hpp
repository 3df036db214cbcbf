// experiment.hpp
//
// Figure-style experiments: an efficiency curve over eta, empirical powers
// for balanced partitions over N (or over alpha), and empirical powers for
// unbalanced partitions over eta_N. Every power row carries each configured
// statistic plus V at the efficiency-scaled sizes (column suffix ks_e).

#pragma once

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sdtest/config.hpp"
#include "sdtest/csv.hpp"
#include "sdtest/efficiency.hpp"
#include "sdtest/montecarlo.hpp"
#include "sdtest/plot.hpp"
#include "sdtest/rng.hpp"

namespace sdtest {

/// Label used for V at the scaled sizes.
inline constexpr const char* kScaledKsName = "ks_e";
/// Stream label separating critical-value replicates from power replicates.
inline constexpr std::uint64_t kCriticalSeedLabel = 0xC217;

inline std::uint64_t critical_seed(std::uint64_t seed) { return derive_seed(seed, kCriticalSeedLabel); }

struct ExperimentResult {
  std::vector<std::string> files;
  std::vector<std::string> completed_cells;
  std::string manifest;
};

class ExperimentError : public Error {
 public:
  ExperimentError(const std::string& what, std::string manifest) : Error(what), manifest_(std::move(manifest)) {}
  const std::string& manifest() const noexcept { return manifest_; }

 private:
  std::string manifest_;
};

/// Column-safe statistic name (scheme lists use commas).
inline std::string column_name(std::string name) {
  std::replace(name.begin(), name.end(), ',', ';');
  return name;
}

inline std::vector<std::string> efficiency_header() {
  return {"eta", "e_tv", "argmax_astar", "sup_abar", "sup_astar", "argmax_abar", "version"};
}

inline CsvRow efficiency_row(const EfficiencyReport& r) {
  CsvRow row;
  row.add(r.eta).add(r.e_tv).add(r.argmax_astar).add(r.sup_abar).add(r.sup_astar).add(r.argmax_abar).add(version());
  return row;
}

/// Statistic labels of a power row, in column order.
inline std::vector<std::string> power_labels(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& k : cfg.statistics) out.push_back(column_name(k.name()));
  if (cfg.include_ve) out.push_back(kScaledKsName);
  return out;
}

inline std::vector<std::string> power_header(const ExperimentConfig& cfg) {
  std::vector<std::string> h{"section", "N", "m", "n", "eta_n", "alpha", "e_tv", "m_e", "n_e"};
  for (const auto& s : power_labels(cfg))
    for (const char* field : {"power_", "lower_", "upper_", "critical_"}) h.push_back(field + s);
  for (const char* tail : {"replicates", "critical_replicates", "seed", "version"}) h.push_back(tail);
  return h;
}

/// Powers of one (m, n) cell at every requested alpha.
struct PowerCell {
  std::int64_t m = 0;
  std::int64_t n = 0;
  double e_tv = std::numeric_limits<double>::quiet_NaN();
  std::int64_t m_e = 0;
  std::int64_t n_e = 0;
  std::vector<double> alphas;
  std::vector<std::vector<PowerEstimate>> estimates;  // [alpha][statistic]
};

namespace detail {

/// Level-alpha critical values for the statistics at (m, n), computed once.
inline const CriticalValue& cached_critical(CriticalValueTable& cache, const ExperimentConfig& cfg,
                                            const StatisticKind& kind, std::int64_t m, std::int64_t n,
                                            const std::vector<double>& alphas, double alpha) {
  if (const CriticalValue* hit = cache.find(kind.name(), m, n, alpha)) return *hit;
  SimulationPlan null = null_plan({kind}, m, n, cfg.critical_replicates, critical_seed(cfg.seed));
  null.null_sampling = cfg.critical_sampling;
  null.threads = cfg.threads;
  const CriticalValueTable fresh = critical_values(null, alphas);
  for (const auto& entry : fresh.entries()) cache.add(entry);
  return cache.at(kind.name(), m, n, alpha);
}

inline std::vector<std::vector<PowerEstimate>> count_at_levels(const SimulationPlan& plan,
                                                               const std::vector<std::string>& labels,
                                                               const std::vector<double>& alphas,
                                                               CriticalValueTable& cache, const ExperimentConfig& cfg) {
  const auto values = simulate(plan);
  std::vector<std::vector<PowerEstimate>> out;
  for (double alpha : alphas) {
    std::vector<PowerEstimate> row;
    for (std::size_t s = 0; s < plan.statistics.size(); ++s) {
      const double c = cached_critical(cache, cfg, plan.statistics[s], plan.m, plan.n, alphas, alpha).value;
      const auto hits = std::count_if(values[s].begin(), values[s].end(), [c](double v) { return v > c; });
      row.push_back(make_power_estimate(labels[s], hits, plan.replicates, c, plan.seed, plan.m, plan.n));
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace detail

inline PowerCell power_cell(const ExperimentConfig& cfg, std::int64_t m, std::int64_t n,
                            const std::vector<double>& alphas, CriticalValueTable& cache) {
  const AlternativePair base = cfg.pair();
  const DistributionPair dist = contaminated_pair(base, cfg.theta);
  PowerCell cell;
  cell.m = m;
  cell.n = n;
  cell.alphas = alphas;
  cell.estimates.assign(alphas.size(), {});
  if (!cfg.statistics.empty()) {
    SimulationPlan plan = alternative_plan(cfg.statistics, m, n, cfg.replicates, cfg.seed, dist, base.describe());
    plan.threads = cfg.threads;
    std::vector<std::string> labels;
    for (const auto& k : cfg.statistics) labels.push_back(column_name(k.name()));
    cell.estimates = detail::count_at_levels(plan, labels, alphas, cache, cfg);
  }
  if (cfg.include_ve) {
    const double eta_n = static_cast<double>(m) / static_cast<double>(m + n);
    cell.e_tv = efficiency_tv(base.with_eta(eta_n)).e_tv;
    // e >= 1 holds up to the optimiser's tolerance.
    std::tie(cell.m_e, cell.n_e) = scaled_sizes(m, n, std::max(cell.e_tv, 1.0));
    SimulationPlan plan = alternative_plan({StatisticKind::ks()}, cell.m_e, cell.n_e, cfg.replicates, cfg.seed, dist,
                                           base.describe());
    plan.threads = cfg.threads;
    const auto ve = detail::count_at_levels(plan, {kScaledKsName}, alphas, cache, cfg);
    for (std::size_t a = 0; a < alphas.size(); ++a) cell.estimates[a].push_back(ve[a].front());
  }
  return cell;
}

inline CsvRow power_row(const ExperimentConfig& cfg, const std::string& section, const PowerCell& cell,
                        std::size_t alpha_index) {
  CsvRow row;
  const std::int64_t total = cell.m + cell.n;
  row.add(section).add(total).add(cell.m).add(cell.n);
  row.add(static_cast<double>(cell.m) / static_cast<double>(total)).add(cell.alphas[alpha_index]);
  row.add(cell.e_tv).add(cell.m_e).add(cell.n_e);
  for (const auto& e : cell.estimates[alpha_index]) row.add(e.p_hat).add(e.lower).add(e.upper).add(e.critical);
  row.add(cfg.replicates).add(cfg.critical_replicates).add(cfg.seed).add(version());
  return row;
}

namespace detail {

inline std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

inline nlohmann::json config_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["name"] = cfg.name;
  j["source"] = cfg.source;
  j["preset"] = cfg.preset;
  j["first"] = to_record(cfg.first);
  j["second"] = to_record(cfg.second);
  j["theta"] = cfg.theta;
  std::vector<std::string> stats;
  for (const auto& k : cfg.statistics) stats.push_back(k.name());
  j["statistics"] = stats;
  j["include_ve"] = cfg.include_ve;
  j["replicates"] = cfg.replicates;
  j["critical_replicates"] = cfg.critical_replicates;
  j["critical_sampling"] = cfg.critical_sampling == NullSampling::kRanks ? "ranks" : "values";
  j["seed"] = cfg.seed;
  j["alpha"] = cfg.alpha;
  j["threads"] = cfg.threads;
  j["output"] = cfg.output;
  j["efficiency_eta"] = cfg.efficiency_etas;
  j["balanced_n"] = cfg.balanced_totals;
  j["balanced_alpha"] = cfg.alphas();
  j["unbalanced_eta"] = cfg.unbalanced_etas;
  j["unbalanced_n"] = cfg.unbalanced_total;
  return j;
}

class ManifestWriter {
 public:
  ManifestWriter(const ExperimentConfig& cfg, std::filesystem::path path) : path_(std::move(path)) {
    doc_["version"] = version();
    doc_["config"] = config_json(cfg);
    doc_["flags"] = cfg.flags;
    doc_["files"] = nlohmann::json::array();
    doc_["completed_cells"] = nlohmann::json::array();
  }

  void file(const std::string& f) { doc_["files"].push_back(f); }
  void cell(const std::string& c) { doc_["completed_cells"].push_back(c); }

  void write(const std::string& status, const std::string& error = {}, const std::string& failed_cell = {}) {
    doc_["status"] = status;
    if (!error.empty()) doc_["error"] = error;
    if (!failed_cell.empty()) doc_["failed_cell"] = failed_cell;
    std::ofstream out(path_, std::ios::binary);
    if (!out) throw ConfigError("experiment: cannot write " + path_.string());
    out << doc_.dump(2) << "\n";
  }

  std::string path() const { return path_.string(); }

 private:
  std::filesystem::path path_;
  nlohmann::json doc_;
};

}  // namespace detail

/// Runs every configured section and writes efficiency.csv, balanced.csv,
/// unbalanced.csv (only for non-empty grids), optional SVGs and
/// manifest.json under cfg.output. On failure the manifest records status
/// "failed", the completed cells and the error, and ExperimentError is
/// thrown; rows of completed cells remain in the CSVs.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("experiment: cannot create output directory " + dir.string() + ": " + ec.message());
  detail::ManifestWriter manifest(cfg, dir / "manifest.json");
  manifest.write("running");

  ExperimentResult result;
  result.manifest = manifest.path();
  std::string current = "validate";
  std::vector<std::string> csvs;
  try {
    cfg.validate();
    auto open = [&](const std::string& file, const std::vector<std::string>& header) {
      const std::string path = (dir / file).string();
      std::ofstream out(path, std::ios::binary);
      if (!out) throw ConfigError("experiment: cannot write " + path);
      out << detail::join(header) << "\n";
      csvs.push_back(path);
      result.files.push_back(path);
      manifest.file(path);
      return out;
    };
    auto done = [&](const std::string& c) {
      result.completed_cells.push_back(c);
      manifest.cell(c);
    };

    if (!cfg.efficiency_etas.empty()) {
      auto out = open("efficiency.csv", efficiency_header());
      const AlternativePair base = cfg.pair();
      for (double eta : cfg.efficiency_etas) {
        current = "efficiency:eta=" + format_number(eta);
        out << efficiency_row(efficiency_tv(base.with_eta(eta))).str() << "\n" << std::flush;
        done(current);
      }
    }

    CriticalValueTable cache;
    const auto header = power_header(cfg);
    if (!cfg.balanced_totals.empty()) {
      auto out = open("balanced.csv", header);
      for (std::int64_t total : cfg.balanced_totals) {
        current = "balanced:N=" + std::to_string(total);
        const std::int64_t m = first_sample_size(0.5, total);
        const PowerCell cell = power_cell(cfg, m, total - m, cfg.alphas(), cache);
        for (std::size_t a = 0; a < cell.alphas.size(); ++a) out << power_row(cfg, "balanced", cell, a).str() << "\n";
        out << std::flush;
        done(current);
      }
    }
    if (!cfg.unbalanced_etas.empty()) {
      auto out = open("unbalanced.csv", header);
      for (double eta : cfg.unbalanced_etas) {
        current = "unbalanced:eta=" + format_number(eta);
        const std::int64_t m = first_sample_size(eta, cfg.unbalanced_total);
        const PowerCell cell = power_cell(cfg, m, cfg.unbalanced_total - m, {cfg.alpha}, cache);
        out << power_row(cfg, "unbalanced", cell, 0).str() << "\n" << std::flush;
        done(current);
      }
    }
    if (cfg.plots) {
      current = "plots";
      for (const auto& svg : render_plots(csvs)) {
        result.files.push_back(svg);
        manifest.file(svg);
      }
    }
  } catch (const std::exception& e) {
    manifest.write("failed", e.what(), current);
    throw ExperimentError(std::string("experiment failed at ") + current + ": " + e.what(), manifest.path());
  }
  manifest.write("complete");
  return result;
}

}  // namespace sdtest
