// config.hpp
//
// Experiment configuration: an INI file with sections [pair], [plan] and
// [grid], read with CLI11's config reader ("#" starts a comment). Example:
//
//   [pair]
//   preset = pareto            # or first = {...} and second = {...}
//   [plan]
//   statistics = ks tstar tcirc
//   replicates = 2000
//   alpha = 0.01
//   seed = 1
//   [grid]
//   efficiency_eta = 0.01:0.99:0.01
//   balanced_n = 200 300 400 500
//   unbalanced_eta = 0.1:0.9:0.1
//   unbalanced_n = 800
//
// Grid values are lists separated by spaces or commas; start:stop:step
// expands to an inclusive range. Explicit scheme points are separated by
// ';' inside a list, e.g. statistics = ks t:explicit:0.2;0.5.

#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sdtest/alternatives.hpp"
#include "sdtest/efficiency.hpp"
#include "sdtest/error.hpp"
#include "sdtest/montecarlo.hpp"
#include "sdtest/record.hpp"
#include "sdtest/statistics.hpp"

namespace sdtest {

struct ExperimentConfig {
  std::string name = "experiment";
  std::string source;  // file the config was read from, if any

  // [pair]
  std::string preset;  // empty when first/second are given explicitly
  ContinuousDistribution first = ContinuousDistribution::uniform01();
  ContinuousDistribution second = ContinuousDistribution::uniform01();
  /// Fixed contamination weight of (F1, G1); 1 samples the pair itself.
  double theta = 1.0;

  // [plan]
  std::vector<StatisticKind> statistics{StatisticKind::ks(), StatisticKind::t_star(), StatisticKind::t_circ()};
  bool include_ve = true;  // V at the efficiency-scaled sizes
  std::int64_t replicates = kDefaultPowerReplicates;
  std::int64_t critical_replicates = kDefaultCriticalReplicates;
  NullSampling critical_sampling = NullSampling::kRanks;
  std::uint64_t seed = 1;
  double alpha = 0.01;
  unsigned threads = 0;
  std::string output = "out";
  bool plots = true;

  // [grid]
  std::vector<double> efficiency_etas;
  std::vector<std::int64_t> balanced_totals;
  std::vector<double> balanced_alphas;  // empty: {alpha}
  std::vector<double> unbalanced_etas;
  std::int64_t unbalanced_total = 0;

  /// Command-line flags echoed into the manifest.
  std::map<std::string, std::string> flags;

  /// The pair at limiting fraction eta; validates membership in H1.
  AlternativePair pair(double eta = 0.5) const { return AlternativePair(first, second, eta, name); }

  std::vector<double> alphas() const { return balanced_alphas.empty() ? std::vector<double>{alpha} : balanced_alphas; }

  void validate() const {
    if (efficiency_etas.empty() && balanced_totals.empty() && unbalanced_etas.empty())
      throw ConfigError("config: every grid is empty");
    if (!unbalanced_etas.empty() && unbalanced_total < 2)
      throw ConfigError("config: unbalanced_eta needs unbalanced_n >= 2");
    if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("config: theta must lie in (0,1]");
    if (replicates < 1) throw ConfigError("config: replicates must be positive");
    if (statistics.empty() && !include_ve) throw ConfigError("config: no statistic selected");
    for (double e : efficiency_etas)
      if (!(e > 0.0 && e < 1.0)) throw ConfigError("config: efficiency eta outside (0,1)");
    for (double e : unbalanced_etas)
      if (!(e > 0.0 && e < 1.0)) throw ConfigError("config: unbalanced eta outside (0,1)");
    for (std::int64_t n : balanced_totals)
      if (n < 2) throw ConfigError("config: balanced N must be at least 2");
    if (!balanced_totals.empty() || !unbalanced_etas.empty())
      for (double a : alphas()) check_alpha(a, critical_replicates);
    pair();
  }
};

namespace detail {

inline std::vector<std::string> split_list(const std::vector<std::string>& inputs) {
  std::vector<std::string> out;
  for (const auto& in : inputs) {
    std::string token;
    for (char c : in + " ") {
      if (c == ' ' || c == ',' || c == '\t') {
        if (!token.empty()) out.push_back(token);
        token.clear();
      } else {
        token += c;
      }
    }
  }
  return out;
}

inline double to_double(const std::string& s, const std::string& key) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ConfigError("config: " + key + ": '" + s + "' is not a number");
  return v;
}

inline std::int64_t to_int(const std::string& s, const std::string& key) {
  const double v = to_double(s, key);
  if (v != std::floor(v)) throw ConfigError("config: " + key + ": '" + s + "' is not an integer");
  return static_cast<std::int64_t>(v);
}

inline bool to_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("config: " + key + ": '" + s + "' is not a boolean");
}

}  // namespace detail

/// Expands "a:b:step" ranges and plain numbers into one list.
inline std::vector<double> parse_grid(const std::vector<std::string>& inputs, const std::string& key = "grid") {
  std::vector<double> out;
  for (const auto& token : detail::split_list(inputs)) {
    const auto c1 = token.find(':');
    if (c1 == std::string::npos) {
      out.push_back(detail::to_double(token, key));
      continue;
    }
    const auto c2 = token.find(':', c1 + 1);
    if (c2 == std::string::npos) throw ConfigError("config: " + key + ": range '" + token + "' needs start:stop:step");
    const double a = detail::to_double(token.substr(0, c1), key);
    const double b = detail::to_double(token.substr(c1 + 1, c2 - c1 - 1), key);
    const double s = detail::to_double(token.substr(c2 + 1), key);
    for (double v : linear_grid(a, b, s)) out.push_back(v);
  }
  return out;
}

inline std::vector<double> parse_grid(const std::string& text, const std::string& key = "grid") {
  return parse_grid(std::vector<std::string>{text}, key);
}

inline std::vector<std::int64_t> parse_int_grid(const std::vector<std::string>& inputs, const std::string& key) {
  std::vector<std::int64_t> out;
  for (double v : parse_grid(inputs, key)) {
    if (v != std::round(v)) throw ConfigError("config: " + key + ": " + std::to_string(v) + " is not an integer");
    out.push_back(static_cast<std::int64_t>(std::llround(v)));
  }
  return out;
}

inline NullSampling parse_sampling(const std::string& s) {
  if (s == "ranks") return NullSampling::kRanks;
  if (s == "values") return NullSampling::kValues;
  throw ConfigError("config: sampling must be 'ranks' or 'values', got '" + s + "'");
}

inline std::vector<StatisticKind> parse_statistics(const std::vector<std::string>& inputs) {
  std::vector<StatisticKind> out;
  for (const auto& token : detail::split_list(inputs)) out.push_back(StatisticKind::parse(token));
  return out;
}

/// Reads an experiment configuration. Unknown sections or keys are errors,
/// so typos do not silently fall back to defaults.
inline ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>") {
  ExperimentConfig cfg;
  cfg.source = source;
  const auto items = CLI::ConfigBase().from_config(in);
  std::optional<std::string> first;
  std::optional<std::string> second;
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    const std::string key = item.fullname();
    if (!seen.insert(key).second) throw ConfigError("config: duplicate key " + key);
    if (item.inputs.empty()) throw ConfigError("config: " + key + " has no value");
    const std::string& v = item.inputs.front();
    const auto single = [&]() -> const std::string& {
      if (item.inputs.size() != 1) throw ConfigError("config: " + key + " takes a single value");
      return v;
    };

    if (key == "pair.preset") {
      cfg.preset = single();
    } else if (key == "pair.first") {
      first = single();
    } else if (key == "pair.second") {
      second = single();
    } else if (key == "pair.name") {
      cfg.name = single();
    } else if (key == "pair.theta") {
      cfg.theta = detail::to_double(single(), key);
    } else if (key == "plan.statistics") {
      cfg.statistics = parse_statistics(item.inputs);
    } else if (key == "plan.include_ve") {
      cfg.include_ve = detail::to_bool(single(), key);
    } else if (key == "plan.replicates") {
      cfg.replicates = detail::to_int(single(), key);
    } else if (key == "plan.critical_replicates") {
      cfg.critical_replicates = detail::to_int(single(), key);
    } else if (key == "plan.critical_sampling") {
      cfg.critical_sampling = parse_sampling(single());
    } else if (key == "plan.seed") {
      cfg.seed = std::stoull(single());
    } else if (key == "plan.alpha") {
      cfg.alpha = detail::to_double(single(), key);
    } else if (key == "plan.threads") {
      cfg.threads = static_cast<unsigned>(detail::to_int(single(), key));
    } else if (key == "plan.output") {
      cfg.output = single();
    } else if (key == "plan.plots") {
      cfg.plots = detail::to_bool(single(), key);
    } else if (key == "grid.efficiency_eta") {
      cfg.efficiency_etas = parse_grid(item.inputs, key);
    } else if (key == "grid.balanced_n") {
      cfg.balanced_totals = parse_int_grid(item.inputs, key);
    } else if (key == "grid.balanced_alpha") {
      cfg.balanced_alphas = parse_grid(item.inputs, key);
    } else if (key == "grid.unbalanced_eta") {
      cfg.unbalanced_etas = parse_grid(item.inputs, key);
    } else if (key == "grid.unbalanced_n") {
      cfg.unbalanced_total = detail::to_int(single(), key);
    } else {
      throw ConfigError("config: unknown key " + key);
    }
  }
  if (!cfg.preset.empty()) {
    if (first || second) throw ConfigError("config: give either pair.preset or pair.first/pair.second");
    const AlternativePair p = preset_pair(cfg.preset);
    cfg.first = p.f1();
    cfg.second = p.g1();
    if (!seen.count("pair.name")) cfg.name = cfg.preset;
  } else {
    if (!first || !second) throw ConfigError("config: [pair] needs preset or both first and second");
    cfg.first = parse_distribution(*first);
    cfg.second = parse_distribution(*second);
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return parse_config(in, path);
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace sdtest
