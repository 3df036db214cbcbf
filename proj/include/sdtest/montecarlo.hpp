// montecarlo.hpp
//
// Reproducible Monte Carlo engine: null critical values, power under
// alternatives and contamination paths, the scaled-sample KS comparison,
// the empirical sample-size ratio and moderate-deviation slopes.
//
// Replicate r of a plan with seed s draws the first sample from the uniform
// stream (s, r, kFirstSample), the second from (s, r, kSecondSample) and
// breaks ties with (s, r, kTieBreak). Values therefore depend only on
// (plan, seed), never on the number of worker threads, and all statistics of
// a plan see the same data in every replicate.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sdtest/alternatives.hpp"
#include "sdtest/distributions.hpp"
#include "sdtest/efficiency.hpp"
#include "sdtest/error.hpp"
#include "sdtest/rng.hpp"
#include "sdtest/statistics.hpp"

namespace sdtest {

inline constexpr std::int64_t kDefaultPowerReplicates = 5000;
inline constexpr std::int64_t kDefaultCriticalReplicates = 100000;
inline constexpr double kMinimumTailCount = 20.0;
inline constexpr std::int64_t kMinimumExceedances = 10;

/// Worker count: SDTEST_THREADS if set, otherwise the hardware concurrency.
inline unsigned default_threads() {
  if (const char* env = std::getenv("SDTEST_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(begin, end, worker) over contiguous blocks of [0, count). Blocks
/// are fixed by (count, threads); each worker writes only its own results.
template <class Fn>
void parallel_for(std::int64_t count, unsigned threads, Fn fn) {
  if (count <= 0) return;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::int64_t>(count, 1 << 16))));
  if (threads == 1) {
    fn(std::int64_t{0}, count, 0u);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    const std::int64_t begin = count * w / threads;
    const std::int64_t end = count * (w + 1) / threads;
    pool.emplace_back([&, begin, end, w] {
      try {
        fn(begin, end, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// How null replicates are generated. kValues samples the null distribution
/// and ranks the values; kRanks draws the uniformly random rank set directly
/// by sequential selection, which is exact under any continuous F = G and
/// avoids the sort.
enum class NullSampling { kValues, kRanks };

struct SimulationPlan {
  std::vector<StatisticKind> statistics{StatisticKind::ks()};
  std::int64_t m = 0;
  std::int64_t n = 0;
  std::int64_t replicates = kDefaultPowerReplicates;
  std::uint64_t seed = 0;
  /// Sampling distributions of the two samples; absent means the null F = G.
  std::optional<DistributionPair> alternative;
  std::string alternative_label;
  ContinuousDistribution null_distribution = ContinuousDistribution::uniform01();
  NullSampling null_sampling = NullSampling::kValues;
  unsigned threads = 0;  // 0: default_threads()

  std::int64_t total() const noexcept { return m + n; }
  unsigned worker_count() const { return threads ? threads : default_threads(); }

  void validate() const {
    if (m < 1 || n < 1) throw ConfigError("simulation plan: m and n must be at least 1");
    if (replicates < 1) throw ConfigError("simulation plan: replicates must be at least 1");
    if (statistics.empty()) throw ConfigError("simulation plan: no statistic selected");
  }

  SimulationPlan with_sizes(std::int64_t new_m, std::int64_t new_n) const {
    SimulationPlan p = *this;
    p.m = new_m;
    p.n = new_n;
    return p;
  }

  SimulationPlan with_statistics(std::vector<StatisticKind> kinds) const {
    SimulationPlan p = *this;
    p.statistics = std::move(kinds);
    return p;
  }
};

inline SimulationPlan null_plan(std::vector<StatisticKind> statistics, std::int64_t m, std::int64_t n,
                                std::int64_t replicates, std::uint64_t seed) {
  SimulationPlan p;
  p.statistics = std::move(statistics);
  p.m = m;
  p.n = n;
  p.replicates = replicates;
  p.seed = seed;
  return p;
}

inline SimulationPlan alternative_plan(std::vector<StatisticKind> statistics, std::int64_t m, std::int64_t n,
                                       std::int64_t replicates, std::uint64_t seed, DistributionPair pair,
                                       std::string label = {}) {
  SimulationPlan p = null_plan(std::move(statistics), m, n, replicates, seed);
  p.alternative = std::move(pair);
  p.alternative_label = std::move(label);
  return p;
}

/// Alternative (F1, G1) at fixed sizes.
inline SimulationPlan alternative_plan(std::vector<StatisticKind> statistics, std::int64_t m, std::int64_t n,
                                       std::int64_t replicates, std::uint64_t seed, const AlternativePair& pair) {
  return alternative_plan(std::move(statistics), m, n, replicates, seed, DistributionPair{pair.f1(), pair.g1()},
                          pair.describe());
}

/// Contamination path resolved at N = m + n.
inline SimulationPlan alternative_plan(std::vector<StatisticKind> statistics, std::int64_t m, std::int64_t n,
                                       std::int64_t replicates, std::uint64_t seed, const ContaminationPath& path) {
  const double theta = path.theta(static_cast<int>(m + n));
  return alternative_plan(std::move(statistics), m, n, replicates, seed, contaminated_pair(path.base(), theta),
                          path.base().describe() + " theta=" + std::to_string(theta));
}

/// Generates the rank pattern of one replicate; one instance per worker.
class ReplicateSampler {
 public:
  explicit ReplicateSampler(const SimulationPlan& plan)
      : plan_(plan),
        first_(plan.alternative ? plan.alternative->first : plan.null_distribution),
        second_(plan.alternative ? plan.alternative->second : plan.null_distribution),
        direct_(!plan.alternative && plan.null_sampling == NullSampling::kRanks),
        x_(static_cast<std::size_t>(plan.m)),
        y_(static_cast<std::size_t>(plan.n)),
        labels_(static_cast<std::size_t>(plan.m + plan.n)) {}

  const RankPattern& draw(std::uint64_t replicate) {
    if (direct_) {
      UniformStream s(plan_.seed, replicate, StreamTag::kFirstSample);
      std::int64_t left_first = plan_.m;
      std::int64_t left = plan_.m + plan_.n;
      for (std::size_t i = 0; i < labels_.size(); ++i, --left) {
        const bool first = s.next() * static_cast<double>(left) < static_cast<double>(left_first);
        labels_[i] = first ? 1 : 0;
        left_first -= first ? 1 : 0;
      }
      pattern_.assign_labels(labels_);
      return pattern_;
    }
    UniformStream sx(plan_.seed, replicate, StreamTag::kFirstSample);
    UniformStream sy(plan_.seed, replicate, StreamTag::kSecondSample);
    UniformStream ties(plan_.seed, replicate, StreamTag::kTieBreak);
    for (double& v : x_) v = first_.draw(sx.next());
    for (double& v : y_) v = second_.draw(sy.next());
    order_.sort(x_, y_, TiePolicy::kRandomBreak, &ties);
    pattern_.assign_labels(order_.labels());
    return pattern_;
  }

  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& y() const noexcept { return y_; }

 private:
  const SimulationPlan& plan_;
  const ContinuousDistribution& first_;
  const ContinuousDistribution& second_;
  bool direct_;
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<char> labels_;
  detail::PooledOrder order_;
  RankPattern pattern_;
};

inline std::vector<StatisticEvaluator> make_evaluators(const SimulationPlan& plan) {
  std::vector<StatisticEvaluator> out;
  out.reserve(plan.statistics.size());
  for (const auto& k : plan.statistics) out.emplace_back(k, plan.m, plan.n);
  return out;
}

/// Statistic values per statistic and replicate: result[s][r].
inline std::vector<std::vector<double>> simulate(const SimulationPlan& plan) {
  plan.validate();
  const auto evaluators = make_evaluators(plan);
  std::vector<std::vector<double>> values(plan.statistics.size(),
                                          std::vector<double>(static_cast<std::size_t>(plan.replicates)));
  parallel_for(plan.replicates, plan.worker_count(), [&](std::int64_t begin, std::int64_t end, unsigned) {
    ReplicateSampler sampler(plan);
    for (std::int64_t r = begin; r < end; ++r) {
      const RankPattern& p = sampler.draw(static_cast<std::uint64_t>(r));
      for (std::size_t s = 0; s < evaluators.size(); ++s) values[s][r] = evaluators[s](p);
    }
  });
  return values;
}

/// Counts replicates whose statistic satisfies pred(value, s), over the
/// replicate range [first, first + count).
template <class Pred>
std::vector<std::int64_t> count_replicates(const SimulationPlan& plan, std::int64_t first, std::int64_t count,
                                           Pred pred) {
  plan.validate();
  const auto evaluators = make_evaluators(plan);
  const unsigned workers = plan.worker_count();
  std::vector<std::vector<std::int64_t>> partial(workers, std::vector<std::int64_t>(evaluators.size(), 0));
  parallel_for(count, workers, [&](std::int64_t begin, std::int64_t end, unsigned w) {
    ReplicateSampler sampler(plan);
    for (std::int64_t r = begin; r < end; ++r) {
      const RankPattern& p = sampler.draw(static_cast<std::uint64_t>(first + r));
      for (std::size_t s = 0; s < evaluators.size(); ++s)
        if (pred(evaluators[s](p), s)) ++partial[w][s];
    }
  });
  std::vector<std::int64_t> total(evaluators.size(), 0);
  for (const auto& row : partial)
    for (std::size_t s = 0; s < row.size(); ++s) total[s] += row[s];
  return total;
}

// ---------------------------------------------------------------------------
// Critical values

struct CriticalValue {
  std::string statistic;
  std::int64_t m = 0;
  std::int64_t n = 0;
  double alpha = 0.0;
  double value = 0.0;
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
};

/// 1-based index ceil((1 - alpha)(R + 1)) of the conservative order-statistic
/// quantile, clamped to R.
inline std::int64_t critical_rank(double alpha, std::int64_t replicates) {
  const double target = (1.0 - alpha) * static_cast<double>(replicates + 1);
  auto k = static_cast<std::int64_t>(std::ceil(target - 1e-9 * target));
  return std::clamp<std::int64_t>(k, 1, replicates);
}

inline void check_alpha(double alpha, std::int64_t replicates) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  if (static_cast<double>(replicates) * alpha < kMinimumTailCount)
    throw InsufficientReplicatesError("critical value needs R * alpha >= 20 (R = " + std::to_string(replicates) +
                                      ", alpha = " + std::to_string(alpha) + ")");
}

class CriticalValueTable {
 public:
  void add(const CriticalValue& entry) {
    for (auto& e : entries_) {
      if (e.statistic == entry.statistic && e.m == entry.m && e.n == entry.n && e.alpha == entry.alpha) {
        e = entry;
        return;
      }
    }
    entries_.push_back(entry);
  }

  const CriticalValue* find(const std::string& statistic, std::int64_t m, std::int64_t n, double alpha) const {
    for (const auto& e : entries_)
      if (e.statistic == statistic && e.m == m && e.n == n && e.alpha == alpha) return &e;
    return nullptr;
  }

  const CriticalValue& at(const std::string& statistic, std::int64_t m, std::int64_t n, double alpha) const {
    if (const auto* e = find(statistic, m, n, alpha)) return *e;
    throw ConfigError("no critical value for " + statistic + " at (" + std::to_string(m) + ", " +
                      std::to_string(n) + "), alpha " + std::to_string(alpha));
  }

  const std::vector<CriticalValue>& entries() const noexcept { return entries_; }

 private:
  std::vector<CriticalValue> entries_;
};

/// Critical values for every statistic of a null plan and every alpha, from
/// one set of replicates.
inline CriticalValueTable critical_values(const SimulationPlan& plan, const std::vector<double>& alphas) {
  if (plan.alternative) throw ConfigError("critical values require a null plan (no alternative)");
  for (double a : alphas) check_alpha(a, plan.replicates);
  auto values = simulate(plan);
  CriticalValueTable table;
  for (std::size_t s = 0; s < values.size(); ++s) {
    std::sort(values[s].begin(), values[s].end());
    for (double a : alphas) {
      const std::int64_t k = critical_rank(a, plan.replicates);
      table.add({plan.statistics[s].name(), plan.m, plan.n, a, values[s][k - 1], plan.replicates, plan.seed});
    }
  }
  return table;
}

inline CriticalValue critical_value(const SimulationPlan& plan, double alpha) {
  if (plan.statistics.size() != 1) throw ConfigError("critical_value: plan must select exactly one statistic");
  return critical_values(plan, {alpha}).entries().front();
}

// ---------------------------------------------------------------------------
// Power

struct PowerEstimate {
  std::string statistic;
  std::int64_t rejections = 0;
  std::int64_t replicates = 0;
  double p_hat = 0.0;
  double lower = 0.0;  // 95% Wilson interval
  double upper = 0.0;
  double critical = 0.0;
  std::uint64_t seed = 0;
  std::int64_t m = 0;
  std::int64_t n = 0;

  double standard_error() const {
    return std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(replicates));
  }
};

struct Interval {
  double lower;
  double upper;
};

inline Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z = 1.959963984540054) {
  const double r = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / r;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * r)) / (1.0 + z2 / r);
  const double half = z * std::sqrt(p * (1.0 - p) / r + z2 / (4.0 * r * r)) / (1.0 + z2 / r);
  return {std::clamp(std::min(centre - half, p), 0.0, 1.0), std::clamp(std::max(centre + half, p), 0.0, 1.0)};
}

inline PowerEstimate make_power_estimate(std::string statistic, std::int64_t rejections, std::int64_t replicates,
                                         double critical, std::uint64_t seed, std::int64_t m, std::int64_t n) {
  PowerEstimate e;
  e.statistic = std::move(statistic);
  e.rejections = rejections;
  e.replicates = replicates;
  e.p_hat = static_cast<double>(rejections) / static_cast<double>(replicates);
  const Interval ci = wilson_interval(rejections, replicates);
  e.lower = ci.lower;
  e.upper = ci.upper;
  e.critical = critical;
  e.seed = seed;
  e.m = m;
  e.n = n;
  return e;
}

/// Rejection rates (statistic > critical) for every statistic of the plan.
inline std::vector<PowerEstimate> power(const SimulationPlan& plan, const std::vector<double>& criticals) {
  if (criticals.size() != plan.statistics.size())
    throw ConfigError("power: need one critical value per statistic");
  const auto counts =
      count_replicates(plan, 0, plan.replicates, [&](double v, std::size_t s) { return v > criticals[s]; });
  std::vector<PowerEstimate> out;
  for (std::size_t s = 0; s < counts.size(); ++s)
    out.push_back(make_power_estimate(plan.statistics[s].name(), counts[s], plan.replicates, criticals[s],
                                      plan.seed, plan.m, plan.n));
  return out;
}

inline PowerEstimate power(const SimulationPlan& plan, double critical) {
  if (plan.statistics.size() != 1) throw ConfigError("power: plan must select exactly one statistic");
  return power(plan, std::vector<double>{critical}).front();
}

/// Shared settings for the null simulations behind each power computation.
struct CriticalSettings {
  std::int64_t replicates = kDefaultCriticalReplicates;
  std::uint64_t seed = 0x5eed0c0ffeeull;
  NullSampling sampling = NullSampling::kValues;
};

/// Power of each statistic at its own simulated level-alpha critical value.
inline std::vector<PowerEstimate> power_at_level(const SimulationPlan& plan, double alpha,
                                                 const CriticalSettings& crit = {}) {
  SimulationPlan null = null_plan(plan.statistics, plan.m, plan.n, crit.replicates, crit.seed);
  null.null_sampling = crit.sampling;
  null.threads = plan.threads;
  const auto table = critical_values(null, {alpha});
  std::vector<double> criticals;
  for (const auto& k : plan.statistics) criticals.push_back(table.at(k.name(), plan.m, plan.n, alpha).value);
  return power(plan, criticals);
}

/// Sizes (floor(m e), floor(n e)) of V^e.
inline std::pair<std::int64_t, std::int64_t> scaled_sizes(std::int64_t m, std::int64_t n, double e_tv) {
  if (!(e_tv >= 1.0)) throw ConfigError("scaled sizes: e_TV must be at least 1");
  const auto me = static_cast<std::int64_t>(std::floor(static_cast<double>(m) * e_tv));
  const auto ne = static_cast<std::int64_t>(std::floor(static_cast<double>(n) * e_tv));
  if (me < 1 || ne < 1) throw ConfigError("scaled sizes below 1");
  return {me, ne};
}

/// Power of V at the scaled sizes (floor(m e), floor(n e)) with its own
/// critical value at level alpha. Because replicate streams are addressed by
/// index, the enlarged samples extend the plan's samples.
inline PowerEstimate power_scaled_ks(const SimulationPlan& plan, double e_tv, double alpha,
                                     const CriticalSettings& crit = {}) {
  const auto [me, ne] = scaled_sizes(plan.m, plan.n, e_tv);
  SimulationPlan scaled = plan.with_sizes(me, ne).with_statistics({StatisticKind::ks()});
  PowerEstimate e = power_at_level(scaled, alpha, crit).front();
  e.statistic = "ks_e";
  return e;
}

// ---------------------------------------------------------------------------
// Empirical sample-size ratio

struct SampleRatioProbe {
  std::int64_t total;
  PowerEstimate power;
};

struct SampleRatioReport {
  double ratio = 0.0;        // M / N; +infinity when unbounded
  double ratio_lower = 0.0;  // largest probed M / N with benchmark power below target
  double ratio_upper = 0.0;  // smallest probed M / N meeting the target
  PowerEstimate challenger;  // target power at N
  std::vector<SampleRatioProbe> probes;
  bool saturated = false;    // challenger power within one SE of 0 or 1
  bool unbounded = false;    // M_max = 64 N reached without meeting the target
};

struct SampleRatioSettings {
  double resolution = 0.02;  // geometric bisection stops at M_hi / M_lo <= 1 + resolution
  std::int64_t max_multiple = 64;
  CriticalSettings critical{};
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

/// M/N for the smallest M at which the benchmark's power under the pair
/// contaminated at weight theta matches the challenger's power at N. Powers
/// are assumed monotone in M; the search doubles (or halves) from M = N and
/// then bisects on a geometric grid. theta = 1 samples (F1, G1) itself.
inline SampleRatioReport empirical_sample_ratio(const StatisticKind& benchmark, const StatisticKind& challenger,
                                                const AlternativePair& pair, double theta, std::int64_t total,
                                                double alpha, std::int64_t replicates,
                                                const SampleRatioSettings& settings = {}) {
  check_alpha(alpha, settings.critical.replicates);
  if (replicates < 1) throw ConfigError("sample ratio: replicates must be at least 1");
  if (total < 2) throw ConfigError("sample ratio: N must be at least 2");
  const double eta = pair.eta();
  const DistributionPair dist = contaminated_pair(pair, theta);
  auto plan_at = [&](const StatisticKind& k, std::int64_t size) {
    const std::int64_t m = first_sample_size(eta, size);
    SimulationPlan p = alternative_plan({k}, m, size - m, replicates, settings.seed, dist);
    p.threads = settings.threads;
    return p;
  };
  SampleRatioReport report;
  report.challenger = power_at_level(plan_at(challenger, total), alpha, settings.critical).front();
  const double target = report.challenger.p_hat;
  const double se = std::max(report.challenger.standard_error(), 1.0 / static_cast<double>(replicates));
  report.saturated = target >= 1.0 - se || target <= alpha + se;

  auto meets = [&](std::int64_t size) {
    const PowerEstimate e = power_at_level(plan_at(benchmark, size), alpha, settings.critical).front();
    report.probes.push_back({size, e});
    return e.p_hat >= target;
  };

  const std::int64_t max_total = settings.max_multiple * total;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  if (meets(total)) {
    hi = total;
    lo = total / 2;
    while (lo >= 2 && meets(lo)) {
      hi = lo;
      lo /= 2;
    }
    if (lo < 2) lo = 1;
  } else {
    lo = total;
    std::int64_t probe = total * 2;
    while (true) {
      if (probe > max_total) {
        report.unbounded = true;
        report.ratio = std::numeric_limits<double>::infinity();
        report.ratio_lower = static_cast<double>(lo) / static_cast<double>(total);
        report.ratio_upper = std::numeric_limits<double>::infinity();
        return report;
      }
      if (meets(probe)) {
        hi = probe;
        break;
      }
      lo = probe;
      probe *= 2;
    }
  }
  while (lo >= 2 && static_cast<double>(hi) > (1.0 + settings.resolution) * static_cast<double>(lo)) {
    const auto mid = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(lo) * static_cast<double>(hi))));
    if (mid <= lo || mid >= hi) break;
    if (meets(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  report.ratio = static_cast<double>(hi) / static_cast<double>(total);
  report.ratio_upper = report.ratio;
  report.ratio_lower = static_cast<double>(lo) / static_cast<double>(total);
  return report;
}

/// Same, with theta = theta_N of a contamination path.
inline SampleRatioReport empirical_sample_ratio(const StatisticKind& benchmark, const StatisticKind& challenger,
                                                const ContaminationPath& path, std::int64_t total, double alpha,
                                                std::int64_t replicates, const SampleRatioSettings& settings = {}) {
  return empirical_sample_ratio(benchmark, challenger, path.base(), path.theta(static_cast<int>(total)), total, alpha,
                                replicates, settings);
}

// ---------------------------------------------------------------------------
// Moderate-deviation slopes

struct SlopeEntry {
  std::int64_t total = 0;
  std::int64_t m = 0;
  std::int64_t n = 0;
  double w = 0.0;          // w_N
  double threshold = 0.0;  // w_N sqrt(N)
  std::int64_t exceedances = 0;
  std::int64_t replicates = 0;
  double p_hat = 0.0;
  double slope = std::numeric_limits<double>::quiet_NaN();
  bool flagged = false;    // fewer than kMinimumExceedances events; slope not reported
};

struct SlopeSettings {
  double eta = 0.5;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::int64_t min_exceedances = kMinimumExceedances;
  /// Adaptive mode: keep adding batches until target_exceedances events or
  /// max_replicates replicates. A target of 0 runs exactly the given R.
  std::int64_t target_exceedances = 0;
  std::int64_t max_replicates = 0;
};

/// -log P(S_N >= w_N sqrt N) / (N w_N^2) under the null for each N.
inline std::vector<SlopeEntry> mdev_slope(const StatisticKind& statistic, const std::vector<std::int64_t>& totals,
                                          const std::function<double(std::int64_t)>& w_of_n, std::int64_t replicates,
                                          const SlopeSettings& settings = {}) {
  if (replicates < 1) throw ConfigError("mdev_slope: replicates must be at least 1");
  std::vector<SlopeEntry> out;
  for (std::int64_t total : totals) {
    SlopeEntry e;
    e.total = total;
    e.m = first_sample_size(settings.eta, total);
    e.n = total - e.m;
    e.w = w_of_n(total);
    e.threshold = e.w * std::sqrt(static_cast<double>(total));
    SimulationPlan plan = null_plan({statistic}, e.m, e.n, replicates, derive_seed(settings.seed, total));
    plan.null_sampling = NullSampling::kRanks;
    plan.threads = settings.threads;
    const double threshold = e.threshold;
    auto batch = [&](std::int64_t first, std::int64_t count) {
      return count_replicates(plan, first, count, [threshold](double v, std::size_t) { return v >= threshold; })
          .front();
    };
    e.exceedances = batch(0, replicates);
    e.replicates = replicates;
    if (settings.target_exceedances > 0) {
      while (e.exceedances < settings.target_exceedances && e.replicates < settings.max_replicates) {
        const std::int64_t more = std::min(e.replicates, settings.max_replicates - e.replicates);
        e.exceedances += batch(e.replicates, more);
        e.replicates += more;
      }
    }
    e.p_hat = static_cast<double>(e.exceedances) / static_cast<double>(e.replicates);
    e.flagged = e.exceedances < settings.min_exceedances;
    if (!e.flagged) e.slope = -std::log(e.p_hat) / (static_cast<double>(total) * e.w * e.w);
    out.push_back(e);
  }
  return out;
}

}  // namespace sdtest
