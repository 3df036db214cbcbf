// statistics.hpp
//
// Two-sample one-sided statistics computed from ranks:
//   V_N  one-sided Kolmogorov-Smirnov, sqrt(mn/N) sup_z (G_n - F_m)(z)
//   L_j  linear rank statistic with two-valued score l_j jumping at pi_j
//   T_N  max_j (-L_j)
//   W_N  weighted KS evaluated at the pooled order statistic Z_(ceil(N pi_j))
//
// All statistics depend on the data only through RankPattern, the sequence of
// sample memberships of the sorted pooled sample. One sort of the pooled
// sample (or one enumerated rank set) serves every statistic.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sdtest/error.hpp"
#include "sdtest/partition.hpp"
#include "sdtest/rng.hpp"

namespace sdtest {

struct TwoSample {
  std::vector<double> x;
  std::vector<double> y;

  std::size_t m() const noexcept { return x.size(); }
  std::size_t n() const noexcept { return y.size(); }

  void validate() const {
    if (x.empty() || y.empty()) throw DomainError("TwoSample: both samples must be nonempty");
    for (double v : x)
      if (!std::isfinite(v)) throw DomainError("TwoSample: non-finite observation");
    for (double v : y)
      if (!std::isfinite(v)) throw DomainError("TwoSample: non-finite observation");
  }
};

enum class TiePolicy { kError, kRandomBreak };

/// Pooled ranks r_1..r_N; the first m entries belong to the first sample.
class RankVector {
 public:
  RankVector(std::vector<std::int64_t> ranks, std::size_t m) : ranks_(std::move(ranks)), m_(m) {
    const std::size_t total = ranks_.size();
    if (m_ < 1 || m_ >= total) throw DomainError("RankVector: need 1 <= m < N");
    std::vector<char> seen(total, 0);
    for (std::int64_t r : ranks_) {
      if (r < 1 || r > static_cast<std::int64_t>(total) || seen[r - 1])
        throw DomainError("RankVector: ranks must be a permutation of 1..N");
      seen[r - 1] = 1;
    }
  }

  const std::vector<std::int64_t>& ranks() const noexcept { return ranks_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t n() const noexcept { return ranks_.size() - m_; }
  std::size_t size() const noexcept { return ranks_.size(); }

 private:
  std::vector<std::int64_t> ranks_;
  std::size_t m_;
};

/// Membership pattern of the sorted pooled sample, stored as prefix counts:
/// first_below(k) is the number of first-sample values among the k smallest.
class RankPattern {
 public:
  RankPattern() = default;

  /// sorted_is_first[i] != 0 when the (i+1)-th smallest value is from the
  /// first sample.
  template <class Labels>
  static RankPattern from_labels(const Labels& sorted_is_first) {
    RankPattern p;
    p.assign_labels(sorted_is_first);
    return p;
  }

  static RankPattern from_ranks(const RankVector& rv) {
    std::vector<char> labels(rv.size(), 0);
    for (std::size_t i = 0; i < rv.m(); ++i) labels[rv.ranks()[i] - 1] = 1;
    return from_labels(labels);
  }

  template <class Labels>
  void assign_labels(const Labels& sorted_is_first) {
    const std::size_t total = std::size(sorted_is_first);
    prefix_.resize(total + 1);
    prefix_[0] = 0;
    std::int64_t count = 0;
    std::size_t i = 0;
    for (auto label : sorted_is_first) {
      count += label ? 1 : 0;
      prefix_[++i] = count;
    }
    m_ = count;
    n_ = static_cast<std::int64_t>(total) - count;
    if (m_ < 1 || n_ < 1) throw DomainError("RankPattern: both samples must be nonempty");
  }

  std::int64_t m() const noexcept { return m_; }
  std::int64_t n() const noexcept { return n_; }
  std::int64_t size() const noexcept { return m_ + n_; }
  std::int64_t first_below(std::int64_t k) const noexcept { return prefix_[k]; }

  /// N * m * n * (G_n - F_m)(Z_(k)) / N as an exact integer: m k - N S_k.
  std::int64_t scaled_difference(std::int64_t k) const noexcept {
    return m_ * k - size() * prefix_[k];
  }

  /// (G_n - F_m)(Z_(k)), k in [0, N].
  double difference(std::int64_t k) const noexcept {
    return static_cast<double>(scaled_difference(k)) / static_cast<double>(m_ * n_);
  }

 private:
  std::vector<std::int64_t> prefix_;
  std::int64_t m_ = 0;
  std::int64_t n_ = 0;
};

namespace detail {

/// Sorts the pooled sample and resolves ties. Reusable buffers make this
/// allocation-free across Monte Carlo replicates of a fixed size.
class PooledOrder {
 public:
  void sort(std::span<const double> x, std::span<const double> y, TiePolicy policy,
            UniformStream* tie_stream) {
    const std::size_t m = x.size();
    const std::size_t total = m + y.size();
    items_.resize(total);
    for (std::size_t i = 0; i < m; ++i) items_[i] = {x[i], static_cast<std::uint32_t>(i)};
    for (std::size_t i = 0; i < y.size(); ++i)
      items_[m + i] = {y[i], static_cast<std::uint32_t>(m + i)};
    std::sort(items_.begin(), items_.end());
    for (std::size_t i = 1; i < total;) {
      if (items_[i].first != items_[i - 1].first) {
        ++i;
        continue;
      }
      std::size_t start = i - 1;
      std::size_t end = i + 1;
      while (end < total && items_[end].first == items_[start].first) ++end;
      if (policy == TiePolicy::kError || tie_stream == nullptr) {
        std::ostringstream os;
        os.precision(17);
        os << "tied observations with value " << items_[start].first;
        throw TieError(os.str(), items_[start].first);
      }
      for (std::size_t k = end - 1; k > start; --k) {
        const std::size_t pick = start + tie_stream->next_below(k - start + 1);
        std::swap(items_[k].second, items_[pick].second);
      }
      i = end;
    }
    labels_.resize(total);
    for (std::size_t i = 0; i < total; ++i) labels_[i] = items_[i].second < m ? 1 : 0;
  }

  const std::vector<std::pair<double, std::uint32_t>>& items() const noexcept { return items_; }
  const std::vector<char>& labels() const noexcept { return labels_; }

 private:
  std::vector<std::pair<double, std::uint32_t>> items_;
  std::vector<char> labels_;
};

}  // namespace detail

inline RankVector ranks(const TwoSample& sample, TiePolicy policy = TiePolicy::kError,
                        UniformStream* tie_stream = nullptr) {
  sample.validate();
  detail::PooledOrder order;
  order.sort(sample.x, sample.y, policy, tie_stream);
  std::vector<std::int64_t> r(sample.m() + sample.n());
  for (std::size_t pos = 0; pos < order.items().size(); ++pos)
    r[order.items()[pos].second] = static_cast<std::int64_t>(pos + 1);
  return RankVector(std::move(r), sample.m());
}

/// Ranks with ties broken uniformly at random from the given stream.
inline RankVector ranks(const TwoSample& sample, UniformStream& tie_stream) {
  return ranks(sample, TiePolicy::kRandomBreak, &tie_stream);
}

inline RankPattern rank_pattern(const TwoSample& sample, TiePolicy policy = TiePolicy::kError,
                                UniformStream* tie_stream = nullptr) {
  sample.validate();
  detail::PooledOrder order;
  order.sort(sample.x, sample.y, policy, tie_stream);
  return RankPattern::from_labels(order.labels());
}

/// Number of ranks r in 1..N whose rescaled value (r - 0.5)/N lies below pi.
/// This equals ceil(N pi - 0.5) with integers mapping to themselves.
inline std::int64_t rescaled_ranks_below(std::int64_t n, const GridPoint& g) {
  if (g.rational()) {
    // (2r - 1) den < 2 N num  <=>  r <= floor((2 N num + den - 1) / (2 den))
    const std::int64_t k = (2 * n * g.num + g.den - 1) / (2 * g.den);
    return std::clamp<std::int64_t>(k, 0, n);
  }
  auto below = [&](std::int64_t r) {
    return (static_cast<double>(r) - 0.5) / static_cast<double>(n) < g.pi;
  };
  auto k = static_cast<std::int64_t>(std::ceil(static_cast<double>(n) * g.pi - 0.5));
  k = std::clamp<std::int64_t>(k, 0, n);
  while (k < n && below(k + 1)) ++k;
  while (k > 0 && !below(k)) --k;
  return k;
}

/// Index r of the pooled order statistic Z_(r) equal to J_N^{-1}(pi):
/// ceil(N pi) with integers mapping to themselves, guarded to [1, N].
inline std::int64_t pooled_order_index(std::int64_t n, const GridPoint& g) {
  std::int64_t k;
  if (g.rational()) {
    k = (n * g.num + g.den - 1) / g.den;
  } else {
    k = static_cast<std::int64_t>(std::ceil(static_cast<double>(n) * g.pi));
  }
  return std::clamp<std::int64_t>(k, 1, n);
}

/// Two-valued score: -sqrt((1-pi)/pi) on [0, pi), sqrt(pi/(1-pi)) on [pi, 1].
inline double score_ell(double pi, double t) {
  if (!(pi > 0.0 && pi < 1.0)) throw DomainError("score_ell: pi must lie in (0,1)");
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("score_ell: t must lie in [0,1]");
  return t < pi ? -std::sqrt((1.0 - pi) / pi) : std::sqrt(pi / (1.0 - pi));
}

inline double ks_one_sided(const RankPattern& p) {
  std::int64_t best = 0;  // k = 0: below every observation the difference is 0
  for (std::int64_t k = 1; k <= p.size(); ++k) best = std::max(best, p.scaled_difference(k));
  const double mn = static_cast<double>(p.m() * p.n());
  return std::sqrt(mn / static_cast<double>(p.size())) * (static_cast<double>(best) / mn);
}

inline double ks_one_sided(const TwoSample& sample) { return ks_one_sided(rank_pattern(sample)); }

/// L_j via the counting form
///   sqrt(mn/N) / sqrt(pi (1-pi)) [ (N/(mn)) S - ceil(N pi - 0.5) / n ],
/// S the number of first-sample ranks with (R - 0.5)/N < pi.
inline double linear_rank_stat(const RankPattern& p, const GridPoint& g) {
  const std::int64_t total = p.size();
  const std::int64_t below = rescaled_ranks_below(total, g);
  const std::int64_t s = p.first_below(below);
  const double mn = static_cast<double>(p.m() * p.n());
  const double scale = std::sqrt(mn / static_cast<double>(total)) / std::sqrt(g.pi * (1.0 - g.pi));
  return scale * static_cast<double>(s * total - below * p.m()) / mn;
}

/// L_j for the j-th grid point of the scheme, j in [1, Delta(N)].
inline double linear_rank_stat(const TwoSample& sample, const PartitionScheme& scheme,
                               std::size_t j) {
  const RankPattern p = rank_pattern(sample);
  const auto grid = scheme.grid(p.size());
  if (j < 1 || j > grid.size()) throw DomainError("linear_rank_stat: j outside [1, Delta(N)]");
  return linear_rank_stat(p, grid[j - 1]);
}

inline double t_stat(const RankPattern& p, std::span<const GridPoint> grid) {
  double best = -std::numeric_limits<double>::infinity();
  for (const GridPoint& g : grid) best = std::max(best, -linear_rank_stat(p, g));
  return best;
}

inline double t_stat(const RankPattern& p, const PartitionScheme& scheme) {
  const auto grid = scheme.grid(p.size());
  return t_stat(p, grid);
}

inline double t_stat(const TwoSample& sample, const PartitionScheme& scheme) {
  return t_stat(rank_pattern(sample), scheme);
}

inline double w_stat(const RankPattern& p, std::span<const GridPoint> grid) {
  const double mn = static_cast<double>(p.m() * p.n());
  const double scale = std::sqrt(mn / static_cast<double>(p.size()));
  double best = -std::numeric_limits<double>::infinity();
  for (const GridPoint& g : grid) {
    const std::int64_t k = pooled_order_index(p.size(), g);
    const double v = scale * (static_cast<double>(p.scaled_difference(k)) / mn) /
                     std::sqrt(g.pi * (1.0 - g.pi));
    best = std::max(best, v);
  }
  return best;
}

inline double w_stat(const RankPattern& p, const PartitionScheme& scheme) {
  const auto grid = scheme.grid(p.size());
  return w_stat(p, grid);
}

inline double w_stat(const TwoSample& sample, const PartitionScheme& scheme) {
  return w_stat(rank_pattern(sample), scheme);
}

/// Explicit deterministic bound on |T_N - W_N|:
///   N^{-1/2} max{sqrt((1-eta_N)/eta_N), sqrt(eta_N/(1-eta_N))}
///     * 2 / min{sqrt(pi_1 (1-pi_1)), sqrt(pi_D (1-pi_D))},  eta_N = m/N.
inline double tw_bound(std::int64_t m, std::int64_t n, const PartitionScheme& scheme) {
  if (m < 1 || n < 1) throw DomainError("tw_bound: sample sizes must be positive");
  const std::int64_t total = m + n;
  const auto grid = scheme.grid(total);
  const double eta = static_cast<double>(m) / static_cast<double>(total);
  const double imbalance = std::max(std::sqrt((1.0 - eta) / eta), std::sqrt(eta / (1.0 - eta)));
  const double first = grid.front().pi;
  const double last = grid.back().pi;
  const double weight =
      std::min(std::sqrt(first * (1.0 - first)), std::sqrt(last * (1.0 - last)));
  return imbalance * 2.0 / weight / std::sqrt(static_cast<double>(total));
}

/// Which statistic a simulation or table refers to.
class StatisticKind {
 public:
  enum class Kind { kKS, kT, kW };

  static StatisticKind ks() { return StatisticKind(Kind::kKS, PartitionScheme::dyadic_star()); }
  static StatisticKind t(PartitionScheme scheme) { return StatisticKind(Kind::kT, std::move(scheme)); }
  static StatisticKind w(PartitionScheme scheme) { return StatisticKind(Kind::kW, std::move(scheme)); }
  static StatisticKind t_star() { return t(PartitionScheme::dyadic_star()); }
  static StatisticKind t_circ() { return t(PartitionScheme::dense_o()); }

  /// Accepts ks | tstar | tcirc | w | wstar | wcirc | t:<scheme> | w:<scheme>,
  /// with <scheme> one of dyadic | dense | power:<p> | explicit:<p1>,<p2>,...
  /// (';' may separate the explicit points instead of ',').
  static StatisticKind parse(const std::string& text) {
    if (text == "ks" || text == "v") return ks();
    if (text == "tstar") return t_star();
    if (text == "tcirc") return t_circ();
    if (text == "w" || text == "wstar") return w(PartitionScheme::dyadic_star());
    if (text == "wcirc") return w(PartitionScheme::dense_o());
    if (text.size() > 2 && (text[0] == 't' || text[0] == 'w') && text[1] == ':') {
      PartitionScheme scheme = parse_scheme(text.substr(2));
      return text[0] == 't' ? t(std::move(scheme)) : w(std::move(scheme));
    }
    throw ConfigError("unknown statistic '" + text + "'");
  }

  static PartitionScheme parse_scheme(const std::string& text) {
    if (text == "dyadic") return PartitionScheme::dyadic_star();
    if (text == "dense") return PartitionScheme::dense_o();
    auto number = [&](const std::string& s) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != s.size() || s.empty()) throw ConfigError("bad number '" + s + "' in scheme '" + text + "'");
      return v;
    };
    if (text.rfind("power:", 0) == 0) {
      const std::string arg = text.substr(6);
      const auto slash = arg.find('/');
      if (slash != std::string::npos)
        return PartitionScheme::power_law(number(arg.substr(0, slash)) / number(arg.substr(slash + 1)));
      return PartitionScheme::power_law(number(arg));
    }
    if (text.rfind("explicit:", 0) == 0) {
      std::vector<double> pts;
      std::string list = text.substr(9);
      std::replace(list.begin(), list.end(), ';', ',');  // ';' keeps the list inside one CSV or INI field
      std::stringstream ss(list);
      std::string item;
      while (std::getline(ss, item, ',')) pts.push_back(number(item));
      return PartitionScheme::explicit_points(std::move(pts));
    }
    throw ConfigError("unknown partition scheme '" + text + "'");
  }

  Kind kind() const noexcept { return kind_; }
  const PartitionScheme& scheme() const noexcept { return scheme_; }

  std::string name() const {
    switch (kind_) {
      case Kind::kKS:
        return "ks";
      case Kind::kT:
        if (scheme_.kind() == PartitionScheme::Kind::kDyadicStar) return "tstar";
        if (scheme_.kind() == PartitionScheme::Kind::kDenseO) return "tcirc";
        return "t:" + scheme_.name();
      case Kind::kW:
        if (scheme_.kind() == PartitionScheme::Kind::kDyadicStar) return "wstar";
        if (scheme_.kind() == PartitionScheme::Kind::kDenseO) return "wcirc";
        return "w:" + scheme_.name();
    }
    return {};
  }

 private:
  StatisticKind(Kind kind, PartitionScheme scheme) : kind_(kind), scheme_(std::move(scheme)) {}

  Kind kind_;
  PartitionScheme scheme_;
};

/// A statistic prepared for fixed sample sizes: the grid, its rank counts
/// and weights are computed once, so each evaluation is O(N + Delta(N)).
class StatisticEvaluator {
 public:
  StatisticEvaluator(StatisticKind kind, std::int64_t m, std::int64_t n)
      : kind_(std::move(kind)), m_(m), n_(n) {
    if (m < 1 || n < 1) throw DomainError("StatisticEvaluator: sample sizes must be positive");
    if (kind_.kind() == StatisticKind::Kind::kKS) return;
    const std::int64_t total = m + n;
    grid_ = kind_.scheme().grid(total);
    const double mn = static_cast<double>(m * n);
    const double scale = std::sqrt(mn / static_cast<double>(total));
    for (const GridPoint& g : grid_) {
      const std::int64_t at = kind_.kind() == StatisticKind::Kind::kT ? rescaled_ranks_below(total, g)
                                                                        : pooled_order_index(total, g);
      terms_.push_back({at, scale / std::sqrt(g.pi * (1.0 - g.pi))});
    }
  }

  const StatisticKind& kind() const noexcept { return kind_; }
  std::int64_t m() const noexcept { return m_; }
  std::int64_t n() const noexcept { return n_; }
  const std::vector<GridPoint>& grid() const noexcept { return grid_; }

  double operator()(const RankPattern& p) const {
    if (p.m() != m_ || p.n() != n_) throw DomainError("StatisticEvaluator: sample sizes differ");
    if (kind_.kind() == StatisticKind::Kind::kKS) return ks_one_sided(p);
    const double mn = static_cast<double>(m_ * n_);
    double best = -std::numeric_limits<double>::infinity();
    if (kind_.kind() == StatisticKind::Kind::kT) {
      const std::int64_t total = m_ + n_;
      for (const Term& t : terms_) {
        const std::int64_t num = t.at * m_ - p.first_below(t.at) * total;
        best = std::max(best, t.weight * static_cast<double>(num) / mn);
      }
    } else {
      for (const Term& t : terms_)
        best = std::max(best, t.weight * static_cast<double>(p.scaled_difference(t.at)) / mn);
    }
    return best;
  }

 private:
  struct Term {
    std::int64_t at;  // rank count (T) or order-statistic index (W)
    double weight;
  };

  StatisticKind kind_;
  std::int64_t m_;
  std::int64_t n_;
  std::vector<GridPoint> grid_;
  std::vector<Term> terms_;
};

inline double evaluate(const StatisticKind& kind, const RankPattern& p) {
  return StatisticEvaluator(kind, p.m(), p.n())(p);
}

inline double evaluate(const StatisticKind& kind, const TwoSample& sample) {
  return evaluate(kind, rank_pattern(sample));
}

}  // namespace sdtest
