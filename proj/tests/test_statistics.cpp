#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sdtest/distributions.hpp"
#include "sdtest/statistics.hpp"

using sdtest::GridPoint;
using sdtest::PartitionScheme;
using sdtest::RankPattern;
using sdtest::StatisticKind;
using sdtest::TwoSample;

namespace {

const double kRootHalf = std::sqrt(0.5);

PartitionScheme half() { return PartitionScheme::explicit_points({0.5}); }

TwoSample random_sample(sdtest::UniformStream& s, std::size_t m, std::size_t n, double shift = 0.0) {
  TwoSample t;
  for (std::size_t i = 0; i < m; ++i) t.x.push_back(s.next() + shift);
  for (std::size_t i = 0; i < n; ++i) t.y.push_back(s.next());
  return t;
}

// Linear rank statistic as the sum of c_Ni l_j((R_i - 0.5)/N) over the pooled sample.
double linear_rank_sum_form(const TwoSample& t, double pi) {
  const auto rv = sdtest::ranks(t);
  const double m = static_cast<double>(t.m());
  const double n = static_cast<double>(t.n());
  const double total = m + n;
  double sum = 0.0;
  for (std::size_t i = 0; i < rv.size(); ++i) {
    const double c = std::sqrt(m * n / total) * (i < t.m() ? -1.0 / m : 1.0 / n);
    sum += c * sdtest::score_ell(pi, (static_cast<double>(rv.ranks()[i]) - 0.5) / total);
  }
  return sum;
}

// sqrt(mn/N) sup_z (G_n - F_m)(z) by direct evaluation at every sample point.
double ks_brute_force(const TwoSample& t) {
  std::vector<double> pooled = t.x;
  pooled.insert(pooled.end(), t.y.begin(), t.y.end());
  double best = 0.0;
  for (double z : pooled) {
    const double f = static_cast<double>(std::count_if(t.x.begin(), t.x.end(), [z](double v) { return v <= z; })) / t.m();
    const double g = static_cast<double>(std::count_if(t.y.begin(), t.y.end(), [z](double v) { return v <= z; })) / t.n();
    best = std::max(best, g - f);
  }
  return std::sqrt(static_cast<double>(t.m() * t.n()) / (t.m() + t.n())) * best;
}

// The max-over-j form: difference at the pooled order statistic Z_(j), j = 1..N.
double ks_grid_form(const TwoSample& t) {
  const auto p = sdtest::rank_pattern(t);
  double best = -1.0;
  for (std::int64_t j = 1; j <= p.size(); ++j) best = std::max(best, p.difference(j));
  return std::sqrt(static_cast<double>(p.m() * p.n()) / p.size()) * best;
}

}  // namespace

TEST(Ranks, Examples) {
  EXPECT_EQ(sdtest::ranks({{1, 3}, {2, 4}}).ranks(), (std::vector<std::int64_t>{1, 3, 2, 4}));
  EXPECT_EQ(sdtest::ranks({{10}, {-1}}).ranks(), (std::vector<std::int64_t>{2, 1}));
}

TEST(Ranks, TieErrorNamesValue) {
  try {
    sdtest::ranks({{5, 5}, {1}});
    FAIL() << "expected a tie error";
  } catch (const sdtest::TieError& e) {
    EXPECT_EQ(e.value(), 5.0);
    EXPECT_NE(std::string(e.what()).find('5'), std::string::npos);
  }
}

TEST(Ranks, RandomBreakGivesUniformOrder) {
  sdtest::UniformStream stream(3, 0, sdtest::StreamTag::kTieBreak);
  int x_first = 0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    const auto rv = sdtest::ranks({{7.0}, {7.0}}, stream);
    x_first += rv.ranks()[0] == 1;
  }
  EXPECT_NEAR(static_cast<double>(x_first) / trials, 0.5, 0.015);
}

TEST(Ranks, RankVectorValidation) {
  EXPECT_THROW(sdtest::RankVector({1, 1}, 1), sdtest::DomainError);
  EXPECT_THROW(sdtest::RankVector({1, 2}, 2), sdtest::DomainError);
}

TEST(KsOneSided, Examples) {
  EXPECT_DOUBLE_EQ(sdtest::ks_one_sided(TwoSample{{0.2}, {0.7}}), 0.0);
  EXPECT_NEAR(sdtest::ks_one_sided(TwoSample{{0.7}, {0.2}}), 0.70711, 1e-5);
  EXPECT_DOUBLE_EQ(sdtest::ks_one_sided(TwoSample{{0.7}, {0.2}}), kRootHalf);
  EXPECT_DOUBLE_EQ(sdtest::ks_one_sided(TwoSample{{3, 4}, {1, 2}}), 1.0);
}

TEST(KsOneSided, MatchesBruteForceAndGridForm) {
  sdtest::UniformStream s(21, 0, sdtest::StreamTag::kGeneric);
  for (int rep = 0; rep < 500; ++rep) {
    const auto t = random_sample(s, 1 + rep % 13, 1 + rep % 17, rep % 3 * 0.1);
    EXPECT_NEAR(sdtest::ks_one_sided(t), ks_brute_force(t), 1e-12);
    EXPECT_EQ(sdtest::ks_one_sided(t), ks_grid_form(t));
  }
}

TEST(ScoreEll, Examples) {
  EXPECT_DOUBLE_EQ(sdtest::score_ell(0.5, 0.2), -1.0);
  EXPECT_DOUBLE_EQ(sdtest::score_ell(0.5, 0.8), 1.0);
  EXPECT_NEAR(sdtest::score_ell(0.25, 0.1), -1.73205, 1e-5);
  EXPECT_DOUBLE_EQ(sdtest::score_ell(0.25, 0.25), std::sqrt(1.0 / 3.0));
  EXPECT_THROW(sdtest::score_ell(0.0, 0.5), sdtest::DomainError);
  EXPECT_THROW(sdtest::score_ell(1.0, 0.5), sdtest::DomainError);
}

TEST(ScoreEll, Normalization) {
  for (double pi : {0.01, 0.2, 0.5, 0.77}) {
    const double lo = sdtest::score_ell(pi, 0.0);
    const double hi = sdtest::score_ell(pi, 1.0);
    EXPECT_NEAR(lo * pi + hi * (1 - pi), 0.0, 1e-15);
    EXPECT_NEAR(lo * lo * pi + hi * hi * (1 - pi), 1.0, 1e-14);
  }
}

TEST(LinearRankStat, Examples) {
  EXPECT_NEAR(sdtest::linear_rank_stat(TwoSample{{0.2}, {0.7}}, half(), 1), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(sdtest::linear_rank_stat(TwoSample{{0.7}, {0.2}}, half(), 1), -std::sqrt(2.0), 1e-15);
  // N = 4, pi = 0.1: no rescaled rank lies below 0.1 and ceil(0.4 - 0.5) = 0.
  EXPECT_EQ(sdtest::linear_rank_stat(TwoSample{{1, 2}, {3, 4}}, PartitionScheme::explicit_points({0.1}), 1), 0.0);
  EXPECT_THROW(sdtest::linear_rank_stat(TwoSample{{1}, {2}}, half(), 2), sdtest::DomainError);
}

TEST(LinearRankStat, CountingFormEqualsSumForm) {
  sdtest::UniformStream s(22, 0, sdtest::StreamTag::kGeneric);
  for (int rep = 0; rep < 10000; ++rep) {
    const std::size_t m = 1 + s.next_below(40);
    const std::size_t n = 1 + s.next_below(40);
    const auto t = random_sample(s, m, n, 0.2 * s.next());
    const auto pattern = sdtest::rank_pattern(t);
    // Alternate among rational grid points and arbitrary doubles.
    GridPoint g{0.5};
    if (rep % 2) {
      const std::int64_t den = 2 + s.next_below(60);
      const std::int64_t num = 1 + s.next_below(den - 1);
      g = {static_cast<double>(num) / den, num, den};
    } else {
      g = {0.001 + 0.998 * s.next()};
    }
    ASSERT_NEAR(sdtest::linear_rank_stat(pattern, g), linear_rank_sum_form(t, g.pi), 1e-12)
        << "m=" << m << " n=" << n << " pi=" << g.pi;
  }
}

TEST(LinearRankStat, ExchangeAntisymmetry) {
  sdtest::UniformStream s(23, 0, sdtest::StreamTag::kGeneric);
  for (int rep = 0; rep < 200; ++rep) {
    const auto t = random_sample(s, 15, 15, 0.1);
    const TwoSample swapped{t.y, t.x};
    for (double pi : {0.1, 0.37, 0.5, 0.9}) {
      const GridPoint g{pi};
      EXPECT_NEAR(sdtest::linear_rank_stat(sdtest::rank_pattern(t), g),
                  -sdtest::linear_rank_stat(sdtest::rank_pattern(swapped), g), 1e-12);
    }
  }
}

TEST(TStat, Examples) {
  EXPECT_NEAR(sdtest::t_stat(TwoSample{{0.2}, {0.7}}, half()), -std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(sdtest::t_stat(TwoSample{{0.7}, {0.2}}, half()), std::sqrt(2.0), 1e-15);
  const TwoSample high{{10, 11, 12, 13}, {1, 2, 3, 4}};
  for (const auto& scheme : {PartitionScheme::dyadic_star(), PartitionScheme::dense_o(), half()})
    EXPECT_GT(sdtest::t_stat(high, scheme), 0.0);
}

TEST(WStat, Examples) {
  EXPECT_NEAR(sdtest::w_stat(TwoSample{{0.2}, {0.7}}, half()), -std::sqrt(2.0), 1e-15);
  // Interleaved y x y x ...: (G - F) at every even order statistic is 0.
  const TwoSample interleaved{{2, 4, 6, 8}, {1, 3, 5, 7}};
  EXPECT_DOUBLE_EQ(sdtest::w_stat(interleaved, PartitionScheme::explicit_points({0.25, 0.5, 0.75})), 0.0);
}

TEST(TWBound, Examples) {
  EXPECT_NEAR(sdtest::tw_bound(1, 1, half()), 2.0 * std::sqrt(2.0), 1e-15);
  const auto dyadic = PartitionScheme::dyadic_star();
  EXPECT_DOUBLE_EQ(sdtest::tw_bound(30, 170, dyadic), sdtest::tw_bound(170, 30, dyadic));
  EXPECT_LT(sdtest::tw_bound(5000, 5000, half()), sdtest::tw_bound(50, 50, half()));
  EXPECT_NEAR(sdtest::tw_bound(5000, 5000, half()) * 100.0, sdtest::tw_bound(1, 1, half()) * std::sqrt(2.0), 1e-12);
}

TEST(TWBound, HoldsOnSingletonExamples) {
  for (const auto& t : {TwoSample{{0.2}, {0.7}}, TwoSample{{0.7}, {0.2}}}) {
    EXPECT_LE(std::fabs(sdtest::t_stat(t, half()) - sdtest::w_stat(t, half())), sdtest::tw_bound(1, 1, half()));
  }
}

TEST(TWBound, HoldsOnRandomSamples) {
  sdtest::UniformStream s(24, 0, sdtest::StreamTag::kGeneric);
  int violations = 0;
  for (int rep = 0; rep < 2000; ++rep) {
    const std::size_t m = 20 + s.next_below(481);
    const std::size_t n = 20 + s.next_below(481);
    const auto t = random_sample(s, m, n, 0.3 * s.next());
    const auto p = sdtest::rank_pattern(t);
    for (const auto& scheme : {PartitionScheme::dyadic_star(), PartitionScheme::dense_o()}) {
      const double gap = std::fabs(sdtest::t_stat(p, scheme) - sdtest::w_stat(p, scheme));
      violations += gap > sdtest::tw_bound(static_cast<std::int64_t>(m), static_cast<std::int64_t>(n), scheme);
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST(Statistics, RankInvariance) {
  sdtest::UniformStream s(25, 0, sdtest::StreamTag::kGeneric);
  const auto expd = sdtest::ContinuousDistribution::lognormal(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const auto t = random_sample(s, 12 + rep % 9, 9 + rep % 11, 0.15);
    TwoSample phi;
    for (double v : t.x) phi.x.push_back(expd.quantile(v / 2.0));
    for (double v : t.y) phi.y.push_back(expd.quantile(v / 2.0));
    for (const auto& scheme : {PartitionScheme::dyadic_star(), PartitionScheme::dense_o()}) {
      EXPECT_EQ(sdtest::t_stat(t, scheme), sdtest::t_stat(phi, scheme));
      EXPECT_EQ(sdtest::w_stat(t, scheme), sdtest::w_stat(phi, scheme));
      EXPECT_EQ(sdtest::linear_rank_stat(t, scheme, 1), sdtest::linear_rank_stat(phi, scheme, 1));
    }
    EXPECT_EQ(sdtest::ks_one_sided(t), sdtest::ks_one_sided(phi));
  }
}

TEST(RankPattern, FromRanksMatchesFromSample) {
  const TwoSample t{{0.5, 0.1, 0.9}, {0.3, 0.7}};
  const auto a = sdtest::rank_pattern(t);
  const auto b = RankPattern::from_ranks(sdtest::ranks(t));
  for (std::int64_t k = 0; k <= 5; ++k) EXPECT_EQ(a.first_below(k), b.first_below(k));
  EXPECT_EQ(a.first_below(5), 3);
}

TEST(StatisticKind, ParseAndName) {
  EXPECT_EQ(StatisticKind::parse("ks").name(), "ks");
  EXPECT_EQ(StatisticKind::parse("tstar").name(), "tstar");
  EXPECT_EQ(StatisticKind::parse("tcirc").name(), "tcirc");
  EXPECT_EQ(StatisticKind::parse("w").name(), "wstar");
  EXPECT_EQ(StatisticKind::parse("wcirc").name(), "wcirc");
  EXPECT_EQ(StatisticKind::parse("t:power:0.25").name(), "t:power:0.25");
  EXPECT_EQ(StatisticKind::parse("t:power:1/3").scheme().size(1000), 10);
  EXPECT_EQ(StatisticKind::parse("w:explicit:0.25,0.5").scheme().points().size(), 2u);
  EXPECT_THROW(StatisticKind::parse("z"), sdtest::ConfigError);
  EXPECT_THROW(StatisticKind::parse("t:power:abc"), sdtest::ConfigError);
}

TEST(StatisticEvaluator, AgreesWithFreeFunctions) {
  sdtest::UniformStream s(26, 0, sdtest::StreamTag::kGeneric);
  const std::vector<StatisticKind> kinds{StatisticKind::ks(), StatisticKind::t_star(), StatisticKind::t_circ(),
                                         StatisticKind::parse("w"), StatisticKind::parse("wcirc"),
                                         StatisticKind::parse("t:explicit:0.3,0.61")};
  for (int rep = 0; rep < 100; ++rep) {
    const auto t = random_sample(s, 30, 45, 0.1);
    const auto p = sdtest::rank_pattern(t);
    for (const auto& k : kinds) {
      const sdtest::StatisticEvaluator eval(k, 30, 45);
      double direct = 0.0;
      switch (k.kind()) {
        case StatisticKind::Kind::kKS: direct = sdtest::ks_one_sided(p); break;
        case StatisticKind::Kind::kT: direct = sdtest::t_stat(p, k.scheme()); break;
        case StatisticKind::Kind::kW: direct = sdtest::w_stat(p, k.scheme()); break;
      }
      EXPECT_NEAR(eval(p), direct, 1e-12) << k.name();
    }
  }
}
