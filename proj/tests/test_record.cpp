#include <gtest/gtest.h>

#include "sdtest/record.hpp"

TEST(Record, ParsesNestedMixture) {
  const auto d = sdtest::parse_distribution(
      "{family:\"mixture\", weight:0.8, first:{family:\"normal\", a:0, b:1}, second:{family:\"chisq1\"}}");
  EXPECT_EQ(d.family(), sdtest::Family::kMixture);
  EXPECT_NEAR(d.cdf(0.0), 0.8 * 0.5, 1e-15);
}

TEST(Record, QuotedKeysAndBareWords) {
  const auto d = sdtest::parse_distribution("{ 'family' : laplace , \"a\": 0.0, b: 1.25 }");
  EXPECT_EQ(d.describe(), sdtest::ContinuousDistribution::laplace(0.0, 1.25).describe());
}

TEST(Record, RoundTrip) {
  using D = sdtest::ContinuousDistribution;
  for (const auto& d : {D::uniform01(), D::mu(-0.25), D::singh_maddala(2, 3, 1.5), D::pareto(2),
                        D::lognormal(0.1, 2), D::normal(-1, 0.3), D::chi_square1(), D::laplace(1, 1.25),
                        D::mixture(0.3, D::mu(1), D::mixture(0.5, D::normal(0, 1), D::chi_square1()))}) {
    const auto back = sdtest::parse_distribution(sdtest::to_record(d));
    EXPECT_EQ(sdtest::to_record(back), sdtest::to_record(d));
    for (double z : {-1.0, 0.3, 0.5, 2.0}) EXPECT_EQ(back.cdf(z), d.cdf(z));
  }
}

TEST(Record, Errors) {
  EXPECT_THROW(sdtest::parse_distribution("{family:\"gamma\"}"), sdtest::ParseError);
  EXPECT_THROW(sdtest::parse_distribution("{family:\"mu\"}"), sdtest::ParseError);
  EXPECT_THROW(sdtest::parse_distribution("{family:\"mu\", a:0.1"), sdtest::ParseError);
  EXPECT_THROW(sdtest::parse_distribution("{family:\"mu\", a:0.1, a:0.2}"), sdtest::ParseError);
  EXPECT_THROW(sdtest::parse_distribution("{family:\"mu\", a:3}"), sdtest::ConfigError);
}
