#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "sdtest/distributions.hpp"
#include "sdtest/normal.hpp"
#include "sdtest/rng.hpp"

using sdtest::ContinuousDistribution;
using D = sdtest::ContinuousDistribution;

namespace {

// Composite Simpson rule, used as an independent check of closed-form CDFs.
template <class F>
double simpson(F f, double a, double b, int panels = 2000) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

std::vector<ContinuousDistribution> random_family_members(sdtest::UniformStream& s) {
  const double a = s.next();
  const double b = s.next();
  const double c = s.next();
  return {
      D::uniform01(),
      D::mu(2.0 * a - 1.0),
      D::singh_maddala(1.0 + 4.0 * a, 1.0 + 4.0 * b, 1.0 + 4.0 * c),
      D::pareto(1.0 + 4.0 * a),
      D::lognormal(4.0 * a - 2.0, 0.1 + 2.0 * b),
      D::normal(4.0 * a - 2.0, 0.1 + 2.0 * b),
      D::chi_square1(),
      D::laplace(4.0 * a - 2.0, 0.1 + 2.0 * b),
      D::mixture(0.05 + 0.9 * c, D::normal(4.0 * a - 2.0, 1.0), D::chi_square1()),
      D::mixture(0.05 + 0.9 * c, D::mu(-1.0), D::mu(2.0 * a - 1.0)),
  };
}

}  // namespace

TEST(Cdf, UniformIdentity) { EXPECT_DOUBLE_EQ(D::uniform01().cdf(0.5), 0.5); }

TEST(Cdf, MuBelowPerturbation) {
  for (double a : {-1.0, -0.3, 0.0, 0.5, 1.0}) EXPECT_DOUBLE_EQ(D::mu(a).cdf(0.4), 0.4);
}

TEST(Cdf, MuMatchesIntegratedDensity) {
  for (double a : {-1.0, 0.7}) {
    const auto d = D::mu(a);
    auto density = [a](double x) {
      return (x > 0.4 && x < 0.6) ? 1.0 + a * std::sin(10.0 * std::numbers::pi * x) : 1.0;
    };
    for (double z : {0.1, 0.43, 0.5, 0.55, 0.6, 0.9}) {
      const double lo = std::min(z, 0.4);
      double expect = lo;
      if (z > 0.4) expect += simpson(density, 0.4, std::min(z, 0.6));
      if (z > 0.6) expect += z - 0.6;
      EXPECT_NEAR(d.cdf(z), expect, 1e-12) << "a=" << a << " z=" << z;
    }
  }
}

TEST(Cdf, SinghMaddalaSubstitution) { EXPECT_DOUBLE_EQ(D::singh_maddala(1, 1, 1).cdf(1.0), 0.5); }

TEST(Cdf, ParetoIsSinghMaddalaSpecialCase) {
  for (double z : {0.1, 1.0, 3.0}) EXPECT_DOUBLE_EQ(D::pareto(2.5).cdf(z), D::singh_maddala(2.5, 1, 1).cdf(z));
}

TEST(Cdf, ChiSquareOneByQuadrature) {
  // chi2_1 density x^{-1/2} e^{-x/2} / sqrt(2 pi); substitute x = s^2.
  auto integrand = [](double s) { return 2.0 * std::exp(-s * s / 2.0) / std::sqrt(2.0 * std::numbers::pi); };
  for (double z : {0.2, 1.0, 3.84}) EXPECT_NEAR(D::chi_square1().cdf(z), simpson(integrand, 0.0, std::sqrt(z)), 1e-10);
  EXPECT_NEAR(D::chi_square1().cdf(3.841458820694124), 0.95, 1e-12);
}

TEST(Cdf, LaplaceTwoPieces) {
  const auto d = D::laplace(1.0, 2.0);
  EXPECT_DOUBLE_EQ(d.cdf(1.0), 0.5);
  EXPECT_NEAR(d.cdf(-1.0), 0.5 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(d.cdf(5.0), 1.0 - 0.5 * std::exp(-2.0), 1e-15);
}

TEST(Cdf, MixtureIsConvexCombination) {
  const auto d = D::mixture(0.3, D::normal(0, 1), D::laplace(0, 1));
  for (double z : {-2.0, 0.0, 1.5})
    EXPECT_NEAR(d.cdf(z), 0.3 * D::normal(0, 1).cdf(z) + 0.7 * D::laplace(0, 1).cdf(z), 1e-15);
}

TEST(Quantile, Examples) {
  EXPECT_DOUBLE_EQ(D::uniform01().quantile(0.25), 0.25);
  EXPECT_NEAR(D::singh_maddala(1, 1, 1).quantile(0.5), 1.0, 1e-14);
  EXPECT_NEAR(D::mixture(0.5, D::normal(0, 1), D::normal(0, 1)).quantile(0.5), 0.0, 1e-10);
  EXPECT_NEAR(D::normal(0, 1).quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(D::lognormal(0, 1).quantile(0.5), 1.0, 1e-14);
  EXPECT_NEAR(D::chi_square1().quantile(0.95), 3.841458820694124, 1e-9);
}

TEST(Quantile, DomainErrors) {
  EXPECT_THROW(D::normal(0, 1).quantile(0.0), sdtest::DomainError);
  EXPECT_THROW(D::mu(0.5).quantile(1.0), sdtest::DomainError);
  EXPECT_THROW(D::uniform01().quantile(-0.1), sdtest::DomainError);
  EXPECT_THROW(sdtest::normal_quantile(1.5), sdtest::DomainError);
}

TEST(Quantile, RoundTripRandomProbes) {
  sdtest::UniformStream s(11, 0, sdtest::StreamTag::kGeneric);
  int probes = 0;
  while (probes < 10000) {
    for (const auto& d : random_family_members(s)) {
      const double u = 1e-6 + (1.0 - 2e-6) * s.next();
      const double z = d.quantile(u);
      ASSERT_NEAR(d.cdf(z), u, 1e-10) << d.describe() << " u=" << u;
      ++probes;
    }
  }
}

TEST(Quantile, InvertsCdfInSupportInterior) {
  sdtest::UniformStream s(12, 0, sdtest::StreamTag::kGeneric);
  for (int rep = 0; rep < 100; ++rep) {
    for (const auto& d : random_family_members(s)) {
      const double z = d.quantile(0.05 + 0.9 * s.next());
      EXPECT_NEAR(d.quantile(d.cdf(z)), z, 1e-6 * (1.0 + std::fabs(z))) << d.describe();
    }
  }
}

TEST(Cdf, MonotoneOnGrid) {
  sdtest::UniformStream s(13, 0, sdtest::StreamTag::kGeneric);
  for (const auto& d : random_family_members(s)) {
    const double lo = d.quantile(1e-4);
    const double hi = d.quantile(1 - 1e-4);
    double prev = d.cdf(lo - 1.0);
    for (int i = 0; i <= 1000; ++i) {
      const double v = d.cdf(lo - 1.0 + (hi - lo + 2.0) * i / 1000.0);
      ASSERT_GE(v, prev) << d.describe();
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
      prev = v;
    }
  }
}

TEST(Sample, EmptyCount) {
  sdtest::UniformStream s(1, 0, sdtest::StreamTag::kGeneric);
  EXPECT_TRUE(D::normal(0, 1).sample(s, 0).empty());
}

TEST(Sample, UniformMean) {
  sdtest::UniformStream s(2, 0, sdtest::StreamTag::kGeneric);
  const auto v = D::uniform01().sample(s, 1000000);
  double sum = 0.0;
  for (double x : v) sum += x;
  EXPECT_NEAR(sum / v.size(), 0.5, 0.002);
}

TEST(Sample, ChiSquareMean) {
  sdtest::UniformStream s(3, 0, sdtest::StreamTag::kGeneric);
  const auto v = D::chi_square1().sample(s, 1000000);
  double sum = 0.0;
  for (double x : v) sum += x;
  EXPECT_NEAR(sum / v.size(), 1.0, 0.01);
}

TEST(Sample, MixtureCompositionMatchesCdf) {
  const auto d = D::mixture(0.8, D::normal(0, 1), D::chi_square1());
  sdtest::UniformStream s(4, 0, sdtest::StreamTag::kGeneric);
  const auto v = d.sample(s, 200000);
  for (double z : {-1.0, 0.0, 0.5, 2.0}) {
    double below = 0;
    for (double x : v) below += x <= z;
    EXPECT_NEAR(below / v.size(), d.cdf(z), 0.005) << z;
  }
}

TEST(Sample, MuMatchesCdf) {
  const auto d = D::mu(1.0);
  sdtest::UniformStream s(5, 0, sdtest::StreamTag::kGeneric);
  const auto v = d.sample(s, 200000);
  for (double z : {0.42, 0.45, 0.5, 0.58}) {
    double below = 0;
    for (double x : v) below += x <= z;
    EXPECT_NEAR(below / v.size(), d.cdf(z), 0.005) << z;
  }
}

TEST(Construction, RejectsInvalidParameters) {
  EXPECT_THROW(D::mu(1.5), sdtest::ConfigError);
  EXPECT_THROW(D::singh_maddala(0.5, 1, 1), sdtest::ConfigError);
  EXPECT_THROW(D::pareto(0.9), sdtest::ConfigError);
  EXPECT_THROW(D::lognormal(0, 0), sdtest::ConfigError);
  EXPECT_THROW(D::normal(0, -1), sdtest::ConfigError);
  EXPECT_THROW(D::laplace(0, 0), sdtest::ConfigError);
  EXPECT_THROW(D::mixture(1.0, D::uniform01(), D::uniform01()), sdtest::ConfigError);
  EXPECT_THROW(D::mixture(0.0, D::uniform01(), D::uniform01()), sdtest::ConfigError);
}

TEST(Normal, CdfAndQuantileAgree) {
  for (double p : {1e-300, 1e-12, 0.01, 0.3, 0.5, 0.9, 1 - 1e-12}) {
    EXPECT_NEAR(sdtest::normal_cdf(sdtest::normal_quantile(p)) / p, 1.0, 1e-9) << p;
  }
  EXPECT_NEAR(sdtest::normal_quantile(0.5), 0.0, 1e-16);
}
