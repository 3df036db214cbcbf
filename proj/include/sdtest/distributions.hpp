// distributions.hpp
//
// Continuous distribution families used as alternatives: MU (a sine bump
// on the uniform density), Singh-Maddala, Pareto, log-normal, normal,
// chi-square(1), Laplace, uniform and two-component mixtures.
//
// Every family exposes a closed-form CDF. Quantiles are closed-form where an
// inverse exists and bisection on the CDF otherwise. Objects are immutable
// after construction; invalid parameters are rejected by the factories.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "sdtest/error.hpp"
#include "sdtest/normal.hpp"

namespace sdtest {

enum class Family {
  kUniform01,
  kMU,
  kSinghMaddala,
  kPareto,
  kLogNormal,
  kNormal,
  kChiSquare1,
  kLaplace,
  kMixture,
};

struct Support {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

/// Inversion stops once the bracket's CDF gap is at most this (u-space).
inline constexpr double kQuantileTolerance = 1e-12;
inline constexpr int kMaxBisectionSteps = 200;

/// inf{z : cdf(z) >= u} for a nondecreasing cdf, by geometric bracketing
/// followed by bisection. hint_lo/hint_hi seed the bracket; finite support
/// endpoints are used directly.
template <class Cdf>
double invert_cdf(const Cdf& cdf, double u, Support support, double hint_lo = -1.0,
                  double hint_hi = 1.0) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: u must lie in (0,1)");
  double lo, hi, flo, fhi;
  if (std::isfinite(support.lower)) {
    lo = support.lower;
    flo = cdf(lo);
  } else {
    lo = hint_lo;
    flo = cdf(lo);
    double width = std::max(1.0, std::fabs(lo));
    while (flo >= u) {
      lo -= width;
      width *= 2.0;
      if (!std::isfinite(lo)) throw DomainError("quantile: lower bracket diverged");
      flo = cdf(lo);
    }
  }
  if (std::isfinite(support.upper)) {
    hi = support.upper;
    fhi = cdf(hi);
  } else {
    hi = std::max(hint_hi, lo + 1.0);
    fhi = cdf(hi);
    double width = std::max(1.0, std::fabs(hi));
    while (fhi < u) {
      hi += width;
      width *= 2.0;
      if (!std::isfinite(hi)) throw DomainError("quantile: upper bracket diverged");
      fhi = cdf(hi);
    }
  }
  for (int step = 0; step < kMaxBisectionSteps && fhi - flo > kQuantileTolerance; ++step) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double fmid = cdf(mid);
    if (fmid < u) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
      fhi = fmid;
    }
  }
  return hi;
}

class ContinuousDistribution;

namespace family {

struct Uniform01 {};

/// Density 1 + a sin(10 pi x) on (0.4, 0.6), 1 elsewhere on [0, 1].
struct MU {
  double a;
};

/// CDF 1 - [1 + (x/b)^a]^(-c), x > 0.
struct SinghMaddala {
  double a, b, c;
};

/// Pareto(a) = SinghMaddala(a, 1, 1).
struct Pareto {
  double a;
};

struct LogNormal {
  double a, b;  // mean and standard deviation of log X
};

struct Normal {
  double a, b;  // mean and standard deviation
};

struct ChiSquare1 {};

struct Laplace {
  double a, b;  // location and scale
};

/// weight * first + (1 - weight) * second.
struct Mixture {
  double weight;
  std::shared_ptr<const ContinuousDistribution> first;
  std::shared_ptr<const ContinuousDistribution> second;
};

}  // namespace family

class ContinuousDistribution {
 public:
  using Variant =
      std::variant<family::Uniform01, family::MU, family::SinghMaddala, family::Pareto,
                   family::LogNormal, family::Normal, family::ChiSquare1, family::Laplace,
                   family::Mixture>;

  static ContinuousDistribution uniform01() { return ContinuousDistribution(family::Uniform01{}); }

  static ContinuousDistribution mu(double a) {
    if (!(a >= -1.0 && a <= 1.0)) throw ConfigError("MU(a): a must lie in [-1,1]");
    return ContinuousDistribution(family::MU{a});
  }

  static ContinuousDistribution singh_maddala(double a, double b, double c) {
    if (!(a >= 1.0 && b >= 1.0 && c >= 1.0) || !std::isfinite(a + b + c))
      throw ConfigError("SM(a,b,c): requires a, b, c >= 1");
    return ContinuousDistribution(family::SinghMaddala{a, b, c});
  }

  static ContinuousDistribution pareto(double a) {
    if (!(a >= 1.0) || !std::isfinite(a)) throw ConfigError("Pareto(a): requires a >= 1");
    return ContinuousDistribution(family::Pareto{a});
  }

  static ContinuousDistribution lognormal(double a, double b) {
    if (!std::isfinite(a) || !(b > 0.0) || !std::isfinite(b))
      throw ConfigError("LN(a,b): requires finite a and b > 0");
    return ContinuousDistribution(family::LogNormal{a, b});
  }

  static ContinuousDistribution normal(double a, double b) {
    if (!std::isfinite(a) || !(b > 0.0) || !std::isfinite(b))
      throw ConfigError("N(a,b): requires finite a and b > 0");
    return ContinuousDistribution(family::Normal{a, b});
  }

  static ContinuousDistribution chi_square1() { return ContinuousDistribution(family::ChiSquare1{}); }

  static ContinuousDistribution laplace(double a, double b) {
    if (!std::isfinite(a) || !(b > 0.0) || !std::isfinite(b))
      throw ConfigError("Laplace(a,b): requires finite a and b > 0");
    return ContinuousDistribution(family::Laplace{a, b});
  }

  static ContinuousDistribution mixture(double weight, ContinuousDistribution first,
                                        ContinuousDistribution second) {
    if (!(weight > 0.0 && weight < 1.0)) throw ConfigError("mixture weight must lie in (0,1)");
    return ContinuousDistribution(family::Mixture{
        weight, std::make_shared<const ContinuousDistribution>(std::move(first)),
        std::make_shared<const ContinuousDistribution>(std::move(second))});
  }

  Family family() const noexcept { return static_cast<Family>(impl_.index()); }
  const Variant& variant() const noexcept { return impl_; }

  double cdf(double z) const noexcept {
    return std::visit([z](const auto& d) { return cdf_of(d, z); }, impl_);
  }

  /// inf{z : cdf(z) >= u}, u in (0,1).
  double quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: u must lie in (0,1)");
    return std::visit([this, u](const auto& d) { return quantile_of(d, u); }, impl_);
  }

  /// Maps one uniform variate to one draw. Equal to quantile(u) for every
  /// family except mixtures, which use composition: u selects the component
  /// and is rescaled into that component's (0,1).
  double draw(double u) const {
    if (const auto* mix = std::get_if<family::Mixture>(&impl_)) {
      if (u < mix->weight) return mix->first->draw(u / mix->weight);
      const double v = (u - mix->weight) / (1.0 - mix->weight);
      return mix->second->draw(std::min(std::max(v, 0x1.0p-60), 1.0 - 0x1.0p-53));
    }
    return quantile(u);
  }

  template <class Stream>
  void sample_into(Stream& stream, std::span<double> out) const {
    for (double& v : out) v = draw(stream.next());
  }

  template <class Stream>
  std::vector<double> sample(Stream& stream, std::size_t count) const {
    std::vector<double> out(count);
    sample_into(stream, std::span<double>(out));
    return out;
  }

  Support support() const noexcept {
    return std::visit([](const auto& d) { return support_of(d); }, impl_);
  }

  /// Short human-readable name, e.g. "LN(0,1)" or "0.8*N(0,1)+0.2*chi2_1".
  std::string describe() const {
    return std::visit([](const auto& d) { return describe_of(d); }, impl_);
  }

 private:
  explicit ContinuousDistribution(Variant v) : impl_(std::move(v)) {}

  static double sm_cdf(double x, double a, double b, double c) noexcept {
    if (x <= 0.0) return 0.0;
    return -std::expm1(-c * std::log1p(std::pow(x / b, a)));
  }
  static double sm_quantile(double u, double a, double b, double c) noexcept {
    return b * std::pow(std::expm1(-std::log1p(-u) / c), 1.0 / a);
  }

  static double cdf_of(const family::Uniform01&, double z) noexcept {
    return z <= 0.0 ? 0.0 : (z >= 1.0 ? 1.0 : z);
  }
  static double cdf_of(const family::MU& d, double z) noexcept {
    if (z <= 0.0) return 0.0;
    if (z >= 1.0) return 1.0;
    if (z <= 0.4 || z >= 0.6) return z;
    return z + d.a * (1.0 - std::cos(10.0 * M_PI * z)) / (10.0 * M_PI);
  }
  static double cdf_of(const family::SinghMaddala& d, double z) noexcept {
    return sm_cdf(z, d.a, d.b, d.c);
  }
  static double cdf_of(const family::Pareto& d, double z) noexcept { return sm_cdf(z, d.a, 1.0, 1.0); }
  static double cdf_of(const family::LogNormal& d, double z) noexcept {
    if (z <= 0.0) return 0.0;
    return normal_cdf((std::log(z) - d.a) / d.b);
  }
  static double cdf_of(const family::Normal& d, double z) noexcept {
    return normal_cdf((z - d.a) / d.b);
  }
  static double cdf_of(const family::ChiSquare1&, double z) noexcept {
    if (z <= 0.0) return 0.0;
    return std::erf(std::sqrt(0.5 * z));
  }
  static double cdf_of(const family::Laplace& d, double z) noexcept {
    const double s = (z - d.a) / d.b;
    return s < 0.0 ? 0.5 * std::exp(s) : 1.0 - 0.5 * std::exp(-s);
  }
  static double cdf_of(const family::Mixture& d, double z) noexcept {
    return d.weight * d.first->cdf(z) + (1.0 - d.weight) * d.second->cdf(z);
  }

  double quantile_of(const family::Uniform01&, double u) const noexcept { return u; }
  double quantile_of(const family::MU& d, double u) const {
    if (u <= 0.4 || u >= 0.6 || d.a == 0.0) return u;
    return invert_cdf([&d](double z) { return cdf_of(d, z); }, u, Support{0.4, 0.6});
  }
  double quantile_of(const family::SinghMaddala& d, double u) const noexcept {
    return sm_quantile(u, d.a, d.b, d.c);
  }
  double quantile_of(const family::Pareto& d, double u) const noexcept {
    return sm_quantile(u, d.a, 1.0, 1.0);
  }
  double quantile_of(const family::LogNormal& d, double u) const {
    return std::exp(d.a + d.b * normal_quantile(u));
  }
  double quantile_of(const family::Normal& d, double u) const {
    return d.a + d.b * normal_quantile(u);
  }
  double quantile_of(const family::ChiSquare1&, double u) const {
    const double z = normal_quantile(0.5 * (1.0 - u));
    return z * z;
  }
  double quantile_of(const family::Laplace& d, double u) const noexcept {
    return u < 0.5 ? d.a + d.b * std::log(2.0 * u) : d.a - d.b * std::log(2.0 * (1.0 - u));
  }
  double quantile_of(const family::Mixture& d, double u) const {
    const Support s = support();
    const auto mixed = [this](double z) { return cdf(z); };
    if (std::isfinite(s.lower) && std::isfinite(s.upper)) return invert_cdf(mixed, u, s);
    // The mixture quantile lies between the component quantiles.
    const double q1 = d.first->quantile(u);
    const double q2 = d.second->quantile(u);
    return invert_cdf(mixed, u, s, std::min(q1, q2), std::max(q1, q2));
  }

  static Support support_of(const family::Uniform01&) noexcept { return {0.0, 1.0}; }
  static Support support_of(const family::MU&) noexcept { return {0.0, 1.0}; }
  static Support support_of(const family::SinghMaddala&) noexcept {
    return {0.0, std::numeric_limits<double>::infinity()};
  }
  static Support support_of(const family::Pareto&) noexcept {
    return {0.0, std::numeric_limits<double>::infinity()};
  }
  static Support support_of(const family::LogNormal&) noexcept {
    return {0.0, std::numeric_limits<double>::infinity()};
  }
  static Support support_of(const family::Normal&) noexcept { return {}; }
  static Support support_of(const family::ChiSquare1&) noexcept {
    return {0.0, std::numeric_limits<double>::infinity()};
  }
  static Support support_of(const family::Laplace&) noexcept { return {}; }
  static Support support_of(const family::Mixture& d) noexcept {
    const Support a = d.first->support();
    const Support b = d.second->support();
    return {std::min(a.lower, b.lower), std::max(a.upper, b.upper)};
  }

  static std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
  }
  static std::string describe_of(const family::Uniform01&) { return "U(0,1)"; }
  static std::string describe_of(const family::MU& d) { return "MU(" + num(d.a) + ")"; }
  static std::string describe_of(const family::SinghMaddala& d) {
    return "SM(" + num(d.a) + "," + num(d.b) + "," + num(d.c) + ")";
  }
  static std::string describe_of(const family::Pareto& d) { return "Pareto(" + num(d.a) + ")"; }
  static std::string describe_of(const family::LogNormal& d) {
    return "LN(" + num(d.a) + "," + num(d.b) + ")";
  }
  static std::string describe_of(const family::Normal& d) {
    return "N(" + num(d.a) + "," + num(d.b) + ")";
  }
  static std::string describe_of(const family::ChiSquare1&) { return "chi2_1"; }
  static std::string describe_of(const family::Laplace& d) {
    return "Laplace(" + num(d.a) + "," + num(d.b) + ")";
  }
  static std::string describe_of(const family::Mixture& d) {
    return num(d.weight) + "*" + d.first->describe() + "+" + num(1.0 - d.weight) + "*" +
           d.second->describe();
  }

  Variant impl_;
};

inline double cdf(const ContinuousDistribution& dist, double z) { return dist.cdf(z); }
inline double quantile(const ContinuousDistribution& dist, double u) { return dist.quantile(u); }

template <class Stream>
std::vector<double> sample(const ContinuousDistribution& dist, Stream& stream, std::size_t count) {
  return dist.sample(stream, count);
}

}  // namespace sdtest
