// alternatives.hpp
//
// Alternative pairs (F1, G1), the pooled mixture J1 = eta F1 + (1 - eta) G1,
// and contamination paths
//   (F1N, G1N) = (1 - theta_N) (J1, J1) + theta_N (F1, G1).

#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdtest/distributions.hpp"
#include "sdtest/error.hpp"

namespace sdtest {

/// Points at which membership in H1 (G1 > F1 somewhere) is probed.
inline std::vector<double> h1_probe_grid(const ContinuousDistribution& f1,
                                         const ContinuousDistribution& g1, int points = 4001) {
  std::vector<double> grid;
  grid.reserve(2 * static_cast<std::size_t>(points));
  for (int i = 1; i <= points; ++i) {
    const double u = static_cast<double>(i) / (points + 1);
    grid.push_back(f1.quantile(u));
    grid.push_back(g1.quantile(u));
  }
  return grid;
}

class AlternativePair {
 public:
  /// Throws ConfigError unless eta in (0,1) and g1.cdf(z) > f1.cdf(z) at
  /// some point of a dense quantile grid of both distributions.
  AlternativePair(ContinuousDistribution f1, ContinuousDistribution g1, double eta,
                  std::string name = {})
      : f1_(std::move(f1)), g1_(std::move(g1)), eta_(eta), name_(std::move(name)) {
    if (!(eta_ > 0.0 && eta_ < 1.0)) throw ConfigError("AlternativePair: eta must lie in (0,1)");
    double best = 0.0;
    for (double z : h1_probe_grid(f1_, g1_)) best = std::max(best, g1_.cdf(z) - f1_.cdf(z));
    if (!(best > 0.0))
      throw ConfigError("AlternativePair: G1 never exceeds F1 on the probe grid (pair not in H1)");
  }

  /// Builds a pair without the H1 check; for null-model size checks only.
  static AlternativePair unchecked(ContinuousDistribution f1, ContinuousDistribution g1,
                                   double eta, std::string name = {}) {
    return AlternativePair(std::move(f1), std::move(g1), eta, std::move(name), Unchecked{});
  }

  const ContinuousDistribution& f1() const noexcept { return f1_; }
  const ContinuousDistribution& g1() const noexcept { return g1_; }
  double eta() const noexcept { return eta_; }
  const std::string& name() const noexcept { return name_; }

  /// Same distributions, different limiting fraction.
  AlternativePair with_eta(double eta) const {
    if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("AlternativePair: eta must lie in (0,1)");
    AlternativePair copy = *this;
    copy.eta_ = eta;
    return copy;
  }

  std::string describe() const { return f1_.describe() + "/" + g1_.describe(); }

  /// J1 as a distribution object: Mixture(eta, F1, G1).
  ContinuousDistribution pooled() const { return ContinuousDistribution::mixture(eta_, f1_, g1_); }

 private:
  struct Unchecked {};
  AlternativePair(ContinuousDistribution f1, ContinuousDistribution g1, double eta,
                  std::string name, Unchecked)
      : f1_(std::move(f1)), g1_(std::move(g1)), eta_(eta), name_(std::move(name)) {
    if (!(eta_ > 0.0 && eta_ < 1.0)) throw ConfigError("AlternativePair: eta must lie in (0,1)");
  }

  ContinuousDistribution f1_;
  ContinuousDistribution g1_;
  double eta_;
  std::string name_;
};

inline double pooled_mixture_cdf(const AlternativePair& pair, double z) {
  return pair.eta() * pair.f1().cdf(z) + (1.0 - pair.eta()) * pair.g1().cdf(z);
}

/// theta_N = N^(-q), or any explicit sequence.
class ContaminationPath {
 public:
  ContaminationPath(AlternativePair base, double q)
      : base_(std::move(base)), q_(q), theta_([q](int n) { return std::pow(n, -q); }) {
    if (!(q > 0.0)) throw ConfigError("ContaminationPath: exponent q must be positive");
  }

  ContaminationPath(AlternativePair base, std::function<double(int)> theta)
      : base_(std::move(base)), theta_(std::move(theta)) {}

  const AlternativePair& base() const noexcept { return base_; }
  std::optional<double> exponent() const noexcept { return q_; }

  /// theta_N; throws ConfigError when outside (0,1).
  double theta(int n) const {
    if (n < 2) throw ConfigError("ContaminationPath: N must be at least 2");
    const double t = theta_(n);
    if (!(t > 0.0 && t < 1.0))
      throw ConfigError("ContaminationPath: theta_N = " + std::to_string(t) + " lies outside (0,1)");
    return t;
  }

 private:
  AlternativePair base_;
  std::optional<double> q_;
  std::function<double(int)> theta_;
};

struct DistributionPair {
  ContinuousDistribution first;
  ContinuousDistribution second;
};

/// (F1N, G1N) for an explicit theta in [0,1]; at theta = 0 both equal J1,
/// at theta = 1 the pair is (F1, G1).
inline DistributionPair contaminated_pair(const AlternativePair& pair, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("contaminated_pair: theta outside [0,1]");
  const ContinuousDistribution j1 = pair.pooled();
  if (theta == 0.0) return {j1, j1};
  if (theta == 1.0) return {pair.f1(), pair.g1()};
  return {ContinuousDistribution::mixture(1.0 - theta, j1, pair.f1()),
          ContinuousDistribution::mixture(1.0 - theta, j1, pair.g1())};
}

inline DistributionPair contaminated_pair(const ContaminationPath& path, int n) {
  return contaminated_pair(path.base(), path.theta(n));
}

/// Named alternative pairs covering each family of the simulation study.
/// The figure parameters are not all published, so these are catalogue
/// choices; configs may specify any other pair.
inline std::map<std::string, AlternativePair> preset_pairs(double eta = 0.5) {
  using D = ContinuousDistribution;
  std::map<std::string, AlternativePair> out;
  out.emplace("fan", AlternativePair(D::mu(-1.0), D::mu(1.0), eta, "fan"));
  out.emplace("pareto", AlternativePair(D::pareto(2.0), D::pareto(1.0), eta, "pareto"));
  out.emplace("singh_maddala", AlternativePair(D::singh_maddala(2.0, 2.0, 1.0),
                                               D::singh_maddala(2.0, 1.0, 1.0), eta,
                                               "singh_maddala"));
  out.emplace("lognormal",
              AlternativePair(D::lognormal(0.0, 1.0), D::lognormal(1.0, 2.0), eta, "lognormal"));
  out.emplace("normal_chisq",
              AlternativePair(D::mixture(0.8, D::normal(0.0, 1.0), D::chi_square1()),
                              D::normal(0.0, 1.0), eta, "normal_chisq"));
  out.emplace("laplace",
              AlternativePair(D::laplace(0.0, 1.0), D::laplace(1.0, 1.25), eta, "laplace"));
  return out;
}

inline AlternativePair preset_pair(const std::string& name, double eta = 0.5) {
  auto all = preset_pairs(eta);
  auto it = all.find(name);
  if (it == all.end()) throw ConfigError("unknown preset pair '" + name + "'");
  return it->second;
}

}  // namespace sdtest
