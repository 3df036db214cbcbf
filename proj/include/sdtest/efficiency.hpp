// efficiency.hpp
//
// Deviation functions of an alternative pair (F1, G1) with pooled mixture
// J1 = eta F1 + (1 - eta) G1:
//   Abar(t)  = (G1 - F1)(J1^{-1}(t))
//   Astar(t) = Abar(t) / sqrt(t (1 - t))
// the intermediate efficiency of T_N relative to V_N,
//   e_TV(eta) = (1/4) [sup Astar / sup Abar]^2  >= 1,
// and the centering sequences b_V, b_T along a contamination path.
//
// Everything is templated over any pair of types exposing cdf(z) and
// quantile(u); AlternativePair overloads cover the usual case.

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <exception>
#include <limits>
#include <cstdint>
#include <thread>
#include <vector>

#include "sdtest/alternatives.hpp"
#include "sdtest/error.hpp"
#include "sdtest/partition.hpp"

namespace sdtest {

template <class D>
concept CdfQuantile = requires(const D& d, double x) {
  { d.cdf(x) } -> std::convertible_to<double>;
  { d.quantile(x) } -> std::convertible_to<double>;
};

inline constexpr int kEfficiencyScanPoints = 10000;
inline constexpr double kEfficiencyScanEdge = 1e-6;
inline constexpr double kGoldenRelativeTolerance = 1e-9;
inline constexpr double kMinimumSupAbar = 1e-9;

struct EfficiencyReport {
  double eta = 0.0;
  double sup_abar = 0.0;
  double argmax_abar = 0.0;
  double sup_astar = 0.0;
  double argmax_astar = 0.0;
  double e_tv = 0.0;
};

template <CdfQuantile F, CdfQuantile G>
class DeviationFunctions {
 public:
  DeviationFunctions(const F& f1, const G& g1, double eta) : f1_(f1), g1_(g1), eta_(eta) {
    if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("deviation functions: eta must lie in (0,1)");
  }

  double eta() const noexcept { return eta_; }

  double j1(double z) const { return eta_ * f1_.cdf(z) + (1.0 - eta_) * g1_.cdf(z); }

  /// z with J1(z) = t. J1 lies between its components, so the two component
  /// quantiles bracket the root. Illinois false position, falling back to
  /// bisection whenever the secant leaves the bracket.
  double j1_inverse(double t) const {
    if (!(t > 0.0 && t < 1.0)) throw DomainError("J1 inverse: t must lie in (0,1)");
    const double qf = f1_.quantile(t);
    const double qg = g1_.quantile(t);
    double lo = std::min(qf, qg);
    double hi = std::max(qf, qg);
    double flo = j1(lo);
    double fhi = j1(hi);
    double glo = flo - t;
    double ghi = fhi - t;
    int retained = 0;
    for (int step = 0; step < kMaxBisectionSteps && fhi - flo > kQuantileTolerance; ++step) {
      double z = (glo != ghi) ? (lo * ghi - hi * glo) / (ghi - glo) : 0.5 * (lo + hi);
      if (!(z > lo && z < hi)) z = 0.5 * (lo + hi);
      if (z <= lo || z >= hi) break;
      const double fz = j1(z);
      const double gz = fz - t;
      if (gz < 0.0) {
        lo = z;
        flo = fz;
        glo = gz;
        if (retained == 1) ghi *= 0.5;
        retained = 1;
      } else {
        hi = z;
        fhi = fz;
        ghi = gz;
        if (retained == -1) glo *= 0.5;
        retained = -1;
      }
    }
    return 0.5 * (lo + hi);
  }

  double abar(double t) const {
    const double z = j1_inverse(t);
    return g1_.cdf(z) - f1_.cdf(z);
  }

  double astar(double t) const { return abar(t) / std::sqrt(t * (1.0 - t)); }

 private:
  const F& f1_;
  const G& g1_;
  double eta_;
};

namespace detail {

struct Maximum {
  double t;
  double value;
};

/// Golden-section search for a maximum on [a, b]; stops when the bracket is
/// below kGoldenRelativeTolerance relative to its location.
template <class Fn>
Maximum golden_maximize(Fn fn, double a, double b) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  while (b - a > kGoldenRelativeTolerance * std::max(std::fabs(c), 1e-300)) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
  }
  return fc >= fd ? Maximum{c, fc} : Maximum{d, fd};
}

/// Best of precomputed values on the t grid, refined around the best cell.
/// On plateaus the smallest maximizing grid point wins.
template <class Fn>
Maximum refine_maximum(Fn fn, const std::vector<double>& grid, const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (values[i] > values[best]) best = i;
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  const Maximum refined = golden_maximize(fn, lo, hi);
  if (refined.value > values[best]) return refined;
  return {grid[best], values[best]};
}

inline const std::vector<double>& efficiency_scan_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g(kEfficiencyScanPoints);
    const double span = 1.0 - 2.0 * kEfficiencyScanEdge;
    for (int i = 0; i < kEfficiencyScanPoints; ++i)
      g[i] = kEfficiencyScanEdge + span * i / (kEfficiencyScanPoints - 1);
    return g;
  }();
  return grid;
}

}  // namespace detail

template <CdfQuantile F, CdfQuantile G>
double abar(const F& f1, const G& g1, double eta, double t) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("abar: t must lie in (0,1)");
  return DeviationFunctions<F, G>(f1, g1, eta).abar(t);
}

template <CdfQuantile F, CdfQuantile G>
double astar(const F& f1, const G& g1, double eta, double t) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("astar: t must lie in (0,1)");
  return DeviationFunctions<F, G>(f1, g1, eta).astar(t);
}

inline double abar(const AlternativePair& pair, double t) { return abar(pair.f1(), pair.g1(), pair.eta(), t); }
inline double astar(const AlternativePair& pair, double t) { return astar(pair.f1(), pair.g1(), pair.eta(), t); }

template <CdfQuantile F, CdfQuantile G>
EfficiencyReport efficiency_tv(const F& f1, const G& g1, double eta) {
  const DeviationFunctions<F, G> dev(f1, g1, eta);
  const auto& grid = detail::efficiency_scan_grid();
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = dev.abar(grid[i]);
  const auto a = detail::refine_maximum([&](double t) { return dev.abar(t); }, grid, values);
  if (!(a.value >= kMinimumSupAbar))
    throw DomainError("efficiency_tv: pair not detectably in H1 (sup Abar below 1e-9)");
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] /= std::sqrt(grid[i] * (1.0 - grid[i]));
  auto s = detail::refine_maximum([&](double t) { return dev.astar(t); }, grid, values);
  // Astar at the Abar maximizer is at least 2 sup Abar; keeping it as a
  // candidate makes e_TV >= 1 hold in floating point as well.
  const double at_abar = a.value / std::sqrt(a.t * (1.0 - a.t));
  if (at_abar > s.value) s = {a.t, at_abar};
  EfficiencyReport r;
  r.eta = eta;
  r.sup_abar = a.value;
  r.argmax_abar = a.t;
  r.sup_astar = s.value;
  r.argmax_astar = s.t;
  const double ratio = s.value / (2.0 * a.value);
  r.e_tv = ratio * ratio;
  return r;
}

inline EfficiencyReport efficiency_tv(const AlternativePair& pair) {
  return efficiency_tv(pair.f1(), pair.g1(), pair.eta());
}

/// start, start + step, ..., stop; values are rounded to 12 decimals so that
/// 0.01:0.99:0.01 yields exactly the decimal literals.
inline std::vector<double> linear_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) throw ConfigError("grid: need step > 0 and stop >= start");
  const auto count = static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) out.push_back(std::round((start + step * i) * 1e12) / 1e12);
  return out;
}

/// The 99-point eta grid 0.01, 0.02, ..., 0.99.
inline std::vector<double> default_eta_grid() { return linear_grid(0.01, 0.99, 0.01); }

/// e_TV over an eta grid. Each entry is computed independently and written
/// to its own slot, so results do not depend on the thread count.
template <CdfQuantile F, CdfQuantile G>
std::vector<EfficiencyReport> efficiency_curve(const F& f1, const G& g1, const std::vector<double>& etas,
                                               unsigned threads = 1) {
  std::vector<EfficiencyReport> out(etas.size());
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(etas.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < etas.size(); ++i) out[i] = efficiency_tv(f1, g1, etas[i]);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < etas.size(); i += threads) out[i] = efficiency_tv(f1, g1, etas[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

inline std::vector<EfficiencyReport> efficiency_curve(const AlternativePair& pair, const std::vector<double>& etas,
                                                      unsigned threads = 1) {
  return efficiency_curve(pair.f1(), pair.g1(), etas, threads);
}

/// First-sample size floor(eta N), kept inside [1, N - 1].
inline std::int64_t first_sample_size(double eta, std::int64_t n) {
  if (n < 2) throw ConfigError("pooled size N must be at least 2");
  return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(eta * static_cast<double>(n))), 1, n - 1);
}

inline double sample_scale(std::int64_t m, std::int64_t n) {
  return std::sqrt(static_cast<double>(m) * static_cast<double>(n) / static_cast<double>(m + n));
}

/// b_V = sqrt(mn/N) theta sup Abar.
inline double centering_v(const AlternativePair& pair, double theta, std::int64_t m, std::int64_t n) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("centering_v: theta outside [0,1]");
  if (theta == 0.0) return 0.0;
  return sample_scale(m, n) * theta * efficiency_tv(pair).sup_abar;
}

inline double centering_v(const ContaminationPath& path, std::int64_t total) {
  const std::int64_t m = first_sample_size(path.base().eta(), total);
  return centering_v(path.base(), path.theta(static_cast<int>(total)), m, total - m);
}

/// b_T = theta sqrt(mn/N) max_j Abar(pi_j) / sqrt(pi_j (1 - pi_j)).
inline double centering_t(const AlternativePair& pair, double theta, std::int64_t m, std::int64_t n,
                          const PartitionScheme& scheme) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("centering_t: theta outside [0,1]");
  const auto grid = scheme.grid(m + n);
  if (theta == 0.0) return 0.0;
  const DeviationFunctions<ContinuousDistribution, ContinuousDistribution> dev(pair.f1(), pair.g1(), pair.eta());
  double best = -std::numeric_limits<double>::infinity();
  for (const GridPoint& g : grid) best = std::max(best, dev.astar(g.pi));
  return theta * sample_scale(m, n) * best;
}

inline double centering_t(const ContaminationPath& path, std::int64_t total, const PartitionScheme& scheme) {
  const std::int64_t m = first_sample_size(path.base().eta(), total);
  return centering_t(path.base(), path.theta(static_cast<int>(total)), m, total - m, scheme);
}

}  // namespace sdtest
