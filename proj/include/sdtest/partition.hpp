// partition.hpp
//
// Grids 0 < pi_1N < ... < pi_Delta(N)N < 1 selecting which weighted linear
// rank statistics enter the maximum. Presets:
//   DyadicStar   Delta(N) = 2^floor(log2 N) - 1, pi_j = j / (Delta + 1)
//   DenseO       pi_j = j / (N + 1), 1 + floor(sqrt N) <= j <= N - floor(sqrt N)
//   PowerLaw(p)  Delta(N) = floor(N^p), pi_j = j / (Delta + 1)
//   Explicit     a fixed list of points

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sdtest/error.hpp"

namespace sdtest {

/// A grid point; num/den is its exact rational value when den > 0.
struct GridPoint {
  double pi;
  std::int64_t num = 0;
  std::int64_t den = 0;

  bool rational() const noexcept { return den > 0; }
};

inline std::int64_t isqrt_floor(std::int64_t n) {
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

class PartitionScheme {
 public:
  enum class Kind { kDyadicStar, kDenseO, kPowerLaw, kExplicit };

  static PartitionScheme dyadic_star() { return PartitionScheme(Kind::kDyadicStar, 0.0, {}); }
  static PartitionScheme dense_o() { return PartitionScheme(Kind::kDenseO, 0.0, {}); }

  static PartitionScheme power_law(double p) {
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("PowerLaw(p): p must lie in (0,1]");
    return PartitionScheme(Kind::kPowerLaw, p, {});
  }

  static PartitionScheme explicit_points(std::vector<double> points) {
    if (points.empty()) throw ConfigError("Explicit scheme: no grid points");
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!(points[i] > 0.0 && points[i] < 1.0))
        throw ConfigError("Explicit scheme: grid points must lie in (0,1)");
      if (i > 0 && !(points[i] > points[i - 1]))
        throw ConfigError("Explicit scheme: grid must be strictly increasing");
    }
    return PartitionScheme(Kind::kExplicit, 0.0, std::move(points));
  }

  Kind kind() const noexcept { return kind_; }
  double exponent() const noexcept { return p_; }
  const std::vector<double>& points() const noexcept { return points_; }

  /// Delta(N) for this scheme at pooled size N.
  std::int64_t size(std::int64_t n) const {
    switch (kind_) {
      case Kind::kDyadicStar:
        return n < 1 ? 0 : (std::int64_t{1} << (std::bit_width(static_cast<std::uint64_t>(n)) - 1)) - 1;
      case Kind::kDenseO: {
        const std::int64_t r = isqrt_floor(n);
        return std::max<std::int64_t>(0, (n - r) - (1 + r) + 1);
      }
      case Kind::kPowerLaw:
        // The relative nudge keeps exact powers (8^(1/3) = 2) from flooring down.
        return static_cast<std::int64_t>(std::floor(std::pow(static_cast<double>(n), p_) * (1.0 + 1e-12)));
      case Kind::kExplicit:
        return static_cast<std::int64_t>(points_.size());
    }
    return 0;
  }

  /// The grid at pooled size N; throws ConfigError when Delta(N) < 1.
  std::vector<GridPoint> grid(std::int64_t n) const {
    if (n < 2) throw ConfigError("partition grid requires N >= 2");
    std::vector<GridPoint> out;
    switch (kind_) {
      case Kind::kDyadicStar:
      case Kind::kPowerLaw: {
        const std::int64_t delta = size(n);
        for (std::int64_t j = 1; j <= delta; ++j)
          out.push_back({static_cast<double>(j) / static_cast<double>(delta + 1), j, delta + 1});
        break;
      }
      case Kind::kDenseO: {
        const std::int64_t r = isqrt_floor(n);
        for (std::int64_t j = 1 + r; j <= n - r; ++j)
          out.push_back({static_cast<double>(j) / static_cast<double>(n + 1), j, n + 1});
        break;
      }
      case Kind::kExplicit:
        for (double p : points_) out.push_back({p});
        break;
    }
    if (out.empty())
      throw ConfigError("partition scheme " + name() + " has Delta(N) < 1 at N = " + std::to_string(n));
    return out;
  }

  std::string name() const {
    switch (kind_) {
      case Kind::kDyadicStar:
        return "dyadic";
      case Kind::kDenseO:
        return "dense";
      case Kind::kPowerLaw: {
        std::ostringstream os;
        os << "power:" << p_;
        return os.str();
      }
      case Kind::kExplicit: {
        std::ostringstream os;
        os.precision(17);
        os << "explicit:";
        for (std::size_t i = 0; i < points_.size(); ++i) os << (i ? "," : "") << points_[i];
        return os.str();
      }
    }
    return {};
  }

 private:
  PartitionScheme(Kind kind, double p, std::vector<double> points)
      : kind_(kind), p_(p), points_(std::move(points)) {}

  Kind kind_;
  double p_;
  std::vector<double> points_;
};

}  // namespace sdtest
