// oracle.hpp
//
// Exact null distributions of rank statistics. Under any continuous F = G
// all C(N, m) assignments of ranks to the first sample are equally likely,
// so enumerating them gives the distribution with rational probabilities.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "sdtest/error.hpp"
#include "sdtest/statistics.hpp"

namespace sdtest {

inline constexpr std::int64_t kOracleMaxPooledSize = 16;
inline constexpr double kAtomMergeTolerance = 1e-12;

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Nonnegative rational number; kept unreduced, compared by cross products.
class Rational {
 public:
  Rational() = default;
  Rational(std::uint64_t num, std::uint64_t den) : num_(num), den_(den) {
    if (den == 0) throw DomainError("Rational: zero denominator");
  }

  std::uint64_t numerator() const noexcept { return num_; }
  std::uint64_t denominator() const noexcept { return den_; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  Rational reduced() const {
    const std::uint64_t g = std::gcd(num_, den_);
    return g == 0 ? Rational(0, 1) : Rational(num_ / g, den_ / g);
  }

  std::string str() const {
    const Rational r = reduced();
    return std::to_string(r.num_) + "/" + std::to_string(r.den_);
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return static_cast<unsigned __int128>(a.num_) * b.den_ == static_cast<unsigned __int128>(b.num_) * a.den_;
  }

 private:
  std::uint64_t num_ = 0;
  std::uint64_t den_ = 1;
};

struct Atom {
  double value;
  std::uint64_t count;  // rank assignments mapping to this value
  Rational probability;
};

class ExactNullDistribution {
 public:
  ExactNullDistribution(StatisticKind statistic, std::int64_t m, std::int64_t n, std::vector<Atom> atoms,
                        std::uint64_t assignments)
      : statistic_(std::move(statistic)), m_(m), n_(n), atoms_(std::move(atoms)), assignments_(assignments) {}

  const StatisticKind& statistic() const noexcept { return statistic_; }
  std::int64_t m() const noexcept { return m_; }
  std::int64_t n() const noexcept { return n_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  /// C(N, m), the number of enumerated rank sets.
  std::uint64_t assignments() const noexcept { return assignments_; }

  /// P(S <= w).
  Rational cdf(double w) const {
    std::uint64_t below = 0;
    for (const Atom& a : atoms_)
      if (a.value <= w) below += a.count;
    return Rational(below, assignments_);
  }

  Rational total_probability() const {
    std::uint64_t sum = 0;
    for (const Atom& a : atoms_) sum += a.count;
    return Rational(sum, assignments_);
  }

 private:
  StatisticKind statistic_;
  std::int64_t m_;
  std::int64_t n_;
  std::vector<Atom> atoms_;
  std::uint64_t assignments_;
};

/// Calls fn(mask) for every N-bit mask with exactly m bits set, in
/// increasing order (Gosper's hack).
template <class Fn>
void for_each_subset(std::int64_t total, std::int64_t m, Fn fn) {
  std::uint64_t mask = (std::uint64_t{1} << m) - 1;
  const std::uint64_t limit = std::uint64_t{1} << total;
  while (mask < limit) {
    fn(mask);
    const std::uint64_t low = mask & (~mask + 1);
    const std::uint64_t ripple = mask + low;
    mask = ripple | (((mask ^ ripple) >> 2) / low);
  }
}

/// Rank pattern in which the first sample holds rank r + 1 exactly when bit
/// r of mask is set.
inline RankPattern pattern_from_mask(std::uint64_t mask, std::int64_t total) {
  std::vector<char> labels(static_cast<std::size_t>(total));
  for (std::int64_t r = 0; r < total; ++r) labels[r] = (mask >> r) & 1u;
  return RankPattern::from_labels(labels);
}

/// Exact null distribution by full enumeration; N = m + n must not exceed 16.
inline ExactNullDistribution exact_null(const StatisticKind& statistic, std::int64_t m, std::int64_t n) {
  if (m < 1 || n < 1) throw DomainError("exact_null: sample sizes must be positive");
  if (m + n > kOracleMaxPooledSize)
    throw BudgetError("exact_null: N = " + std::to_string(m + n) + " exceeds the enumeration budget N <= 16");
  const std::int64_t total = m + n;
  const StatisticEvaluator eval(statistic, m, n);
  std::vector<double> values;
  values.reserve(binomial(total, m));
  std::vector<char> labels(static_cast<std::size_t>(total));
  RankPattern pattern;
  for_each_subset(total, m, [&](std::uint64_t mask) {
    for (std::int64_t r = 0; r < total; ++r) labels[r] = (mask >> r) & 1u;
    pattern.assign_labels(labels);
    values.push_back(eval(pattern));
  });
  std::sort(values.begin(), values.end());
  const std::uint64_t assignments = values.size();
  std::vector<Atom> atoms;
  for (double v : values) {
    if (!atoms.empty() && v - atoms.back().value <= kAtomMergeTolerance) {
      ++atoms.back().count;
    } else {
      atoms.push_back({v, 1, {}});
    }
  }
  for (Atom& a : atoms) a.probability = Rational(a.count, assignments);
  return ExactNullDistribution(statistic, m, n, std::move(atoms), assignments);
}

/// P(S > w) as an exact rational.
inline Rational exact_tail(const ExactNullDistribution& dist, double w) {
  std::uint64_t above = 0;
  for (const Atom& a : dist.atoms())
    if (a.value > w) above += a.count;
  return Rational(above, dist.assignments());
}

}  // namespace sdtest
