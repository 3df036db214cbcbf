// rng.hpp
//
// Counter-based random numbers for reproducible parallel simulation.
//
// Philox4x32-10 maps a 128-bit counter and a 64-bit key to 128 random bits.
// A Monte Carlo replicate never shares a generator with another replicate:
// its uniforms are addressed by (seed, replicate, purpose, draw index), so the
// output of a simulation does not depend on how replicates are scheduled.

#pragma once

#include <array>
#include <cstdint>

namespace sdtest {

/// Philox4x32 with 10 rounds (Salmon et al., Random123 constants).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter single_round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Purpose tags separate the independent uniform streams of one replicate.
enum class StreamTag : std::uint32_t {
  kFirstSample = 1,
  kSecondSample = 2,
  kTieBreak = 3,
  kGeneric = 4,
};

/// Maps 52 random bits to the open interval (0, 1); never returns 0 or 1.
/// Midpoints k + 1/2 of the 2^52 cells are exact in double precision.
constexpr double bits_to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// An addressable stream of uniforms for one (seed, replicate, tag) triple.
/// Every uniform is a pure function of its index; next() walks the indices.
class UniformStream {
 public:
  constexpr UniformStream(std::uint64_t seed, std::uint64_t replicate,
                          StreamTag tag) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        replicate_(replicate),
        tag_(static_cast<std::uint32_t>(tag)) {}

  /// The index-th uniform of this stream.
  constexpr double at(std::uint64_t index) const noexcept {
    const auto block = generate_block(index >> 1);
    return pick(block, static_cast<unsigned>(index & 1u));
  }

  double next() noexcept {
    if ((position_ & 1u) == 0) block_ = generate_block(position_ >> 1);
    const double u = pick(block_, static_cast<unsigned>(position_ & 1u));
    ++position_;
    return u;
  }

  /// Uniform integer in [0, bound) by multiply-shift on 52 bits; bias is
  /// below 2^-40 for the bounds used here (tie groups, shuffles).
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>(next() * static_cast<double>(bound)) % bound;
  }

  std::uint64_t position() const noexcept { return position_; }

 private:
  constexpr Philox4x32::Counter generate_block(std::uint64_t block) const noexcept {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block), tag_,
                                  static_cast<std::uint32_t>(replicate_),
                                  static_cast<std::uint32_t>(replicate_ >> 32)};
    return Philox4x32::generate(ctr, key_);
  }

  static constexpr double pick(const Philox4x32::Counter& block, unsigned half) noexcept {
    const std::uint64_t bits = (std::uint64_t{block[2 * half]} << 32) | block[2 * half + 1];
    return bits_to_open_unit(bits);
  }

  Philox4x32::Key key_;
  std::uint64_t replicate_;
  std::uint32_t tag_;
  std::uint64_t position_ = 0;
  Philox4x32::Counter block_{};
};

/// SplitMix64 finaliser; used to derive child seeds from (seed, label).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label) noexcept {
  return mix64(mix64(seed) ^ (label * 0xD1B54A32D192ED03ull));
}

}  // namespace sdtest
