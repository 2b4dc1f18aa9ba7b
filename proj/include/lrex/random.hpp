#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

#include <boost/random/exponential_distribution.hpp>

namespace lrex {

/// xoshiro256++ (Blackman and Vigna). The simulator draws three variates per
/// attempted jump, and this engine is several times faster than mt19937_64.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed = 0) { seed_from(seed); }

  void seed_from(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x9e3779b9u, 0x7f4a7c15u};
    std::array<std::uint32_t, 8> words{};
    seq.generate(words.begin(), words.end());
    for (int i = 0; i < 4; ++i)
      s_[i] = (static_cast<std::uint64_t>(words[2 * i]) << 32) | words[2 * i + 1];
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    const std::uint64_t r = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return r;
  }

  bool operator==(const Xoshiro256pp&) const = default;

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_{};
};

/// Random stream used by all samplers, with the handful of variates the
/// simulator needs on its hot path.
class Rng {
 public:
  using result_type = std::uint64_t;
  using engine_type = Xoshiro256pp;

  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    engine_.seed_from(seed);
    normal_.reset();
  }

  static constexpr result_type min() { return engine_type::min(); }
  static constexpr result_type max() { return engine_type::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) by the multiply-high reduction.
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(engine_()) * bound) >> 64);
  }

  /// Exponential variate with unit rate (ziggurat).
  double exponential() { return exponential_(engine_); }

  double normal() { return normal_(engine_); }

  engine_type& engine() { return engine_; }

 private:
  engine_type engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  boost::random::exponential_distribution<double> exponential_{1.0};
};

/// Stream seed for replicate `index` of an experiment with base seed `base`.
inline std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t index) { return base ^ index; }

}  // namespace lrex
