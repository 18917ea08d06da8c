#ifndef BTC_RNG_HPP
#define BTC_RNG_HPP

// Seeded, stream-splittable random number generator.
//
// The engine is xoshiro256++; its 256-bit state is derived from a
// (seed, stream) pair by SplitMix64 mixing, so every chain or replicate
// can own an independent stream without sharing or locking. All variates
// are produced by code in this library (never by <random> distributions,
// whose output is implementation-defined) so draw sequences replay
// identically across standard libraries.

#include <cmath>
#include <cstdint>
#include <limits>

namespace btc {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Compose a stream id from a replicate index, a chain index and a purpose
/// tag (data generation vs. fitting) so that independent uses never collide.
constexpr std::uint64_t stream_id(std::uint32_t replicate, std::uint16_t chain,
                                  std::uint16_t purpose) {
  return (static_cast<std::uint64_t>(replicate) << 32) |
         (static_cast<std::uint64_t>(chain) << 16) | purpose;
}

enum StreamPurpose : std::uint16_t {
  kStreamFit = 0,
  kStreamScenario = 1,
  kStreamCovariates = 2,
  kStreamOutcomes = 3,
  kStreamSplit = 4,
};

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {
    std::uint64_t a = seed;
    std::uint64_t b = stream ^ 0x6a09e667f3bcc909ULL;
    for (auto& word : s_) {
      word = detail::splitmix64(a) ^ detail::rotl(detail::splitmix64(b), 17);
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the polar method; the spare variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  /// Exponential with rate 1.
  double exponential() { return -std::log(uniform()); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t s_[4];
  std::uint64_t seed_;
  std::uint64_t stream_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace btc

#endif  // BTC_RNG_HPP
