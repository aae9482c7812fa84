#pragma once

#include <cstdint>

namespace dla1d {

/// xoshiro256++ (Blackman and Vigna). Small state, ~1 ns per draw; seeded
/// through SplitMix64 so that any 64-bit seed gives a valid state.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed = 0) {
    for (auto& w : s_) {
      seed += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = seed;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      w = z ^ (z >> 31);
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  bool operator==(const Xoshiro256pp&) const = default;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

using Rng = Xoshiro256pp;

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the `stream`-th independent stream derived from a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) { return Rng(derive_seed(seed, stream)); }

/// Uniform on [0, 1) with 53 random bits.
template <class Gen>
inline double uniform01(Gen& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Uniform on (0, 1].
template <class Gen>
inline double uniform01_open_low(Gen& g) {
  return static_cast<double>((g() >> 11) + 1) * 0x1.0p-53;
}

/// Uniform integer in [0, n) (n > 0), Lemire's multiply-shift with rejection.
template <class Gen>
inline std::uint64_t uniform_below(Gen& g, std::uint64_t n) {
  unsigned __int128 m = static_cast<unsigned __int128>(g()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(g()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

template <class Gen>
inline bool fair_coin(Gen& g) {
  return (g() >> 63) != 0;
}

}  // namespace dla1d
