#pragma once

#include <cstdint>
#include <initializer_list>

namespace qlsq {

/// One SplitMix64 step; also used to hash seed words together.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic xoshiro256++ generator.
///
/// Results are reproducible across platforms and standard libraries, which
/// the dataset format relies on; std:: distributions are implementation
/// defined and are therefore not used. Independent streams are derived by
/// hashing (master seed, stream indices...) so that parallel generation is
/// order independent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  /// Substream generator for (master seed, index...) tuples.
  static Rng derive(std::uint64_t master, std::initializer_list<std::uint64_t> stream) {
    std::uint64_t h = master;
    splitmix64(h);
    for (std::uint64_t word : stream) {
      h ^= word + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      splitmix64(h);
    }
    return Rng(h);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Poisson sample; exact inversion for small means, PTRD transformed
  /// rejection (Hormann) for large ones.
  std::uint64_t poisson(double mean);

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4];
};

}  // namespace qlsq
