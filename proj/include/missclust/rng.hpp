#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace missclust {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Order-sensitive seed mixing: hash_combine(a, b) != hash_combine(b, a) in general.
inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return detail::splitmix64(seed ^ (value + 0x9E3779B97F4A7C15ULL + (seed << 6) + (seed >> 2)));
}

// FNV-1a over the raw bytes. Used to fold experiment parameter strings into seeds.
inline std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Deterministic random source backed by mt19937_64. Identical seed gives an
// identical stream on every platform (the engine and all derivations below are
// fully specified, no libstdc++ distributions are used).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0,1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal, Box-Muller. The pair partner is cached, so a single draw
  // consumes either zero or two uniforms.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // in (0,1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  // Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t uniform_below(std::uint64_t bound) {
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % bound;
  }

  // Derives an independent child stream. Pure function of (seed, stream):
  // never consumes or inspects the parent's engine state, so split streams are
  // identical no matter how much the parent has been used.
  Rng split(std::uint64_t stream) const {
    return Rng(detail::splitmix64(seed_ + 0x9E3779B97F4A7C15ULL * (stream + 1)));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace missclust
