#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace oranver {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seedable stream with named, independent substreams. Draws are produced by
// mt19937_64 and transformed here (not by <random> distributions) so the
// sequence is identical across standard library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  // Substream keyed by `name`; depends only on (seed, name).
  Rng substream(std::string_view name) const { return Rng(splitmix64(seed_ ^ fnv1a64(name))); }
  Rng substream(std::string_view name, std::uint64_t index) const {
    return Rng(splitmix64(splitmix64(seed_ ^ fnv1a64(name)) + index));
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Inverse-transform exponential draw with the given mean.
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(uniform() * static_cast<double>(span));
  }

  std::uint64_t seed() const { return seed_; }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

} // namespace oranver
