#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>

// Deterministic, splittable random number streams.
//
// A Stream is a xoshiro256++ generator seeded through splitmix64.  Streams
// are cheap to construct, so independent substreams can be derived per
// observation, per replicate, or per chain.  The splitting rule is fixed:
//
//   * Stream::spawn() seeds a child from the parent's next 64-bit output.
//   * derive_seed(seed, {tags...}) maps a master seed plus integer tags
//     (chain index, iteration, row index, ...) to a substream seed.
//
// Everything here is fully deterministic given the seed, independent of
// platform, standard library, and thread count.

namespace smnreg::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += kGolden);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Substream seed from a master seed and a path of integer tags.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = seed;
  for (std::uint64_t tag : path) {
    std::uint64_t t = h ^ (tag * kGolden + 0x165667B19E3779F9ULL);
    h = splitmix64(t);
  }
  return h;
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next_u64() {
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

  // Uniform on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the sine branch is discarded so each
  // call consumes exactly two uniforms.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Gamma(shape, rate) with mean shape/rate, Marsaglia-Tsang squeeze.
  double gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
      throw std::invalid_argument("rng::Stream::gamma: shape and rate must be positive");
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0, rate);
      const double u = uniform();
      return g * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  double chi_squared(double dof) { return gamma(0.5 * dof, 0.5); }

  // Child stream seeded from this stream's next output.
  Stream spawn() { return Stream(next_u64()); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

}  // namespace smnreg::rng
