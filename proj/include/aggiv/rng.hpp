#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace aggiv::rng {

/// SplitMix64 finalizer: a cheap, well-mixed 64-bit hash used to derive
/// independent stream seeds from a master seed and an integer key.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Derives a child seed from a master seed and a stream id. Streams keyed by
/// distinct ids are statistically independent, so draws can be generated
/// per-column or per-replicate in any order (including in parallel) without
/// changing the values. Chain calls for nested keys, e.g.
/// derive_stream(derive_stream(master, config), replicate).
inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t id) {
  return mix64(master ^ mix64(id));
}

/// Deterministic standard-normal stream. Uniforms take the top 53 bits of a
/// mt19937_64 step; normals use the Marsaglia polar transform. Both are
/// implemented here rather than through std::*_distribution so that the
/// sequence is identical across standard libraries.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform draw on (0, 1) up to the 2^-53 grid (0 is possible, 1 is not).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal draw.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace aggiv::rng
