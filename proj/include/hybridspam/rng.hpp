#pragma once

// Deterministic splittable RNG. The core step is splitmix64; independent
// per-message substreams are derived by hashing (seed, stream id), so the
// number of draws one message consumes never shifts another message's
// values. Algorithm id "splitmix64-mt-v1": Box-Muller normals,
// Marsaglia-Tsang gamma, beta as X/(X+Y) of two gammas.

#include <array>
#include <cmath>
#include <cstdint>

namespace hybridspam {

inline constexpr char kRngAlgorithmId[] = "splitmix64-mt-v1";

// splitmix64 finalizer, also used as the substream keying hash.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

class Rng {
 public:
  explicit Rng(std::uint64_t state) : state_(state) {}

  // Substream for (seed, id): decorrelated even for adjacent ids and for
  // seeds that differ in one bit.
  static Rng substream(std::uint64_t seed, std::uint64_t id) {
    return Rng(mix64(seed ^ mix64(id + 0x9e3779b97f4a7c15ull)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1), safe as a log() argument.
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Box-Muller, cosine branch only. Two uniforms per variate keeps the
  // draw pattern branch-free.
  double normal() {
    double u1 = uniform_open();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Marsaglia-Tsang for alpha >= 1; the alpha < 1 case lifts to alpha + 1
  // and scales by u^(1/alpha).
  double gamma(double alpha) {
    if (alpha < 1.0) {
      double g = gamma(alpha + 1.0);
      return g * std::pow(uniform_open(), 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      double v = t * t * t;
      double u = uniform_open();
      double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    double s = x + y;
    if (s <= 0.0) return 0.5;
    double r = x / s;
    if (r < 0.0) return 0.0;
    if (r > 1.0) return 1.0;
    return r;
  }

  std::array<std::uint8_t, 16> bytes16() {
    std::array<std::uint8_t, 16> out{};
    for (int half = 0; half < 2; ++half) {
      std::uint64_t w = next_u64();
      for (int i = 0; i < 8; ++i)
        out[static_cast<std::size_t>(half * 8 + i)] =
            static_cast<std::uint8_t>(w >> (8 * i));
    }
    return out;
  }

 private:
  std::uint64_t state_;
};

}  // namespace hybridspam
