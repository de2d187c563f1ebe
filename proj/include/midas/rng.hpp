#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace midas {

// Deterministic random stream with a frozen draw protocol.
//
// Engine: std::mt19937_64 seeded from (seed, stream) through std::seed_seq
// over the 32-bit halves of both words. Streams with distinct ids behave as
// independent substreams of the same base seed; every consumer in this
// project documents which ids it claims so no two runs share a stream.
//
// Draw protocol (tests and the reproducibility guarantees depend on it):
//   uniform01()     1 engine output, (x >> 11) * 2^-53, in [0, 1).
//   normal()        exactly 2 uniforms (Box-Muller, sine branch discarded,
//                   nothing cached).
//   gamma(a)        rejection sampling; consumption varies per draw but is a
//                   pure function of the stream state. For a < 1 one extra
//                   uniform is drawn after the boosted a+1 draw.
//   chi_square(nu)  one gamma(nu/2) draw scaled by 2.
//   student_t(nu)   1 normal followed by 1 chi_square.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffULL),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream & 0xffffffffULL),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  // Uniform on [0, 1); 53-bit resolution, never returns 1.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in {0, ..., n-1} from a single uniform01 draw.
  std::size_t uniform_below(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be >= 1");
    auto k = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

  // Standard normal. log1p(-u) keeps the argument strictly positive even
  // when uniform01 returns exactly 0, so the two-uniform budget is exact.
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  void fill_normal(std::span<double> out) {
    for (double& v : out) v = normal();
  }

  // Gamma(shape, 1) by Marsaglia-Tsang. Always returns a strictly positive
  // value.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      const double u = 1.0 - uniform01();  // in (0, 1]
      return g * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform01();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi_square(double nu) { return 2.0 * gamma(0.5 * nu); }

  // Student t with nu degrees of freedom (unit scale).
  double student_t(double nu) {
    const double z = normal();
    const double w = chi_square(nu);
    return z / std::sqrt(w / nu);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace midas
