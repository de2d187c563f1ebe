#include "midas/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace midas {

namespace {

constexpr double kTwoPi = 6.28318530717958647692528676656;
constexpr double kSqrt5 = 2.23606797749978969640917366873;
// Normalizing constant of the unit-variance 1d Epanechnikov density.
constexpr double kEpan1d = 0.33541019662496846;  // 3 / (4 sqrt 5)

}  // namespace

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "gaussian") return KernelFamily::kGaussian;
  if (name == "epanechnikov") return KernelFamily::kEpanechnikov;
  throw std::invalid_argument("unknown kernel family: " + std::string(name));
}

std::string to_string(KernelFamily family) {
  return family == KernelFamily::kGaussian ? "gaussian" : "epanechnikov";
}

double kernel_density(KernelFamily family, std::span<const double> u) {
  const std::size_t d = u.size();
  if (d == 0) throw std::invalid_argument("kernel_density: empty point");
  if (family == KernelFamily::kGaussian) {
    double ss = 0.0;
    for (double v : u) ss += v * v;
    return std::pow(kTwoPi, -0.5 * static_cast<double>(d)) *
           std::exp(-0.5 * ss);
  }
  double prod = 1.0;
  for (double v : u) {
    if (v <= -kSqrt5 || v >= kSqrt5) return 0.0;
    prod *= kEpan1d * (1.0 - v * v / 5.0);
  }
  return prod;
}

double scaled_kernel_density(KernelFamily family, std::span<const double> x,
                             std::span<const double> c, double b) {
  if (x.size() != c.size())
    throw std::invalid_argument(
        "scaled_kernel_density: point and centre dimensions disagree");
  if (!(b > 0.0))
    throw std::invalid_argument("scaled_kernel_density: bandwidth must be > 0");
  const std::size_t d = x.size();
  std::vector<double> u(d);
  for (std::size_t i = 0; i < d; ++i) u[i] = (x[i] - c[i]) / b;
  return std::pow(b, -static_cast<double>(d)) * kernel_density(family, u);
}

double kernel_log_norm(KernelFamily family, int dim, double b) {
  if (dim < 1) throw std::invalid_argument("kernel_log_norm: dim must be >= 1");
  if (!(b > 0.0))
    throw std::invalid_argument("kernel_log_norm: bandwidth must be > 0");
  const double d = static_cast<double>(dim);
  if (family == KernelFamily::kGaussian)
    return d * (-0.5 * std::log(kTwoPi) - std::log(b));
  return d * (std::log(kEpan1d) - std::log(b));
}

void kernel_sample(KernelFamily family, RngStream& rng, std::span<double> out) {
  if (out.empty()) throw std::invalid_argument("kernel_sample: empty output");
  if (family == KernelFamily::kGaussian) {
    rng.fill_normal(out);
    return;
  }
  for (double& v : out) {
    // Median of three uniforms on (-1, 1) has the Epanechnikov law on
    // (-1, 1); sqrt 5 rescales it to unit variance.
    const double a = 2.0 * rng.uniform01() - 1.0;
    const double b = 2.0 * rng.uniform01() - 1.0;
    const double c = 2.0 * rng.uniform01() - 1.0;
    const double lo = std::fmin(a, b);
    const double hi = std::fmax(a, b);
    v = kSqrt5 * std::fmax(lo, std::fmin(hi, c));
  }
}

}  // namespace midas
