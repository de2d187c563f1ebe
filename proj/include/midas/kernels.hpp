#pragma once

#include <span>
#include <string>
#include <string_view>

#include "midas/rng.hpp"

namespace midas {

// Smoothing kernels used for the particle mixture. Both are product kernels
// with unit-variance one-dimensional marginals, so a single bandwidth b
// scales every coordinate the same way.
enum class KernelFamily {
  kGaussian,      // (2 pi)^{-d/2} exp(-|u|^2 / 2)
  kEpanechnikov,  // product of (3 / (4 sqrt 5)) (1 - u^2/5) on [-sqrt 5, sqrt 5]
};

KernelFamily kernel_family_from_string(std::string_view name);
std::string to_string(KernelFamily family);

// Unit-scale kernel density K(u). Dimension is u.size(); returns 0 outside
// the support for compactly supported families.
double kernel_density(KernelFamily family, std::span<const double> u);

// Density of the kernel with bandwidth b centred at c, evaluated as
// b^{-d} K((x - c) / b) in exactly that form. Throws std::invalid_argument
// if b <= 0 or the dimensions disagree.
double scaled_kernel_density(KernelFamily family, std::span<const double> x,
                             std::span<const double> c, double b);

// Log of the leading constant of K_b in dimension dim: the density at x is
// exp(kernel_log_norm) times exp(-quad/2) for the Gaussian, or times the
// product polynomial for the Epanechnikov family.
double kernel_log_norm(KernelFamily family, int dim, double b);

// Draws u ~ K into out. Gaussian consumes one normal per coordinate;
// Epanechnikov consumes three uniforms per coordinate (median of three,
// scaled to unit variance).
void kernel_sample(KernelFamily family, RngStream& rng, std::span<double> out);

}  // namespace midas
