#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "midas/rng.hpp"

namespace midas {

// Normalized exploration density q0 with a diagonal scale matrix. It can
// both evaluate its log-density (constants included) and sample exactly.
class ExplorationDensity {
 public:
  enum class Family { kGaussian, kStudentT };

  // variance_diag holds per-coordinate variances.
  static ExplorationDensity gaussian(std::vector<double> location,
                                     std::vector<double> variance_diag);
  // shape_diag holds the diagonal of the Student-t shape matrix (the
  // variance is shape * dof/(dof-2) when dof > 2).
  static ExplorationDensity student_t(std::vector<double> location,
                                      std::vector<double> shape_diag,
                                      double dof);

  int dim() const { return static_cast<int>(loc_.size()); }
  Family family() const { return family_; }
  double dof() const { return dof_; }

  double log_density(std::span<const double> x) const;
  double density(std::span<const double> x) const;

  // Gaussian: d normals. Student t: d normals then one chi-square draw
  // shared by all coordinates (multivariate t).
  void sample(RngStream& rng, std::span<double> out) const;

 private:
  ExplorationDensity() = default;
  Family family_ = Family::kGaussian;
  std::vector<double> loc_;
  std::vector<double> sd_;  // per-coordinate sqrt of variance/shape diagonal
  double dof_ = 0.0;
  double log_norm_ = 0.0;  // density normalization, precomputed
};

// An unnormalized target density split into a shape and a scale:
//
//   log f_u(x) = log_core(x) + log(scale).
//
// Samplers consume only log_core, so two targets differing by a constant
// factor drive bit-identical trajectories; the scale tag resurfaces only in
// reported raw weights. scaled() bumps the tag without touching the shape.
class TargetDensity {
 public:
  using LogCoreFn = std::function<double(std::span<const double>)>;
  using SamplerFn = std::function<void(RngStream&, std::span<double>)>;

  TargetDensity(int dim, LogCoreFn log_core);

  int dim() const { return dim_; }
  double scale() const { return scale_; }

  // Shape part of the log-density; -inf allowed for out-of-support points.
  double log_core(std::span<const double> x) const;

  // Full unnormalized log-density log_core + log(scale).
  double log_unnorm(std::span<const double> x) const;

  // Same shape, scale tag multiplied by factor > 0.
  TargetDensity scaled(double factor) const;

  TargetDensity& set_reference_sampler(SamplerFn sampler);
  bool has_reference_sampler() const { return static_cast<bool>(sampler_); }

  // One exact draw from the normalized target.
  void reference_sample_into(RngStream& rng, std::span<double> out) const;

  // count exact draws, row-major count x dim. Throws unsupported_error if
  // the target has no reference sampler.
  std::vector<double> reference_sample(std::size_t count, RngStream& rng) const;

 private:
  int dim_;
  double scale_ = 1.0;
  LogCoreFn log_core_;
  SamplerFn sampler_;
};

// The four analytic benchmark targets. Parameters (all exact):
//   kColdStart          N(mu 1_d, sigma^2 I_d), mu = 5/sqrt(d), sigma^2 = 0.16/d,
//                       log core written as -|x - mu|^2/(2 sigma^2) (peak 0).
//   kGaussianMixture    (1/2) N(+c 1_d, sigma^2 I) + (1/2) N(-c 1_d, sigma^2 I),
//                       c = 1/(2 sqrt d); normalized mixture log-density.
//   kAnisotropicMixture same mixture, covariance (0.16/d) Diag(10, 1, ..., 1).
//   kFourModes2D        (1/4) sum of N(m_k, 0.1 I_2) over m_k in
//                       {(0,0), (10,0), (0,10), (10,10)}; d = 2 only.
// Every toy target carries an exact reference sampler.
enum class ToyTarget {
  kColdStart,
  kGaussianMixture,
  kAnisotropicMixture,
  kFourModes2D,
};

ToyTarget toy_target_from_string(std::string_view name);
std::string to_string(ToyTarget which);

TargetDensity make_toy_target(ToyTarget which, int dim);

// The exploration density paired with each toy target:
//   kColdStart          Gaussian(0, (5/d) I)
//   kGaussianMixture    Student t, dof 3, location 0, shape (5/d) I
//   kAnisotropicMixture Student t, dof 3, location 0, shape (5/d) I
//   kFourModes2D        Student t, dof 3, location (5,5), shape 10 I
ExplorationDensity default_exploration(ToyTarget which, int dim);

}  // namespace midas
