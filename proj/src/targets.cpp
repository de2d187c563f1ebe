#include "midas/targets.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "midas/errors.hpp"

namespace midas {

namespace {

constexpr double kLogTwoPi = 1.83787706640934548356065947281;

void check_dim(std::size_t got, int want, const char* who) {
  if (got != static_cast<std::size_t>(want))
    throw std::invalid_argument(std::string(who) + ": expected dimension " +
                                std::to_string(want) + ", got " +
                                std::to_string(got));
}

double log_sum_exp(std::span<const double> terms) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double t : terms) mx = std::fmax(mx, t);
  if (!std::isfinite(mx)) return mx;  // all -inf (or a stray +inf)
  double s = 0.0;
  for (double t : terms) s += std::exp(t - mx);
  return mx + std::log(s);
}

// Log-density of N(center * 1_d scaled by sign, diag var) at x, center given
// per coordinate.
double gaussian_logpdf(std::span<const double> x, std::span<const double> mean,
                       std::span<const double> var) {
  double quad = 0.0, logdet = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const double z = x[c] - mean[c];
    quad += z * z / var[c];
    logdet += std::log(var[c]);
  }
  return -0.5 * (static_cast<double>(x.size()) * kLogTwoPi + logdet + quad);
}

}  // namespace

ExplorationDensity ExplorationDensity::gaussian(
    std::vector<double> location, std::vector<double> variance_diag) {
  if (location.empty() || location.size() != variance_diag.size())
    throw std::invalid_argument(
        "ExplorationDensity: location/variance sizes disagree or are empty");
  ExplorationDensity q;
  q.family_ = Family::kGaussian;
  q.loc_ = std::move(location);
  q.sd_.resize(q.loc_.size());
  double logdet = 0.0;
  for (std::size_t c = 0; c < q.loc_.size(); ++c) {
    if (!(variance_diag[c] > 0.0))
      throw std::invalid_argument("ExplorationDensity: variances must be > 0");
    q.sd_[c] = std::sqrt(variance_diag[c]);
    logdet += std::log(variance_diag[c]);
  }
  q.log_norm_ =
      -0.5 * (static_cast<double>(q.loc_.size()) * kLogTwoPi + logdet);
  return q;
}

ExplorationDensity ExplorationDensity::student_t(std::vector<double> location,
                                                 std::vector<double> shape_diag,
                                                 double dof) {
  if (location.empty() || location.size() != shape_diag.size())
    throw std::invalid_argument(
        "ExplorationDensity: location/shape sizes disagree or are empty");
  if (!(dof > 0.0))
    throw std::invalid_argument("ExplorationDensity: dof must be > 0");
  ExplorationDensity q;
  q.family_ = Family::kStudentT;
  q.loc_ = std::move(location);
  q.dof_ = dof;
  q.sd_.resize(q.loc_.size());
  double logdet = 0.0;
  for (std::size_t c = 0; c < q.loc_.size(); ++c) {
    if (!(shape_diag[c] > 0.0))
      throw std::invalid_argument("ExplorationDensity: shape must be > 0");
    q.sd_[c] = std::sqrt(shape_diag[c]);
    logdet += std::log(shape_diag[c]);
  }
  const double d = static_cast<double>(q.loc_.size());
  q.log_norm_ = std::lgamma(0.5 * (dof + d)) - std::lgamma(0.5 * dof) -
                0.5 * d * std::log(dof * 3.14159265358979323846) -
                0.5 * logdet;
  return q;
}

double ExplorationDensity::log_density(std::span<const double> x) const {
  check_dim(x.size(), dim(), "ExplorationDensity::log_density");
  double quad = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const double z = (x[c] - loc_[c]) / sd_[c];
    quad += z * z;
  }
  if (family_ == Family::kGaussian) return log_norm_ - 0.5 * quad;
  const double d = static_cast<double>(loc_.size());
  return log_norm_ - 0.5 * (dof_ + d) * std::log1p(quad / dof_);
}

double ExplorationDensity::density(std::span<const double> x) const {
  return std::exp(log_density(x));
}

void ExplorationDensity::sample(RngStream& rng, std::span<double> out) const {
  check_dim(out.size(), dim(), "ExplorationDensity::sample");
  for (std::size_t c = 0; c < out.size(); ++c)
    out[c] = loc_[c] + sd_[c] * rng.normal();
  if (family_ == Family::kStudentT) {
    const double w = rng.chi_square(dof_);
    const double r = std::sqrt(dof_ / w);
    for (std::size_t c = 0; c < out.size(); ++c)
      out[c] = loc_[c] + (out[c] - loc_[c]) * r;
  }
}

TargetDensity::TargetDensity(int dim, LogCoreFn log_core)
    : dim_(dim), log_core_(std::move(log_core)) {
  if (dim_ < 1) throw std::invalid_argument("TargetDensity: dim must be >= 1");
  if (!log_core_)
    throw std::invalid_argument("TargetDensity: log_core is required");
}

double TargetDensity::log_core(std::span<const double> x) const {
  check_dim(x.size(), dim_, "TargetDensity::log_core");
  return log_core_(x);
}

double TargetDensity::log_unnorm(std::span<const double> x) const {
  return log_core(x) + std::log(scale_);
}

TargetDensity TargetDensity::scaled(double factor) const {
  if (!(factor > 0.0))
    throw std::invalid_argument("TargetDensity::scaled: factor must be > 0");
  TargetDensity t = *this;
  t.scale_ *= factor;
  return t;
}

TargetDensity& TargetDensity::set_reference_sampler(SamplerFn sampler) {
  sampler_ = std::move(sampler);
  return *this;
}

void TargetDensity::reference_sample_into(RngStream& rng,
                                          std::span<double> out) const {
  if (!sampler_)
    throw unsupported_error("target has no exact reference sampler");
  check_dim(out.size(), dim_, "TargetDensity::reference_sample_into");
  sampler_(rng, out);
}

std::vector<double> TargetDensity::reference_sample(std::size_t count,
                                                    RngStream& rng) const {
  if (!sampler_)
    throw unsupported_error("target has no exact reference sampler");
  std::vector<double> out(count * static_cast<std::size_t>(dim_));
  for (std::size_t i = 0; i < count; ++i)
    sampler_(rng, std::span<double>(out.data() + i * dim_, dim_));
  return out;
}

ToyTarget toy_target_from_string(std::string_view name) {
  if (name == "coldstart") return ToyTarget::kColdStart;
  if (name == "mixture") return ToyTarget::kGaussianMixture;
  if (name == "anisotropic") return ToyTarget::kAnisotropicMixture;
  if (name == "fourmodes") return ToyTarget::kFourModes2D;
  throw std::invalid_argument("unknown toy target: " + std::string(name));
}

std::string to_string(ToyTarget which) {
  switch (which) {
    case ToyTarget::kColdStart: return "coldstart";
    case ToyTarget::kGaussianMixture: return "mixture";
    case ToyTarget::kAnisotropicMixture: return "anisotropic";
    case ToyTarget::kFourModes2D: return "fourmodes";
  }
  throw std::logic_error("unreachable toy target");
}

namespace {

TargetDensity make_cold_start(int d) {
  const double mu = 5.0 / std::sqrt(static_cast<double>(d));
  const double var = 0.16 / static_cast<double>(d);
  TargetDensity t(d, [mu, var](std::span<const double> x) {
    double ss = 0.0;
    for (double v : x) {
      const double z = v - mu;
      ss += z * z;
    }
    return -ss / (2.0 * var);
  });
  const double sd = std::sqrt(var);
  t.set_reference_sampler([mu, sd](RngStream& rng, std::span<double> out) {
    for (double& v : out) v = mu + sd * rng.normal();
  });
  return t;
}

TargetDensity make_two_mode_mixture(int d, bool anisotropic) {
  const double c = 0.5 / std::sqrt(static_cast<double>(d));
  std::vector<double> var(d, 0.16 / static_cast<double>(d));
  if (anisotropic) var[0] *= 10.0;
  std::vector<double> mean_pos(d, c), mean_neg(d, -c);
  TargetDensity t(d, [var, mean_pos, mean_neg](std::span<const double> x) {
    const double terms[2] = {gaussian_logpdf(x, mean_pos, var),
                             gaussian_logpdf(x, mean_neg, var)};
    return std::log(0.5) + log_sum_exp(terms);
  });
  std::vector<double> sd(var.size());
  for (std::size_t k = 0; k < var.size(); ++k) sd[k] = std::sqrt(var[k]);
  t.set_reference_sampler([c, sd](RngStream& rng, std::span<double> out) {
    const double sign = rng.uniform01() < 0.5 ? 1.0 : -1.0;
    for (std::size_t k = 0; k < out.size(); ++k)
      out[k] = sign * c + sd[k] * rng.normal();
  });
  return t;
}

TargetDensity make_four_modes() {
  static constexpr double kModes[4][2] = {
      {0.0, 0.0}, {10.0, 0.0}, {0.0, 10.0}, {10.0, 10.0}};
  const std::vector<double> var(2, 0.1);
  TargetDensity t(2, [var](std::span<const double> x) {
    double terms[4];
    for (int k = 0; k < 4; ++k) {
      const double mean[2] = {kModes[k][0], kModes[k][1]};
      terms[k] = gaussian_logpdf(x, mean, var);
    }
    return std::log(0.25) + log_sum_exp(terms);
  });
  const double sd = std::sqrt(0.1);
  t.set_reference_sampler([sd](RngStream& rng, std::span<double> out) {
    const std::size_t k = rng.uniform_below(4);
    out[0] = kModes[k][0] + sd * rng.normal();
    out[1] = kModes[k][1] + sd * rng.normal();
  });
  return t;
}

}  // namespace

TargetDensity make_toy_target(ToyTarget which, int d) {
  if (d < 1) throw std::invalid_argument("make_toy_target: dim must be >= 1");
  switch (which) {
    case ToyTarget::kColdStart: return make_cold_start(d);
    case ToyTarget::kGaussianMixture: return make_two_mode_mixture(d, false);
    case ToyTarget::kAnisotropicMixture: return make_two_mode_mixture(d, true);
    case ToyTarget::kFourModes2D:
      if (d != 2)
        throw std::invalid_argument("fourmodes target is two-dimensional");
      return make_four_modes();
  }
  throw std::logic_error("unreachable toy target");
}

ExplorationDensity default_exploration(ToyTarget which, int d) {
  switch (which) {
    case ToyTarget::kColdStart:
      return ExplorationDensity::gaussian(
          std::vector<double>(d, 0.0),
          std::vector<double>(d, 5.0 / static_cast<double>(d)));
    case ToyTarget::kGaussianMixture:
    case ToyTarget::kAnisotropicMixture:
      return ExplorationDensity::student_t(
          std::vector<double>(d, 0.0),
          std::vector<double>(d, 5.0 / static_cast<double>(d)), 3.0);
    case ToyTarget::kFourModes2D:
      if (d != 2)
        throw std::invalid_argument("fourmodes target is two-dimensional");
      return ExplorationDensity::student_t({5.0, 5.0}, {10.0, 10.0}, 3.0);
  }
  throw std::logic_error("unreachable toy target");
}

}  // namespace midas
