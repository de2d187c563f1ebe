#include "midas/policy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "midas/errors.hpp"

namespace midas {

namespace {

// Scores are kept inside [1e-100, 1e100]; crossing either bound triggers a
// global rescale.
constexpr double kLogScoreCeiling = 230.25850929940457;  // log(1e100)
constexpr double kScoreCeiling = 1e100;
constexpr double kScoreFloor = 1e-100;

// A kernel term with log(coef) - quad_arg below -760 rounds to exactly 0 in
// double arithmetic (the cutoff for a nonzero product is about -745.2), so
// skipping it leaves the accumulated density bit-identical.
constexpr double kSkipMargin = 760.0;

}  // namespace

ParticleStore::ParticleStore(int dim, KernelFamily family, double eta)
    : dim_(dim), family_(family), eta_(eta) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("eta must lie in [0, 1]");
}

void ParticleStore::begin_step(double gamma, int batch_count) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("gamma must lie in (0, 1)");
  if (batch_count < 1)
    throw std::invalid_argument("batch_count must be >= 1");
  // Kahan-compensated accumulation: thousands of log1p terms enter this sum
  // and the score of every later insert depends on it.
  const double y = std::log1p(-gamma) - decay_carry_;
  const double t = decay_log_ + y;
  decay_carry_ = (t - decay_log_) - y;
  decay_log_ = t;
  step_log_gamma_ = std::log(gamma);
  step_log_batch_ = std::log(static_cast<double>(batch_count));
  step_open_ = true;
}

double ParticleStore::insert_log_score(double log_w) const {
  const double powered = eta_ == 0.0 ? 0.0 : eta_ * log_w;
  return powered + step_log_gamma_ - step_log_batch_ - decay_log_ -
         rescale_log_;
}

void ParticleStore::insert(std::span<const double> x, double log_w,
                           double bandwidth) {
  if (!step_open_)
    throw std::logic_error("insert called before begin_step");
  if (static_cast<int>(x.size()) != dim_)
    throw std::invalid_argument("particle dimension mismatch");
  if (!(bandwidth > 0.0))
    throw std::invalid_argument("bandwidth must be positive");
  if (std::isnan(log_w))
    throw std::invalid_argument("log weight is NaN");

  double log_s = insert_log_score(log_w);
  if (log_s > kLogScoreCeiling) {
    rescale_scores(log_s);
    log_s = 0.0;
  }
  const double s = std::exp(log_s);

  positions_.insert(positions_.end(), x.begin(), x.end());
  bandwidth_.push_back(bandwidth);
  log_w_.push_back(log_w);

  const double log_norm = kernel_log_norm(family_, dim_, bandwidth);
  coef_.push_back(s * std::exp(log_norm));
  const double quad_scale = family_ == KernelFamily::kGaussian
                                ? 1.0 / (2.0 * bandwidth * bandwidth)
                                : 1.0 / (5.0 * bandwidth * bandwidth);
  quad_scale_.push_back(quad_scale);
  skip_threshold_.push_back(
      s > 0.0 ? log_s + log_norm + kSkipMargin
              : -std::numeric_limits<double>::infinity());

  scores_.append(s);
  if (s > max_score_) max_score_ = s;
  if (max_score_ > kScoreCeiling ||
      (max_score_ > 0.0 && max_score_ < kScoreFloor)) {
    rescale_scores(std::log(max_score_));
  }
}

void ParticleStore::rescale_scores(double log_factor) {
  const double c = std::exp(-log_factor);
  scores_.scale_all(c);
  for (double& v : coef_) v *= c;
  for (double& t : skip_threshold_) t -= log_factor;
  max_score_ *= c;
  rescale_log_ += log_factor;
}

std::size_t ParticleStore::select(RngStream& rng) const {
  const double total = scores_.total();
  if (empty() || !(total > 0.0))
    throw degenerate_weights_error(
        "particle selection impossible: no particle carries positive weight");
  return scores_.find_cumulative(rng.uniform01());
}

double ParticleStore::mixture_density(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_)
    throw std::invalid_argument("evaluation point dimension mismatch");
  const double total = scores_.total();
  if (empty() || !(total > 0.0))
    throw degenerate_weights_error(
        "mixture density undefined: no particle carries positive weight");

  const std::size_t n = size();
  const std::size_t d = static_cast<std::size_t>(dim_);
  const double* px = x.data();
  double acc = 0.0;
  if (family_ == KernelFamily::kGaussian) {
    for (std::size_t i = 0; i < n; ++i) {
      const double* c = positions_.data() + i * d;
      double sq = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = px[j] - c[j];
        sq += diff * diff;
      }
      const double arg = sq * quad_scale_[i];
      if (arg > skip_threshold_[i]) continue;
      acc += coef_[i] * std::exp(-arg);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double* c = positions_.data() + i * d;
      double term = coef_[i];
      for (std::size_t j = 0; j < d && term > 0.0; ++j) {
        const double diff = px[j] - c[j];
        const double t = 1.0 - diff * diff * quad_scale_[i];
        term = t > 0.0 ? term * t : 0.0;
      }
      acc += term;
    }
  }
  return acc / total;
}

double ParticleStore::effective_weight(std::size_t i) const {
  return scores_.value(i) * std::exp(decay_log_ + rescale_log_);
}

double ParticleStore::total_mass() const {
  return scores_.total() * std::exp(decay_log_ + rescale_log_);
}

double ParticleStore::selection_probability(std::size_t i) const {
  const double total = scores_.total();
  if (!(total > 0.0))
    throw degenerate_weights_error(
        "selection probabilities undefined: total score is zero");
  return scores_.value(i) / total;
}

void ParticleStore::renormalize() {
  if (empty() || !(max_score_ > 0.0)) return;
  rescale_scores(std::log(max_score_));
}

MixturePolicy::MixturePolicy(const ParticleStore& store,
                             const ExplorationDensity& q0, double lambda)
    : store_(&store), q0_(&q0), lambda_(lambda) {
  if (store.dim() != q0.dim())
    throw std::invalid_argument("store and exploration dimensions differ");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("lambda must lie in [0, 1]");
}

void MixturePolicy::sample(RngStream& rng, std::span<double> out) const {
  if (static_cast<int>(out.size()) != dim())
    throw std::invalid_argument("output dimension mismatch");
  const double coin = rng.uniform01();
  if (coin < lambda_) {
    q0_->sample(rng, out);
    return;
  }
  if (store_->empty())
    throw degenerate_weights_error(
        "cannot sample the particle mixture of an empty store (lambda < 1)");
  const std::size_t i = store_->select(rng);
  kernel_sample(store_->family(), rng, out);
  const auto c = store_->position(i);
  const double b = store_->bandwidth(i);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = c[j] + b * out[j];
}

double MixturePolicy::density(std::span<const double> x) const {
  if (store_->empty()) return q0_->density(x);
  double val = lambda_ > 0.0 ? lambda_ * q0_->density(x) : 0.0;
  if (lambda_ < 1.0) val += (1.0 - lambda_) * store_->mixture_density(x);
  return val;
}

double MixturePolicy::log_density(std::span<const double> x) const {
  return std::log(density(x));
}

SubsampledProposal::SubsampledProposal(const ParticleStore& store,
                                       const ExplorationDensity& q0,
                                       double lambda, long long ell,
                                       RngStream& rng)
    : q0_(&q0), family_(store.family()), lambda_(lambda), dim_(store.dim()) {
  if (store.dim() != q0.dim())
    throw std::invalid_argument("store and exploration dimensions differ");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("lambda must lie in [0, 1]");
  if (ell < 1) throw std::invalid_argument("ell must be >= 1");
  if (store.empty())
    throw degenerate_weights_error(
        "cannot subsample an empty particle store");
  const std::size_t d = static_cast<std::size_t>(dim_);
  centers_.reserve(static_cast<std::size_t>(ell) * d);
  bandwidth_.reserve(static_cast<std::size_t>(ell));
  for (long long k = 0; k < ell; ++k) {
    const std::size_t i = store.select(rng);
    const auto c = store.position(i);
    centers_.insert(centers_.end(), c.begin(), c.end());
    bandwidth_.push_back(store.bandwidth(i));
  }
  norm_.reserve(bandwidth_.size());
  quad_scale_.reserve(bandwidth_.size());
  for (const double b : bandwidth_) {
    norm_.push_back(std::exp(kernel_log_norm(family_, dim_, b)));
    quad_scale_.push_back(family_ == KernelFamily::kGaussian
                              ? 1.0 / (2.0 * b * b)
                              : 1.0 / (5.0 * b * b));
  }
}

void SubsampledProposal::sample(RngStream& rng, std::span<double> out) const {
  if (static_cast<int>(out.size()) != dim_)
    throw std::invalid_argument("output dimension mismatch");
  const double coin = rng.uniform01();
  if (coin < lambda_) {
    q0_->sample(rng, out);
    return;
  }
  const std::size_t k =
      static_cast<std::size_t>(rng.uniform_below(bandwidth_.size()));
  kernel_sample(family_, rng, out);
  const double* c = centers_.data() + k * static_cast<std::size_t>(dim_);
  const double b = bandwidth_[k];
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = c[j] + b * out[j];
}

double SubsampledProposal::density(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_)
    throw std::invalid_argument("evaluation point dimension mismatch");
  const std::size_t ell = bandwidth_.size();
  const std::size_t d = static_cast<std::size_t>(dim_);
  const double* px = x.data();
  double acc = 0.0;
  if (family_ == KernelFamily::kGaussian) {
    for (std::size_t k = 0; k < ell; ++k) {
      const double* c = centers_.data() + k * d;
      double sq = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = px[j] - c[j];
        sq += diff * diff;
      }
      acc += norm_[k] * std::exp(-sq * quad_scale_[k]);
    }
  } else {
    for (std::size_t k = 0; k < ell; ++k) {
      const double* c = centers_.data() + k * d;
      double term = norm_[k];
      for (std::size_t j = 0; j < d && term > 0.0; ++j) {
        const double diff = px[j] - c[j];
        const double t = 1.0 - diff * diff * quad_scale_[k];
        term = t > 0.0 ? term * t : 0.0;
      }
      acc += term;
    }
  }
  double val = acc / static_cast<double>(ell) * (1.0 - lambda_);
  if (lambda_ > 0.0) val += lambda_ * q0_->density(x);
  return val;
}

double SubsampledProposal::log_density(std::span<const double> x) const {
  return std::log(density(x));
}

}  // namespace midas
