#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "midas/fenwick.hpp"
#include "midas/kernels.hpp"
#include "midas/rng.hpp"
#include "midas/targets.hpp"

namespace midas {

// Store of weighted kernel locations backing the sampling policy.
//
// Particle i inserted at step n_i with weight w_i carries the effective
// weight
//
//   W_i = w_i^eta * gamma_{n_i} / m_{n_i} * prod_{j > n_i} (1 - gamma_j),
//
// where the product runs over the decay factors of every later step and
// m_{n_i} is the size of the batch the particle arrived in. Storing W_i
// directly would cost O(size) per step, so the store keeps
//
//   score_i = W_i / exp(decay_log + rescale_log)
//
// with decay_log accumulating sum log(1 - gamma_j) over all begun steps
// (Kahan-compensated) and rescale_log absorbing occasional global rescales
// that keep scores inside [1e-100, 1e100]. Scores never change after
// insertion except for those rescales, so selection probabilities and
// mixture coefficients are exact ratios of stored scores.
//
// A prefix-sum tree over the scores gives O(log size) weighted selection
// and O(1) amortized insertion.
class ParticleStore {
 public:
  ParticleStore(int dim, KernelFamily family, double eta);

  int dim() const { return dim_; }
  KernelFamily family() const { return family_; }
  double eta() const { return eta_; }
  std::size_t size() const { return bandwidth_.size(); }
  bool empty() const { return bandwidth_.empty(); }

  // Opens step n: applies the (1 - gamma) decay to everything already
  // stored and fixes the gamma and batch size used by subsequent insert()
  // calls. gamma must lie in (0, 1), batch_count must be >= 1.
  void begin_step(double gamma, int batch_count);

  // Adds a particle drawn in the current step. log_w is the log of the raw
  // importance weight f_u(x)/q(x) up to the target's scale tag (the scale
  // cancels from all score ratios, so the store never sees it).
  void insert(std::span<const double> x, double log_w, double bandwidth);

  // Draws a particle index with probability proportional to its effective
  // weight. Throws degenerate_weights_error when the store is empty or all
  // scores are zero.
  std::size_t select(RngStream& rng) const;

  // Normalized kernel-mixture density sum_i W_i K_{b_i}(x - X_i) / sum_i
  // W_i. Requires a non-empty store with positive total score.
  double mixture_density(std::span<const double> x) const;

  std::span<const double> position(std::size_t i) const {
    return {positions_.data() + i * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  double bandwidth(std::size_t i) const { return bandwidth_[i]; }
  double log_weight(std::size_t i) const { return log_w_[i]; }

  // W_i on its natural scale (eta-powered, gamma-weighted, decayed).
  double effective_weight(std::size_t i) const;
  // sum_i W_i on its natural scale.
  double total_mass() const;
  // Exact selection probability score_i / total score.
  double selection_probability(std::size_t i) const;

  // Rescales all scores so the largest becomes 1. Observable behavior
  // (selection law, mixture density, effective weights) is unchanged; the
  // invariance is what the tests pin down.
  void renormalize();

 private:
  double insert_log_score(double log_w) const;
  void rescale_scores(double log_factor);

  int dim_;
  KernelFamily family_;
  double eta_;

  std::vector<double> positions_;  // flat, size * dim
  std::vector<double> bandwidth_;
  std::vector<double> log_w_;
  // Density fast path: contribution of particle i at x is
  //   coef_[i] * exp(-sqdist * quad_scale_[i])                 (Gaussian)
  //   coef_[i] * prod_j max(0, 1 - diff_j^2 * quad_scale_[i])  (Epanechnikov)
  // with coef_[i] = score_i * norm(b_i) and quad_scale 1/(2 b^2) resp.
  // 1/(5 b^2). Terms whose quad argument exceeds skip_threshold_[i] round to
  // exactly zero and are skipped. All three arrays track score rescales.
  std::vector<double> coef_;
  std::vector<double> quad_scale_;
  std::vector<double> skip_threshold_;

  PrefixSumTree scores_;
  double max_score_ = 0.0;

  double decay_log_ = 0.0;
  double decay_carry_ = 0.0;  // Kahan compensation for decay_log_
  double rescale_log_ = 0.0;

  double step_log_gamma_ = 0.0;
  double step_log_batch_ = 0.0;
  bool step_open_ = false;
};

// Proposal interface shared by the full and subsampled policies.
class Proposal {
 public:
  virtual ~Proposal() = default;
  virtual int dim() const = 0;
  virtual void sample(RngStream& rng, std::span<double> out) const = 0;
  virtual double log_density(std::span<const double> x) const = 0;
};

// Full policy q_n = (1 - lambda) * [store mixture] + lambda * q0. With an
// empty store the density falls back to q0 and sampling requires lambda = 1
// (anything else would put mass on a nonexistent mixture).
//
// Draw protocol: one uniform for the component coin, then either a q0 draw
// or one uniform for the particle index followed by a kernel draw.
class MixturePolicy : public Proposal {
 public:
  MixturePolicy(const ParticleStore& store, const ExplorationDensity& q0,
                double lambda);

  int dim() const override { return q0_->dim(); }
  void sample(RngStream& rng, std::span<double> out) const override;
  double log_density(std::span<const double> x) const override;
  double density(std::span<const double> x) const;
  double lambda() const { return lambda_; }

 private:
  const ParticleStore* store_;
  const ExplorationDensity* q0_;
  double lambda_;
};

// Subsampled policy: ell particles drawn once (with replacement, by
// effective weight) at construction, then treated as an equal-weight kernel
// mixture blended with q0. Construction consumes exactly ell uniforms.
//
// Draw protocol matches MixturePolicy: coin, then q0 draw or index uniform
// plus kernel draw.
class SubsampledProposal : public Proposal {
 public:
  SubsampledProposal(const ParticleStore& store, const ExplorationDensity& q0,
                     double lambda, long long ell, RngStream& rng);

  int dim() const override { return q0_->dim(); }
  void sample(RngStream& rng, std::span<double> out) const override;
  double log_density(std::span<const double> x) const override;
  double density(std::span<const double> x) const;
  long long ell() const { return static_cast<long long>(bandwidth_.size()); }

 private:
  const ExplorationDensity* q0_;
  KernelFamily family_;
  double lambda_;
  int dim_;
  std::vector<double> centers_;  // flat, ell * dim
  std::vector<double> bandwidth_;
  std::vector<double> norm_;        // kernel normalization per component
  std::vector<double> quad_scale_;  // 1/(2 b^2) or 1/(5 b^2) per component
};

}  // namespace midas
