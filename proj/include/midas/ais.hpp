#pragma once

#include <functional>
#include <span>
#include <vector>

#include "midas/rng.hpp"
#include "midas/sample_set.hpp"
#include "midas/targets.hpp"

namespace midas {

// Annealed importance sampling along the geometric bridge
// f_k ∝ q0^{1-beta_k} f_u^{beta_k}.
struct AisConfig {
  int levels = 10;              // K
  int batch = 300;              // particles per run
  int n_mh = 20;                // Metropolis updates per level
  double beta_min = 1e-4;       // beta_0 > 0
  double proposal_scale = 0.0;  // random-walk step; <= 0 means 0.5/sqrt(d)
};

// beta_k = beta_min^(1 - k/K) for k = 0..K: beta_0 = beta_min, beta_K = 1,
// constant consecutive ratios.
std::vector<double> geometric_schedule(int levels, double beta_min);

struct AisResult {
  WeightedSampleSet samples;       // weights exp(log_w - max log_w)
  std::vector<double> log_weights; // raw accumulated log-weights
  long long fu_evals;       // actual: batch * K * (n_mh + 1)
  long long headline_evals; // the K * batch * n_mh convention
  std::vector<double> acceptance;  // per level, over batch * n_mh proposals
};

// Per particle: X ~ q0 with log-weight 0; for each level k = 1..K add
// (beta_k - beta_{k-1})(log f_u(X) - log q0(X)) to the log-weight, then run
// n_mh random-walk Metropolis steps targeting f_k. Every weight update and
// every MH proposal evaluates f_u once, giving the actual evaluation count
// batch * K * (n_mh + 1); the headline count K * batch * n_mh is reported
// alongside because comparison axes conventionally use it.
AisResult ais_run(const AisConfig& config, const TargetDensity& target,
                  const ExplorationDensity& q0, RngStream& rng);

// One random-walk Metropolis step: proposes x + scale * normal d-vector and
// accepts with probability min(1, exp(log_density(x') - log_density_x)).
// Always consumes the proposal draw and one uniform. On acceptance x and
// log_density_x are updated in place; the return value says which happened.
bool rw_metropolis_step(
    const std::function<double(std::span<const double>)>& log_density,
    std::span<double> x, double& log_density_x, double scale, RngStream& rng);

// Convenience form evaluating log_density at x first (one extra evaluation);
// returns the accepted or original point.
std::vector<double> rw_metropolis_step(
    const std::function<double(std::span<const double>)>& log_density,
    std::span<const double> x, double scale, RngStream& rng);

}  // namespace midas
