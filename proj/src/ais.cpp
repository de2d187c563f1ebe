#include "midas/ais.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "midas/errors.hpp"

namespace midas {

std::vector<double> geometric_schedule(int levels, double beta_min) {
  if (levels < 1) throw std::invalid_argument("levels must be >= 1");
  if (!(beta_min > 0.0 && beta_min < 1.0))
    throw std::invalid_argument("beta_min must lie in (0, 1)");
  std::vector<double> betas(static_cast<std::size_t>(levels) + 1);
  for (int k = 0; k <= levels; ++k)
    betas[static_cast<std::size_t>(k)] = std::pow(
        beta_min,
        1.0 - static_cast<double>(k) / static_cast<double>(levels));
  return betas;
}

bool rw_metropolis_step(
    const std::function<double(std::span<const double>)>& log_density,
    std::span<double> x, double& log_density_x, double scale, RngStream& rng) {
  if (!(scale > 0.0))
    throw std::invalid_argument("proposal scale must be positive");
  std::vector<double> proposal(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    proposal[j] = x[j] + scale * rng.normal();
  const double log_density_y = log_density(proposal);
  const double u = rng.uniform01();
  // exp(-inf) = 0 rejects even at u = 0; an accepted escape from a -inf
  // state gives exp(+inf) and always passes.
  if (u < std::exp(log_density_y - log_density_x)) {
    std::copy(proposal.begin(), proposal.end(), x.begin());
    log_density_x = log_density_y;
    return true;
  }
  return false;
}

std::vector<double> rw_metropolis_step(
    const std::function<double(std::span<const double>)>& log_density,
    std::span<const double> x, double scale, RngStream& rng) {
  std::vector<double> point(x.begin(), x.end());
  double current = log_density(point);
  rw_metropolis_step(log_density, point, current, scale, rng);
  return point;
}

AisResult ais_run(const AisConfig& config, const TargetDensity& target,
                  const ExplorationDensity& q0, RngStream& rng) {
  if (target.dim() != q0.dim())
    throw std::invalid_argument("target and exploration dimensions differ");
  if (config.batch < 1) throw std::invalid_argument("batch must be >= 1");
  if (config.n_mh < 0) throw std::invalid_argument("n_mh must be >= 0");
  const int d = target.dim();
  const int K = config.levels;
  const std::vector<double> betas = geometric_schedule(K, config.beta_min);
  const double scale = config.proposal_scale > 0.0
                           ? config.proposal_scale
                           : 0.5 / std::sqrt(static_cast<double>(d));

  AisResult result;
  result.samples.dim = d;
  result.samples.points.resize(static_cast<std::size_t>(config.batch) *
                               static_cast<std::size_t>(d));
  result.samples.weights.resize(static_cast<std::size_t>(config.batch));
  result.log_weights.resize(static_cast<std::size_t>(config.batch));
  result.acceptance.assign(static_cast<std::size_t>(K), 0.0);

  long long evals = 0;
  std::vector<long long> accepted(static_cast<std::size_t>(K), 0);

  for (int i = 0; i < config.batch; ++i) {
    const std::span<double> x(
        result.samples.points.data() +
            static_cast<std::size_t>(i) * static_cast<std::size_t>(d),
        static_cast<std::size_t>(d));
    q0.sample(rng, x);
    double logw = 0.0;

    for (int k = 1; k <= K; ++k) {
      const double beta = betas[static_cast<std::size_t>(k)];
      const double delta = beta - betas[static_cast<std::size_t>(k - 1)];
      // Weight update: one fresh f_u evaluation by the accounting contract,
      // even though X is unchanged since the previous level.
      const double lfu = target.log_unnorm(x);
      ++evals;
      const double lq0 = q0.log_density(x);
      logw += delta * (lfu - lq0);

      double log_fk = (1.0 - beta) * lq0 + beta * lfu;
      const auto tempered = [&](std::span<const double> y) {
        ++evals;
        return (1.0 - beta) * q0.log_density(y) + beta * target.log_unnorm(y);
      };
      for (int t = 0; t < config.n_mh; ++t) {
        if (rw_metropolis_step(tempered, x, log_fk, scale, rng))
          ++accepted[static_cast<std::size_t>(k - 1)];
      }
    }
    result.log_weights[static_cast<std::size_t>(i)] = logw;
  }

  const double max_lw =
      *std::max_element(result.log_weights.begin(), result.log_weights.end());
  for (std::size_t i = 0; i < result.log_weights.size(); ++i)
    result.samples.weights[i] = std::exp(result.log_weights[i] - max_lw);

  result.fu_evals = evals;
  result.headline_evals =
      static_cast<long long>(K) * config.batch * config.n_mh;
  if (config.n_mh > 0) {
    const double denom =
        static_cast<double>(config.batch) * static_cast<double>(config.n_mh);
    for (int k = 0; k < K; ++k)
      result.acceptance[static_cast<std::size_t>(k)] =
          static_cast<double>(accepted[static_cast<std::size_t>(k)]) / denom;
  }
  return result;
}

}  // namespace midas
