#include "midas/samplers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "midas/errors.hpp"

namespace midas {

Algorithm algorithm_from_string(std::string_view name) {
  if (name == "midas") return Algorithm::kMidas;
  if (name == "submidas") return Algorithm::kSubMidas;
  throw std::invalid_argument("unknown algorithm: " + std::string(name));
}

std::string to_string(Algorithm algo) {
  return algo == Algorithm::kMidas ? "midas" : "submidas";
}

SamplerRun run_sampler(const TargetDensity& target,
                       const ExplorationDensity& q0, const RunConfig& config,
                       RngStream& rng, long long checkpoint_every,
                       const Checkpoint& on_checkpoint,
                       const StepObserver& on_step) {
  const int d = target.dim();
  if (d != q0.dim())
    throw std::invalid_argument("target and exploration dimensions differ");
  if (config.budget < 1)
    throw std::invalid_argument("budget must be >= 1");
  if (config.batch < 1)
    throw std::invalid_argument("batch must be >= 1");
  if (config.schedule.burnin_batch < 1)
    throw std::invalid_argument("burn-in batch must be >= 1");
  if (checkpoint_every < 0)
    throw std::invalid_argument("checkpoint cadence must be >= 0");

  SamplerRun run{ParticleStore(d, config.kernel, config.eta), 0, 0, 1.0};
  ParticleStore& store = run.store;
  const Schedule schedule(config.schedule);

  // lambda_0 = 1: the first proposal is the exploration density alone.
  double lambda_prev = 1.0;
  std::vector<double> batch_x;
  std::vector<double> log_w;
  long long next_mark =
      checkpoint_every > 0 ? checkpoint_every
                           : std::numeric_limits<long long>::max();
  long long fired_at = -1;

  for (;;) {
    const long long n = run.steps + 1;
    const int m_step = schedule.batch_at(n, config.batch);
    if (run.used + m_step > config.budget) break;
    const ScheduleValues sv = schedule.at(n);

    const auto t0 = std::chrono::steady_clock::now();
    // The subsampled proposal needs at least one stored particle; until then
    // (step 1) both algorithms share the full policy, which at lambda = 1 is
    // q0 itself.
    std::optional<MixturePolicy> full;
    std::optional<SubsampledProposal> sub;
    const Proposal* proposal;
    long long ell_used = 0;
    if (config.algorithm == Algorithm::kMidas || store.empty()) {
      full.emplace(store, q0, lambda_prev);
      proposal = &*full;
    } else {
      sub.emplace(store, q0, lambda_prev, sv.ell, rng);
      proposal = &*sub;
      ell_used = sv.ell;
    }

    batch_x.resize(static_cast<std::size_t>(m_step) *
                   static_cast<std::size_t>(d));
    log_w.resize(static_cast<std::size_t>(m_step));
    for (int i = 0; i < m_step; ++i) {
      const std::span<double> xi(
          batch_x.data() + static_cast<std::size_t>(i) * d,
          static_cast<std::size_t>(d));
      proposal->sample(rng, xi);
      const double log_q = proposal->log_density(xi);
      if (!std::isfinite(log_q))
        throw std::logic_error(
            "internal inconsistency: proposal density vanished at its own "
            "draw");
      const double lw = target.log_core(xi) - log_q;
      if (std::isnan(lw))
        throw std::logic_error(
            "internal inconsistency: target log density is NaN");
      log_w[static_cast<std::size_t>(i)] = lw;
    }

    store.begin_step(sv.gamma, m_step);
    for (int i = 0; i < m_step; ++i) {
      const std::span<const double> xi(
          batch_x.data() + static_cast<std::size_t>(i) * d,
          static_cast<std::size_t>(d));
      store.insert(xi, log_w[static_cast<std::size_t>(i)], sv.bandwidth);
    }

    run.used += m_step;
    run.steps = n;
    lambda_prev = sv.lambda;
    run.final_lambda = sv.lambda;
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    if (on_step)
      on_step(StepRecord{n, m_step, run.used, sv.gamma, sv.bandwidth,
                         sv.lambda, ell_used, seconds, log_w});
    if (on_checkpoint && run.used >= next_mark) {
      on_checkpoint(run.used, store, sv.lambda);
      fired_at = run.used;
      while (next_mark <= run.used) next_mark += checkpoint_every;
    }
  }

  if (on_checkpoint && run.used > 0 && fired_at != run.used)
    on_checkpoint(run.used, store, run.final_lambda);
  return run;
}

SamplerRun midas_run(const TargetDensity& target, const ExplorationDensity& q0,
                     RunConfig config, RngStream& rng,
                     long long checkpoint_every, const Checkpoint& on_checkpoint,
                     const StepObserver& on_step) {
  config.algorithm = Algorithm::kMidas;
  return run_sampler(target, q0, config, rng, checkpoint_every, on_checkpoint,
                     on_step);
}

SamplerRun submidas_run(const TargetDensity& target,
                        const ExplorationDensity& q0, RunConfig config,
                        RngStream& rng, long long checkpoint_every,
                        const Checkpoint& on_checkpoint,
                        const StepObserver& on_step) {
  config.algorithm = Algorithm::kSubMidas;
  return run_sampler(target, q0, config, rng, checkpoint_every, on_checkpoint,
                     on_step);
}

WeightedSampleSet store_sample_set(const ParticleStore& store, double scale,
                                   WeightKind kind) {
  WeightedSampleSet set;
  set.dim = store.dim();
  const std::size_t n = store.size();
  set.points.reserve(n * static_cast<std::size_t>(set.dim));
  set.weights.reserve(n);
  // Weights are produced up to a common positive factor, which every
  // consumer of a weighted sample set self-normalizes away: raw weights are
  // shifted by the largest log weight so that targets whose raw weights
  // would underflow stay usable, and effective weights are read off as the
  // store's exact selection probabilities.
  double max_log_w = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    max_log_w = std::max(max_log_w, store.log_weight(i));
  }
  if (!std::isfinite(max_log_w)) max_log_w = 0.0;
  const bool degenerate = store.total_mass() <= 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = store.position(i);
    set.points.insert(set.points.end(), x.begin(), x.end());
    set.weights.push_back(
        kind == WeightKind::kRaw
            ? scale * std::exp(store.log_weight(i) - max_log_w)
            : (degenerate ? 0.0 : store.selection_probability(i)));
  }
  return set;
}

}  // namespace midas
