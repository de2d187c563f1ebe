#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>

#include "midas/policy.hpp"
#include "midas/sample_set.hpp"
#include "midas/schedule.hpp"
#include "midas/targets.hpp"

namespace midas {

enum class Algorithm { kMidas, kSubMidas };

Algorithm algorithm_from_string(std::string_view name);
std::string to_string(Algorithm algo);

struct RunConfig {
  Algorithm algorithm = Algorithm::kSubMidas;
  KernelFamily kernel = KernelFamily::kGaussian;
  double eta = 1.0;
  long long budget = 60000;  // total f_u evaluations
  int batch = 300;           // particles per step after burn-in
  ScheduleSpec schedule;     // must be set (see Schedule::default_spec)
};

// Everything observable about one completed step. log_weights views a
// buffer owned by the driver and is only valid during the callback.
struct StepRecord {
  long long step;   // 1-based
  int batch_size;   // m0 for the first step, m afterwards
  long long used;   // cumulative f_u evaluations
  double gamma;
  double bandwidth;
  double lambda;    // lambda_n of this step (burn-in override applied)
  long long ell;    // subsample size used for the proposal; 0 for full
  double seconds;   // wall time of the step
  std::span<const double> log_weights;  // log(f_u/q) of the batch, scale-free
};

using StepObserver = std::function<void(const StepRecord&)>;
// Invoked after the step that crosses each configured budget mark (and after
// the final step) with the cumulative evaluation count, a read-only store
// view, and the lambda of the step just finished.
using Checkpoint =
    std::function<void(long long used, const ParticleStore&, double lambda)>;

struct SamplerRun {
  ParticleStore store;
  long long used = 0;
  long long steps = 0;
  double final_lambda = 1.0;
};

// The shared driver: steps n = 1, 2, ... until the next batch would exceed
// the budget. Step n draws its batch from the previous policy (lambda_0 = 1,
// so the first batch is pure exploration), computes the scale-free raw log
// weights log f_u - log q, and inserts the batch with (gamma_n, b_n). Full
// runs evaluate the complete mixture for sampling and weights; subsampled
// runs draw ell_n particles once per step and use that equal-weight proposal
// for both, falling back to the full policy while the store is empty.
//
// checkpoint_every is a budget cadence (0 means final state only).
SamplerRun run_sampler(const TargetDensity& target,
                       const ExplorationDensity& q0, const RunConfig& config,
                       RngStream& rng, long long checkpoint_every = 0,
                       const Checkpoint& on_checkpoint = nullptr,
                       const StepObserver& on_step = nullptr);

// Named entry points for the two algorithms; both defer to run_sampler.
SamplerRun midas_run(const TargetDensity& target, const ExplorationDensity& q0,
                     RunConfig config, RngStream& rng,
                     long long checkpoint_every = 0,
                     const Checkpoint& on_checkpoint = nullptr,
                     const StepObserver& on_step = nullptr);
SamplerRun submidas_run(const TargetDensity& target,
                        const ExplorationDensity& q0, RunConfig config,
                        RngStream& rng, long long checkpoint_every = 0,
                        const Checkpoint& on_checkpoint = nullptr,
                        const StepObserver& on_step = nullptr);

// The store's particles as a weighted sample set, weights exact up to one
// common positive factor (all consumers self-normalize). kRaw gives
// scale * exp(log w - max log w); kEffective gives the store's selection
// probabilities, the normalized decayed mixture weights.
WeightedSampleSet store_sample_set(const ParticleStore& store, double scale,
                                   WeightKind kind);

}  // namespace midas
