#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "midas/dataset.hpp"
#include "midas/schedule.hpp"
#include "midas/targets.hpp"

namespace midas {

// Fully resolved experiment description. Every field has a materialized
// value after parse_spec; the JSON echo written next to the artifacts
// round-trips through parse_spec to the identical spec.
struct ExperimentSpec {
  std::string experiment = "coldstart";  // coldstart | mixture | anisotropic
                                         // | fourmodes | bayeslogistic
                                         // | custom (requires target)
  std::string target;                    // toy name when experiment=custom
  int dim = 2;
  std::vector<double> etas = {1.0};
  std::vector<long long> seeds = {0};    // seed indices
  std::uint64_t base_seed = 1;
  std::vector<std::string> algorithms = {"submidas"};  // midas|submidas|ais

  long long budget = 60000;
  int batch = 300;
  int burnin_batch = 2000;
  double burnin_lambda = 0.5;
  long long burnin_steps = 10;
  long long checkpoint_every = 6000;  // 0 = final state only
  std::string kernel = "gaussian";
  double ell_exponent = 0.5;

  // Evaluation.
  int n_proj = 100;
  int ref_size = 10000;
  std::string weights = "raw";  // raw | effective
  std::string dump = "final";   // none | final | all
  std::string out_dir = "out";
  int jobs = 1;

  // Optional schedule overrides; setting any key of a group replaces that
  // whole sequence (unset members fall back to coef 1, shift 0, and the
  // default exponent of the group).
  std::optional<double> gamma_coef, gamma_alpha, gamma_shift;
  std::optional<double> bw_coef, bw_alpha, bw_shift;
  std::optional<double> lambda_coef, lambda_alpha, lambda_shift;
  std::optional<double> lambda_log_scale, lambda_log_shift;

  // AIS baseline.
  std::vector<int> ais_levels = {5, 10, 30};
  int ais_batch = 0;  // 0: sized so K (n_mh + 1) batch matches the budget
  int ais_mh = 20;
  double ais_beta_min = 1e-4;
  double ais_proposal_scale = 0.0;  // <= 0: 0.5/sqrt(d)

  // Logistic regression experiment.
  std::string dataset;  // CSV path; empty generates the waveform data
  int waveform_rows = 5000;
  std::uint64_t waveform_seed = 99;
  int train_size = 400;
  std::uint64_t split_seed = 13;
  double prior_a = 1.0;
  double prior_b = 0.01;
};

// Parses and validates a flat JSON object into a spec. Unknown keys and type
// mismatches raise config_error (the former lists the valid keys). Scalar
// list fields (etas, seeds, algorithms, ais_levels) accept a single value, a
// JSON array, or a comma-separated string.
ExperimentSpec parse_spec(const nlohmann::json& config);

// The spec as a flat JSON object (inverse of parse_spec, defaults
// materialized, fixed key order).
nlohmann::ordered_json spec_to_json(const ExperimentSpec& spec);

// Builds the schedule for one run: defaults for (dim, batch) with the
// spec's burn-in settings and any overrides applied.
ScheduleSpec make_schedule_spec(const ExperimentSpec& spec, int dim);

// The materialized sampling problem behind a spec: target, exploration
// density, and (for the logistic experiment) the held-out test set. Toy
// problems keep dim = spec.dim; the posterior's dimension comes from the
// dataset (feature count + 1).
struct ProblemSetup {
  std::optional<TargetDensity> target;
  std::optional<ExplorationDensity> q0;
  std::shared_ptr<const LabeledDataset> test;  // null for toy problems
  bool bayes = false;
  int dim = 0;
};

ProblemSetup build_problem(const ExperimentSpec& spec);

// Schedule validation for each configured eta at the problem's dimension.
std::vector<std::pair<double, ValidationReport>> validate_spec(
    const ExperimentSpec& spec);

// Stream-splitting rule (documented contract, tests pin it):
//   run stream:        seed_idx * 10000 + algo_idx * 100 + eta_idx
//   reference stream:  1e9 + seed_idx            (same base seed word)
//   slicing seed word: base_seed + 2^32 + run stream (direction k is the
//                      substream of that word)
std::uint64_t run_stream(long long seed_idx, int algo_idx, int eta_idx);
std::uint64_t reference_stream(long long seed_idx);
std::uint64_t slicing_seed(std::uint64_t base_seed, std::uint64_t stream);

// Executes the full (algorithm, eta, seed) grid, writing per-run artifacts
// under <out_dir>/runs/ plus config.json and aggregate.csv. Returns the
// number of runs executed.
int run_experiment(const ExperimentSpec& spec);

// One-line version string recorded in every manifest.
std::string version_string();

}  // namespace midas
