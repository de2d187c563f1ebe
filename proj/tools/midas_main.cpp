// Command-line driver: run / sweep execute experiment grids, eval recomputes
// metrics from a particle dump, validate-schedule checks convergence
// conditions, predict scores a dataset against a posterior dump.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 schedule
// validation failure.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "midas/dataset.hpp"
#include "midas/errors.hpp"
#include "midas/experiment.hpp"
#include "midas/io.hpp"
#include "midas/logistic.hpp"
#include "midas/metrics.hpp"
#include "midas/sample_set.hpp"
#include "midas/schedule.hpp"
#include "midas/targets.hpp"

namespace {

using midas::config_error;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitValidation = 4;

// Every option the run/sweep/eval/validate-schedule family understands; set
// members override the config file key of the same name.
struct Flags {
  std::string config_path;
  std::optional<std::string> experiment, target, kernel, weights, dump, out,
      dataset;
  std::optional<std::string> eta, seeds, algo, ais_levels;
  std::optional<long long> dim, batch, burnin_batch, burnin_steps,
      checkpoint_every, jobs, n_proj, ref_size, ais_batch, ais_mh,
      waveform_rows, train_size;
  std::optional<double> budget;
  std::optional<std::uint64_t> seed, waveform_seed, split_seed;
  std::optional<double> burnin_lambda, ell_exponent, ais_beta_min,
      ais_proposal_scale, prior_a, prior_b;
  std::optional<double> gamma_coef, gamma_alpha, gamma_shift;
  std::optional<double> bw_coef, bw_alpha, bw_shift;
  std::optional<double> lambda_coef, lambda_alpha, lambda_shift,
      lambda_log_scale, lambda_log_shift;
  bool strict = false;
};

void add_common_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path,
                  "flat JSON config file; flags override its keys");
  cmd->add_option("--experiment", f.experiment,
                  "coldstart|mixture|anisotropic|fourmodes|bayeslogistic|custom");
  cmd->add_option("--target", f.target, "toy target name for --experiment custom");
  cmd->add_option("--dim", f.dim, "problem dimension (toy targets)");
  cmd->add_option("--eta", f.eta, "weight-tempering exponent(s), comma list");
  cmd->add_option("--seeds", f.seeds,
                  "seed count, or explicit comma list of indices (trailing\n"
                  "comma for a single index)");
  cmd->add_option("--seed", f.seed, "base RNG seed");
  cmd->add_option("--algo", f.algo, "midas, submidas, ais (comma list)");
  cmd->add_option("--budget", f.budget, "total target evaluations per run");
  cmd->add_option("--batch", f.batch, "particles per step");
  cmd->add_option("--burnin-batch", f.burnin_batch, "first-step batch size");
  cmd->add_option("--burnin-lambda", f.burnin_lambda,
                  "defensive mixture weight during burn-in");
  cmd->add_option("--burnin-steps", f.burnin_steps, "burn-in step count");
  cmd->add_option("--checkpoint-every", f.checkpoint_every,
                  "metric cadence in evaluations (0 = final only)");
  cmd->add_option("--kernel", f.kernel, "gaussian|epanechnikov");
  cmd->add_option("--ell-exponent", f.ell_exponent,
                  "subsample size exponent (ell_n = ceil(n^e))");
  cmd->add_option("--n-proj", f.n_proj, "sliced W2 projection count");
  cmd->add_option("--ref-size", f.ref_size, "reference sample size");
  cmd->add_option("--weights", f.weights, "raw|effective dump/metric weights");
  cmd->add_option("--dump", f.dump, "particle dumps: none|final|all");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--jobs", f.jobs, "concurrent runs (sweep)");
  cmd->add_option("--gamma-coef", f.gamma_coef, "gamma_n coefficient");
  cmd->add_option("--gamma-alpha", f.gamma_alpha, "gamma_n decay exponent");
  cmd->add_option("--gamma-shift", f.gamma_shift, "gamma_n shift");
  cmd->add_option("--bw-coef", f.bw_coef, "bandwidth coefficient");
  cmd->add_option("--bw-alpha", f.bw_alpha, "bandwidth decay exponent");
  cmd->add_option("--bw-shift", f.bw_shift, "bandwidth shift");
  cmd->add_option("--lambda-coef", f.lambda_coef, "lambda_n coefficient");
  cmd->add_option("--lambda-alpha", f.lambda_alpha,
                  "lambda_n power-law exponent (power form)");
  cmd->add_option("--lambda-shift", f.lambda_shift, "lambda_n shift");
  cmd->add_option("--lambda-log-scale", f.lambda_log_scale,
                  "lambda_n = coef/log(scale n + shift) scale");
  cmd->add_option("--lambda-log-shift", f.lambda_log_shift,
                  "lambda_n log-form shift");
  cmd->add_option("--ais-levels", f.ais_levels,
                  "annealing level count(s), comma list");
  cmd->add_option("--ais-batch", f.ais_batch,
                  "AIS particles (0 = budget-matched)");
  cmd->add_option("--ais-mh", f.ais_mh, "Metropolis updates per level");
  cmd->add_option("--ais-beta-min", f.ais_beta_min, "first inverse temperature");
  cmd->add_option("--ais-proposal-scale", f.ais_proposal_scale,
                  "random-walk step (<=0: 0.5/sqrt(d))");
  cmd->add_option("--dataset", f.dataset, "labeled CSV (empty: waveform data)");
  cmd->add_option("--waveform-rows", f.waveform_rows, "generated dataset size");
  cmd->add_option("--waveform-seed", f.waveform_seed, "generator seed");
  cmd->add_option("--train-size", f.train_size, "training rows after split");
  cmd->add_option("--split-seed", f.split_seed, "train/test shuffle seed");
  cmd->add_option("--prior-a", f.prior_a, "precision prior shape");
  cmd->add_option("--prior-b", f.prior_b, "precision prior rate");
}

json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw midas::io_error("cannot read config file " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw config_error("config file " + path + " is not valid JSON");
  }
  return j;
}

json merged_config(const Flags& f) {
  json j = f.config_path.empty() ? json::object()
                                 : load_config_file(f.config_path);
  if (!j.is_object()) throw config_error("config root must be a JSON object");
  auto set = [&](const char* key, const auto& opt) {
    if (opt) j[key] = *opt;
  };
  set("experiment", f.experiment);
  set("target", f.target);
  set("dim", f.dim);
  set("eta", f.eta);
  set("seeds", f.seeds);
  set("seed", f.seed);
  set("algo", f.algo);
  if (f.budget) j["budget"] = *f.budget;
  set("batch", f.batch);
  set("burnin_batch", f.burnin_batch);
  set("burnin_lambda", f.burnin_lambda);
  set("burnin_steps", f.burnin_steps);
  set("checkpoint_every", f.checkpoint_every);
  set("kernel", f.kernel);
  set("ell_exponent", f.ell_exponent);
  set("n_proj", f.n_proj);
  set("ref_size", f.ref_size);
  set("weights", f.weights);
  set("dump", f.dump);
  set("out", f.out);
  set("jobs", f.jobs);
  set("gamma_coef", f.gamma_coef);
  set("gamma_alpha", f.gamma_alpha);
  set("gamma_shift", f.gamma_shift);
  set("bw_coef", f.bw_coef);
  set("bw_alpha", f.bw_alpha);
  set("bw_shift", f.bw_shift);
  set("lambda_coef", f.lambda_coef);
  set("lambda_alpha", f.lambda_alpha);
  set("lambda_shift", f.lambda_shift);
  set("lambda_log_scale", f.lambda_log_scale);
  set("lambda_log_shift", f.lambda_log_shift);
  set("ais_levels", f.ais_levels);
  set("ais_batch", f.ais_batch);
  set("ais_mh", f.ais_mh);
  set("ais_beta_min", f.ais_beta_min);
  set("ais_proposal_scale", f.ais_proposal_scale);
  set("dataset", f.dataset);
  set("waveform_rows", f.waveform_rows);
  set("waveform_seed", f.waveform_seed);
  set("train_size", f.train_size);
  set("split_seed", f.split_seed);
  set("prior_a", f.prior_a);
  set("prior_b", f.prior_b);
  return j;
}

void print_reports(
    const std::vector<std::pair<double, midas::ValidationReport>>& reports,
    int dim, bool as_json) {
  if (as_json) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& [eta, report] : reports) {
      nlohmann::ordered_json checks = nlohmann::ordered_json::array();
      for (const auto& c : report.checks) {
        checks.push_back(
            {{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
      }
      out.push_back({{"eta", eta},
                     {"dim", dim},
                     {"status", midas::to_string(report.status)},
                     {"reason", report.reason},
                     {"branch", report.branch},
                     {"checks", checks}});
    }
    std::cout << out.dump(2) << "\n";
    return;
  }
  for (const auto& [eta, report] : reports) {
    std::cout << "schedule validation (eta = " << midas::format_double(eta)
              << ", d = " << dim << "): " << midas::to_string(report.status)
              << "\n";
    for (const auto& c : report.checks) {
      std::cout << "  [" << (c.pass ? "ok" : "violated") << "] " << c.name
                << ": " << c.detail << "\n";
    }
    if (!report.reason.empty()) {
      std::cout << "  first violated condition: " << report.reason << "\n";
    }
    if (!report.branch.empty()) {
      std::cout << "  rate branch: " << report.branch << "\n";
    }
  }
}

// Shared by run and sweep; run restricts the grid to one cell and defaults
// to per-checkpoint dumps.
int do_run(const Flags& flags, bool single) {
  json j = merged_config(flags);
  if (single && !j.contains("dump")) j["dump"] = "all";
  midas::ExperimentSpec spec = midas::parse_spec(j);
  if (single) {
    bool one_algo = spec.algorithms.size() == 1 &&
                    (spec.algorithms[0] != "ais" || spec.ais_levels.size() == 1);
    if (!one_algo || spec.etas.size() != 1 || spec.seeds.size() != 1) {
      throw config_error(
          "run executes a single (algo, eta, seed) cell; use sweep for grids");
    }
  }
  if (flags.strict) {
    auto reports = midas::validate_spec(spec);
    for (const auto& [eta, report] : reports) {
      if (report.status == midas::ValidationStatus::kFail) {
        std::cerr << "schedule validation failed at eta = "
                  << midas::format_double(eta) << ": " << report.reason
                  << "\n";
        return kExitValidation;
      }
    }
  }
  int runs = midas::run_experiment(spec);
  std::cout << "completed " << runs << (runs == 1 ? " run" : " runs")
            << "; artifacts in " << spec.out_dir << "\n";
  return 0;
}

int do_validate(const Flags& flags, bool as_json) {
  midas::ExperimentSpec spec = midas::parse_spec(merged_config(flags));
  midas::ProblemSetup problem = midas::build_problem(spec);
  auto reports = midas::validate_spec(spec);
  print_reports(reports, problem.dim, as_json);
  bool any_fail = false;
  bool any_indeterminate = false;
  for (const auto& [eta, report] : reports) {
    any_fail |= report.status == midas::ValidationStatus::kFail;
    any_indeterminate |=
        report.status == midas::ValidationStatus::kIndeterminate;
  }
  if (any_fail) return kExitValidation;
  if (any_indeterminate && flags.strict) return kExitValidation;
  return 0;
}

int do_eval(const Flags& flags, const std::string& particles_path,
            long long algo_idx, long long eta_idx) {
  midas::ExperimentSpec spec = midas::parse_spec(merged_config(flags));
  const midas::WeightKind kind = spec.weights == "effective"
                                     ? midas::WeightKind::kEffective
                                     : midas::WeightKind::kRaw;
  midas::WeightedSampleSet set = midas::read_particle_dump(particles_path, kind);
  midas::ProblemSetup problem = midas::build_problem(spec);
  if (set.dim != problem.dim) {
    throw config_error("dump dimension " + std::to_string(set.dim) +
                       " does not match the experiment dimension " +
                       std::to_string(problem.dim));
  }
  if (problem.bayes) {
    double acc = midas::predictive_accuracy(set, *problem.test);
    std::cout << "accuracy\n" << midas::format_double(acc) << "\n";
    return 0;
  }
  const long long seed_idx = spec.seeds.front();
  midas::RngStream ref_rng(spec.base_seed, midas::reference_stream(seed_idx));
  midas::WeightedSampleSet reference = midas::uniform_sample_set(
      problem.target->reference_sample(
          static_cast<std::size_t>(spec.ref_size), ref_rng),
      problem.dim);
  const std::uint64_t stream = midas::run_stream(
      seed_idx, static_cast<int>(algo_idx), static_cast<int>(eta_idx));
  double sw2 = midas::sliced_w2(set, reference, spec.n_proj,
                                midas::slicing_seed(spec.base_seed, stream), 1);
  std::cout << "sw2,log_sw2\n"
            << midas::format_double(sw2) << ","
            << midas::format_double(std::log(sw2)) << "\n";
  return 0;
}

int do_predict(const std::string& particles_path, const std::string& data_path,
               const std::string& weights, const std::string& out_path) {
  const midas::WeightKind kind = weights == "effective"
                                     ? midas::WeightKind::kEffective
                                     : midas::WeightKind::kRaw;
  if (weights != "raw" && weights != "effective") {
    throw config_error("weights must be raw or effective");
  }
  midas::WeightedSampleSet set = midas::read_particle_dump(particles_path, kind);
  midas::LabeledDataset data = midas::load_labeled_csv(data_path);
  std::ofstream out;
  if (!out_path.empty()) {
    out.open(out_path, std::ios::binary);
    if (!out) throw midas::io_error("cannot write " + out_path);
    out << "index,probability,predicted,label\n";
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double p = midas::posterior_predict(set, data.row(i));
    int predicted = p >= 0.5 ? 1 : -1;
    if (predicted == data.labels[i]) ++correct;
    if (out.is_open()) {
      out << (i + 1) << "," << midas::format_double(p) << "," << predicted
          << "," << data.labels[i] << "\n";
    }
  }
  std::cout << "accuracy "
            << midas::format_double(static_cast<double>(correct) /
                                    static_cast<double>(data.size()))
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonparametric adaptive importance sampling"};
  app.set_version_flag("--version", midas::version_string());
  app.require_subcommand(1);

  Flags run_flags, sweep_flags, eval_flags, validate_flags;

  CLI::App* run = app.add_subcommand(
      "run", "execute one sampler run and write its artifacts");
  add_common_flags(run, run_flags);
  run->add_flag("--strict", run_flags.strict,
                "abort (exit 4) if the schedule fails validation");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "execute the full (algo, eta, seed) grid and aggregate");
  add_common_flags(sweep, sweep_flags);
  sweep->add_flag("--strict", sweep_flags.strict,
                  "abort (exit 4) if the schedule fails validation");

  CLI::App* eval = app.add_subcommand(
      "eval", "recompute metrics for a particle dump");
  std::string eval_particles;
  long long eval_algo_idx = 0, eval_eta_idx = 0;
  eval->add_option("--particles", eval_particles, "particle dump CSV")
      ->required();
  eval->add_option("--algo-idx", eval_algo_idx,
                   "algorithm instance index used for the slicing stream");
  eval->add_option("--eta-idx", eval_eta_idx,
                   "eta index used for the slicing stream");
  add_common_flags(eval, eval_flags);

  CLI::App* validate = app.add_subcommand(
      "validate-schedule", "check the convergence conditions of a schedule");
  bool validate_json = false;
  add_common_flags(validate, validate_flags);
  validate->add_flag("--strict", validate_flags.strict,
                     "treat indeterminate checks as failures");
  validate->add_flag("--json", validate_json, "machine-readable report");

  CLI::App* predict = app.add_subcommand(
      "predict", "score a labeled dataset against a posterior particle dump");
  std::string predict_particles, predict_data, predict_out;
  std::string predict_weights = "raw";
  predict->add_option("--particles", predict_particles, "particle dump CSV")
      ->required();
  predict->add_option("--data", predict_data, "labeled feature CSV")
      ->required();
  predict->add_option("--weights", predict_weights, "raw|effective");
  predict->add_option("--out", predict_out, "per-row predictions CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) return do_run(run_flags, true);
    if (sweep->parsed()) return do_run(sweep_flags, false);
    if (eval->parsed()) {
      return do_eval(eval_flags, eval_particles, eval_algo_idx, eval_eta_idx);
    }
    if (validate->parsed()) return do_validate(validate_flags, validate_json);
    if (predict->parsed()) {
      return do_predict(predict_particles, predict_data, predict_weights,
                        predict_out);
    }
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const midas::parse_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitIo;
  } catch (const midas::io_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
