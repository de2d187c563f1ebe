#include "midas/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "midas/ais.hpp"
#include "midas/dataset.hpp"
#include "midas/errors.hpp"
#include "midas/io.hpp"
#include "midas/kernels.hpp"
#include "midas/logistic.hpp"
#include "midas/metrics.hpp"
#include "midas/samplers.hpp"
#include "midas/targets.hpp"

namespace midas {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const char* const kValidKeys[] = {
    "experiment", "target", "dim", "eta", "seeds", "seed", "algo",
    "budget", "batch", "burnin_batch", "burnin_lambda", "burnin_steps",
    "checkpoint_every", "kernel", "ell_exponent", "n_proj", "ref_size",
    "weights", "dump", "out", "jobs",
    "gamma_coef", "gamma_alpha", "gamma_shift",
    "bw_coef", "bw_alpha", "bw_shift",
    "lambda_coef", "lambda_alpha", "lambda_shift",
    "lambda_log_scale", "lambda_log_shift",
    "ais_levels", "ais_batch", "ais_mh", "ais_beta_min", "ais_proposal_scale",
    "dataset", "waveform_rows", "waveform_seed", "train_size", "split_seed",
    "prior_a", "prior_b",
};

std::string valid_key_list() {
  std::string out;
  for (const char* k : kValidKeys) {
    if (!out.empty()) out += ", ";
    out += k;
  }
  return out;
}

[[noreturn]] void type_error(const std::string& key, const char* want) {
  throw config_error("config key \"" + key + "\" expects " + want);
}

double as_double(const json& v, const std::string& key) {
  if (!v.is_number()) type_error(key, "a number");
  return v.get<double>();
}

long long as_integer(const json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number()) {
    double d = v.get<double>();
    if (std::floor(d) == d && std::fabs(d) < 9.0e18) {
      return static_cast<long long>(d);
    }
  }
  type_error(key, "an integer");
}

std::uint64_t as_seed_value(const json& v, const std::string& key) {
  long long n = as_integer(v, key);
  if (n < 0) type_error(key, "a nonnegative integer");
  return static_cast<std::uint64_t>(n);
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) type_error(key, "a string");
  return v.get<std::string>();
}

// List fields accept one scalar, a JSON array of scalars, or a
// comma-separated string.
template <typename T, typename Parse>
std::vector<T> as_list(const json& v, const std::string& key,
                       const Parse& parse_scalar) {
  std::vector<T> out;
  if (v.is_array()) {
    for (const auto& item : v) out.push_back(parse_scalar(item));
    return out;
  }
  if (v.is_string()) {
    std::stringstream ss(v.get<std::string>());
    std::string token;
    while (std::getline(ss, token, ',')) {
      if (token.empty()) type_error(key, "nonempty comma-separated entries");
      out.push_back(parse_scalar(json::parse(token, nullptr, false).is_discarded()
                                     ? json(token)
                                     : json::parse(token)));
    }
    return out;
  }
  out.push_back(parse_scalar(v));
  return out;
}

std::vector<double> as_double_list(const json& v, const std::string& key) {
  return as_list<double>(v, key,
                         [&](const json& x) { return as_double(x, key); });
}

std::vector<long long> as_integer_list(const json& v, const std::string& key) {
  return as_list<long long>(v, key,
                            [&](const json& x) { return as_integer(x, key); });
}

std::vector<int> as_int_list(const json& v, const std::string& key) {
  std::vector<int> out;
  for (long long n : as_integer_list(v, key)) out.push_back((int)n);
  return out;
}

std::vector<std::string> as_string_list(const json& v, const std::string& key) {
  if (v.is_string()) {
    std::vector<std::string> out;
    std::stringstream ss(v.get<std::string>());
    std::string token;
    while (std::getline(ss, token, ',')) out.push_back(token);
    if (out.empty()) type_error(key, "a nonempty string");
    return out;
  }
  return as_list<std::string>(
      v, key, [&](const json& x) { return as_string(x, key); });
}

bool known_experiment(const std::string& name) {
  return name == "coldstart" || name == "mixture" || name == "anisotropic" ||
         name == "fourmodes" || name == "bayeslogistic" || name == "custom";
}

void check_positive(double v, const char* what) {
  if (!(v > 0)) throw config_error(std::string(what) + " must be positive");
}

}  // namespace

std::uint64_t run_stream(long long seed_idx, int algo_idx, int eta_idx) {
  return static_cast<std::uint64_t>(seed_idx) * 10000ull +
         static_cast<std::uint64_t>(algo_idx) * 100ull +
         static_cast<std::uint64_t>(eta_idx);
}

std::uint64_t reference_stream(long long seed_idx) {
  return 1000000000ull + static_cast<std::uint64_t>(seed_idx);
}

std::uint64_t slicing_seed(std::uint64_t base_seed, std::uint64_t stream) {
  return base_seed + (1ull << 32) + stream;
}

std::string version_string() { return "midas 0.1.0"; }

ExperimentSpec parse_spec(const json& config) {
  if (!config.is_object()) {
    throw config_error("config root must be a flat JSON object");
  }
  ExperimentSpec s;
  bool seen_seeds = false;
  for (const auto& [key, value] : config.items()) {
    if (key == "experiment") {
      s.experiment = as_string(value, key);
    } else if (key == "target") {
      s.target = as_string(value, key);
    } else if (key == "dim") {
      s.dim = (int)as_integer(value, key);
    } else if (key == "eta") {
      s.etas = as_double_list(value, key);
    } else if (key == "seeds") {
      seen_seeds = true;
      // A bare integer (or integer-valued string) is a count; an array or a
      // comma-separated string lists explicit seed indices. A single
      // explicit index is written with a trailing comma: "7,".
      const bool explicit_list =
          value.is_array() ||
          (value.is_string() &&
           value.get<std::string>().find(',') != std::string::npos);
      if (explicit_list) {
        s.seeds = as_integer_list(value, key);
      } else {
        long long count = value.is_string()
                              ? as_integer_list(value, key).at(0)
                              : as_integer(value, key);
        if (count < 1) type_error(key, "a positive count or an index list");
        s.seeds.clear();
        for (long long i = 0; i < count; ++i) s.seeds.push_back(i);
      }
    } else if (key == "seed") {
      s.base_seed = as_seed_value(value, key);
    } else if (key == "algo") {
      s.algorithms = as_string_list(value, key);
    } else if (key == "budget") {
      s.budget = as_integer(value, key);
    } else if (key == "batch") {
      s.batch = (int)as_integer(value, key);
    } else if (key == "burnin_batch") {
      s.burnin_batch = (int)as_integer(value, key);
    } else if (key == "burnin_lambda") {
      s.burnin_lambda = as_double(value, key);
    } else if (key == "burnin_steps") {
      s.burnin_steps = as_integer(value, key);
    } else if (key == "checkpoint_every") {
      s.checkpoint_every = as_integer(value, key);
    } else if (key == "kernel") {
      s.kernel = as_string(value, key);
    } else if (key == "ell_exponent") {
      s.ell_exponent = as_double(value, key);
    } else if (key == "n_proj") {
      s.n_proj = (int)as_integer(value, key);
    } else if (key == "ref_size") {
      s.ref_size = (int)as_integer(value, key);
    } else if (key == "weights") {
      s.weights = as_string(value, key);
    } else if (key == "dump") {
      s.dump = as_string(value, key);
    } else if (key == "out") {
      s.out_dir = as_string(value, key);
    } else if (key == "jobs") {
      s.jobs = (int)as_integer(value, key);
    } else if (key == "gamma_coef") {
      s.gamma_coef = as_double(value, key);
    } else if (key == "gamma_alpha") {
      s.gamma_alpha = as_double(value, key);
    } else if (key == "gamma_shift") {
      s.gamma_shift = as_double(value, key);
    } else if (key == "bw_coef") {
      s.bw_coef = as_double(value, key);
    } else if (key == "bw_alpha") {
      s.bw_alpha = as_double(value, key);
    } else if (key == "bw_shift") {
      s.bw_shift = as_double(value, key);
    } else if (key == "lambda_coef") {
      s.lambda_coef = as_double(value, key);
    } else if (key == "lambda_alpha") {
      s.lambda_alpha = as_double(value, key);
    } else if (key == "lambda_shift") {
      s.lambda_shift = as_double(value, key);
    } else if (key == "lambda_log_scale") {
      s.lambda_log_scale = as_double(value, key);
    } else if (key == "lambda_log_shift") {
      s.lambda_log_shift = as_double(value, key);
    } else if (key == "ais_levels") {
      s.ais_levels = as_int_list(value, key);
    } else if (key == "ais_batch") {
      s.ais_batch = (int)as_integer(value, key);
    } else if (key == "ais_mh") {
      s.ais_mh = (int)as_integer(value, key);
    } else if (key == "ais_beta_min") {
      s.ais_beta_min = as_double(value, key);
    } else if (key == "ais_proposal_scale") {
      s.ais_proposal_scale = as_double(value, key);
    } else if (key == "dataset") {
      s.dataset = as_string(value, key);
    } else if (key == "waveform_rows") {
      s.waveform_rows = (int)as_integer(value, key);
    } else if (key == "waveform_seed") {
      s.waveform_seed = as_seed_value(value, key);
    } else if (key == "train_size") {
      s.train_size = (int)as_integer(value, key);
    } else if (key == "split_seed") {
      s.split_seed = as_seed_value(value, key);
    } else if (key == "prior_a") {
      s.prior_a = as_double(value, key);
    } else if (key == "prior_b") {
      s.prior_b = as_double(value, key);
    } else {
      throw config_error("unknown config key \"" + key +
                         "\"; valid keys: " + valid_key_list());
    }
  }
  (void)seen_seeds;

  if (!known_experiment(s.experiment)) {
    throw config_error(
        "experiment must be one of coldstart, mixture, anisotropic, "
        "fourmodes, bayeslogistic, custom");
  }
  if (s.experiment == "custom") {
    if (s.target.empty()) {
      throw config_error("experiment \"custom\" requires a target key");
    }
    try {
      toy_target_from_string(s.target);
    } catch (const std::invalid_argument& e) {
      throw config_error(e.what());
    }
  }
  if (s.experiment == "fourmodes" && s.dim != 2) {
    throw config_error("fourmodes is two-dimensional; set dim to 2");
  }
  if (s.dim < 1) throw config_error("dim must be at least 1");
  if (s.etas.empty() || s.etas.size() > 100) {
    throw config_error("eta expects between 1 and 100 values");
  }
  for (double e : s.etas) {
    if (!(e > 0.0) || e > 1.0) {
      throw config_error("eta values must lie in (0, 1]");
    }
  }
  if (s.seeds.empty()) throw config_error("seeds must be nonempty");
  for (long long idx : s.seeds) {
    if (idx < 0 || idx >= 100000) {
      throw config_error("seed indices must lie in [0, 100000)");
    }
  }
  if (s.algorithms.empty() || s.algorithms.size() > 10) {
    throw config_error("algo expects between 1 and 10 entries");
  }
  for (const auto& a : s.algorithms) {
    if (a != "midas" && a != "submidas" && a != "ais") {
      throw config_error("algo entries must be midas, submidas, or ais");
    }
  }
  if (s.budget < 1) throw config_error("budget must be positive");
  if (s.batch < 1) throw config_error("batch must be positive");
  if (s.burnin_batch < 1) throw config_error("burnin_batch must be positive");
  if (!(s.burnin_lambda >= 0.0) || s.burnin_lambda > 1.0) {
    throw config_error("burnin_lambda must lie in [0, 1]");
  }
  if (s.burnin_steps < 0) throw config_error("burnin_steps must be >= 0");
  if (s.checkpoint_every < 0) {
    throw config_error("checkpoint_every must be >= 0 (0 = final only)");
  }
  try {
    kernel_family_from_string(s.kernel);
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  if (!(s.ell_exponent >= 0.0)) {
    throw config_error("ell_exponent must be >= 0");
  }
  if (s.n_proj < 1) throw config_error("n_proj must be positive");
  if (s.ref_size < 1) throw config_error("ref_size must be positive");
  if (s.weights != "raw" && s.weights != "effective") {
    throw config_error("weights must be raw or effective");
  }
  if (s.dump != "none" && s.dump != "final" && s.dump != "all") {
    throw config_error("dump must be none, final, or all");
  }
  if (s.jobs < 1) throw config_error("jobs must be positive");
  if (s.ais_levels.empty() || s.ais_levels.size() > 20) {
    throw config_error("ais_levels expects between 1 and 20 values");
  }
  for (int k : s.ais_levels) {
    if (k < 1) throw config_error("ais_levels entries must be >= 1");
  }
  if (s.ais_batch < 0) throw config_error("ais_batch must be >= 0");
  if (s.ais_mh < 1) throw config_error("ais_mh must be positive");
  if (!(s.ais_beta_min > 0.0) || !(s.ais_beta_min < 1.0)) {
    throw config_error("ais_beta_min must lie in (0, 1)");
  }
  if (s.waveform_rows < 2) throw config_error("waveform_rows must be >= 2");
  if (s.train_size < 1) throw config_error("train_size must be positive");
  check_positive(s.prior_a, "prior_a");
  check_positive(s.prior_b, "prior_b");
  return s;
}

nlohmann::ordered_json spec_to_json(const ExperimentSpec& s) {
  ordered_json j;
  j["experiment"] = s.experiment;
  if (!s.target.empty()) j["target"] = s.target;
  j["dim"] = s.dim;
  j["eta"] = s.etas;
  j["seeds"] = s.seeds;
  j["seed"] = s.base_seed;
  j["algo"] = s.algorithms;
  j["budget"] = s.budget;
  j["batch"] = s.batch;
  j["burnin_batch"] = s.burnin_batch;
  j["burnin_lambda"] = s.burnin_lambda;
  j["burnin_steps"] = s.burnin_steps;
  j["checkpoint_every"] = s.checkpoint_every;
  j["kernel"] = s.kernel;
  j["ell_exponent"] = s.ell_exponent;
  j["n_proj"] = s.n_proj;
  j["ref_size"] = s.ref_size;
  j["weights"] = s.weights;
  j["dump"] = s.dump;
  j["out"] = s.out_dir;
  j["jobs"] = s.jobs;
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  put("gamma_coef", s.gamma_coef);
  put("gamma_alpha", s.gamma_alpha);
  put("gamma_shift", s.gamma_shift);
  put("bw_coef", s.bw_coef);
  put("bw_alpha", s.bw_alpha);
  put("bw_shift", s.bw_shift);
  put("lambda_coef", s.lambda_coef);
  put("lambda_alpha", s.lambda_alpha);
  put("lambda_shift", s.lambda_shift);
  put("lambda_log_scale", s.lambda_log_scale);
  put("lambda_log_shift", s.lambda_log_shift);
  j["ais_levels"] = s.ais_levels;
  j["ais_batch"] = s.ais_batch;
  j["ais_mh"] = s.ais_mh;
  j["ais_beta_min"] = s.ais_beta_min;
  j["ais_proposal_scale"] = s.ais_proposal_scale;
  if (!s.dataset.empty()) j["dataset"] = s.dataset;
  j["waveform_rows"] = s.waveform_rows;
  j["waveform_seed"] = s.waveform_seed;
  j["train_size"] = s.train_size;
  j["split_seed"] = s.split_seed;
  j["prior_a"] = s.prior_a;
  j["prior_b"] = s.prior_b;
  return j;
}

ScheduleSpec make_schedule_spec(const ExperimentSpec& s, int dim) {
  ScheduleSpec sched = Schedule::default_spec(dim, s.batch);
  sched.burnin_batch = s.burnin_batch;
  sched.burnin_lambda = s.burnin_lambda;
  sched.burnin_steps = s.burnin_steps;
  sched.ell_exponent = s.ell_exponent;
  if (s.gamma_coef || s.gamma_alpha || s.gamma_shift) {
    sched.gamma = PowerLawTerm::power(s.gamma_coef.value_or(1.0),
                                      s.gamma_alpha.value_or(1.0),
                                      s.gamma_shift.value_or(0.0));
  }
  if (s.bw_coef || s.bw_alpha || s.bw_shift) {
    sched.bandwidth = PowerLawTerm::power(s.bw_coef.value_or(1.0),
                                          s.bw_alpha.value_or(0.0),
                                          s.bw_shift.value_or(0.0));
  }
  if (s.lambda_alpha) {
    sched.lambda = PowerLawTerm::power(s.lambda_coef.value_or(1.0),
                                       *s.lambda_alpha,
                                       s.lambda_shift.value_or(0.0));
  } else if (s.lambda_coef || s.lambda_log_scale || s.lambda_log_shift) {
    sched.lambda = PowerLawTerm::inverse_log(
        s.lambda_coef.value_or(1.0),
        s.lambda_log_scale.value_or(static_cast<double>(s.batch)),
        s.lambda_log_shift.value_or(10.0));
  }
  return sched;
}

namespace {

struct JobDesc {
  int algo_idx = 0;
  std::string label;
  bool is_ais = false;
  Algorithm algo = Algorithm::kMidas;
  int levels = 0;  // AIS only
  int eta_idx = 0;
  double eta = 0.0;
  long long seed_idx = 0;
  std::uint64_t stream = 0;
  std::string dir_name;
};

struct JobResult {
  std::vector<std::pair<long long, double>> points;  // (budget, metric)
};

}  // namespace

ProblemSetup build_problem(const ExperimentSpec& spec) {
  ProblemSetup p;
  if (spec.experiment == "bayeslogistic") {
    p.bayes = true;
    LabeledDataset full =
        spec.dataset.empty()
            ? make_waveform(static_cast<std::size_t>(spec.waveform_rows),
                            spec.waveform_seed)
            : load_labeled_csv(spec.dataset);
    auto [train, test] = split_dataset(
        full, static_cast<std::size_t>(spec.train_size), spec.split_seed);
    p.target = logistic_posterior(train, spec.prior_a, spec.prior_b);
    p.q0 = logistic_exploration(p.target->dim());
    p.test = std::make_shared<const LabeledDataset>(std::move(test));
    p.dim = p.target->dim();
  } else {
    const std::string name =
        spec.experiment == "custom" ? spec.target : spec.experiment;
    ToyTarget which = toy_target_from_string(name);
    p.target = make_toy_target(which, spec.dim);
    p.q0 = default_exploration(which, spec.dim);
    p.dim = spec.dim;
  }
  return p;
}

std::vector<std::pair<double, ValidationReport>> validate_spec(
    const ExperimentSpec& spec) {
  const ProblemSetup problem = build_problem(spec);
  const ScheduleSpec sched = make_schedule_spec(spec, problem.dim);
  std::vector<std::pair<double, ValidationReport>> reports;
  for (double eta : spec.etas) {
    reports.emplace_back(eta, validate_schedule(sched, eta, problem.dim));
  }
  return reports;
}

namespace {

std::vector<JobDesc> enumerate_jobs(const ExperimentSpec& spec) {
  struct Instance {
    std::string label;
    bool is_ais;
    Algorithm algo;
    int levels;
  };
  std::vector<Instance> instances;
  for (const auto& a : spec.algorithms) {
    if (a == "ais") {
      for (int k : spec.ais_levels) {
        instances.push_back(
            {"ais-k" + std::to_string(k), true, Algorithm::kMidas, k});
      }
    } else {
      instances.push_back({a, false, algorithm_from_string(a), 0});
    }
  }
  if (instances.size() > 100) {
    throw config_error("too many algorithm instances (limit 100)");
  }
  std::vector<JobDesc> jobs;
  for (int ai = 0; ai < (int)instances.size(); ++ai) {
    const auto& inst = instances[ai];
    const int eta_count = inst.is_ais ? 1 : (int)spec.etas.size();
    for (int ei = 0; ei < eta_count; ++ei) {
      for (long long sidx : spec.seeds) {
        JobDesc jd;
        jd.algo_idx = ai;
        jd.label = inst.label;
        jd.is_ais = inst.is_ais;
        jd.algo = inst.algo;
        jd.levels = inst.levels;
        jd.eta_idx = ei;
        jd.eta = inst.is_ais ? 0.0 : spec.etas[ei];
        jd.seed_idx = sidx;
        jd.stream = run_stream(sidx, ai, ei);
        jd.dir_name = inst.label +
                      (inst.is_ais ? "" : "_eta" + format_double(jd.eta)) +
                      "_seed" + std::to_string(sidx);
        jobs.push_back(std::move(jd));
      }
    }
  }
  return jobs;
}

std::string metrics_header(bool bayes) {
  return bayes ? "budget,seed,eta,algo,accuracy"
               : "budget,seed,eta,algo,sw2,log_sw2";
}

ordered_json validation_to_json(const ValidationReport& report) {
  ordered_json checks = ordered_json::array();
  for (const auto& c : report.checks) {
    checks.push_back(
        {{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  return ordered_json{{"type", "schedule_validation"},
                      {"status", to_string(report.status)},
                      {"reason", report.reason},
                      {"branch", report.branch},
                      {"checks", checks}};
}

// Runs one grid cell end to end and writes its artifact directory.
JobResult run_one_job(const ExperimentSpec& spec, const ProblemSetup& problem,
                      const JobDesc& jd, const fs::path& runs_root) {
  JobResult result;
  const fs::path dir = runs_root / jd.dir_name;
  fs::create_directories(dir);
  std::ofstream metrics(dir / "metrics.csv", std::ios::binary);
  std::ofstream manifest(dir / "manifest.jsonl", std::ios::binary);
  std::ofstream timings(dir / "timings.jsonl", std::ios::binary);
  if (!metrics || !manifest || !timings) {
    throw io_error("cannot write run artifacts under " + dir.string());
  }
  metrics << metrics_header(problem.bayes) << "\n";

  // The manifest belongs to the deterministic artifact set: identical cells
  // must produce identical bytes no matter where the sweep wrote its output
  // or how many workers ran it, so the echoed spec drops those two keys.
  auto spec_echo = spec_to_json(spec);
  spec_echo.erase("out");
  spec_echo.erase("jobs");
  ordered_json config_line{{"type", "config"},
                           {"version", version_string()},
                           {"algo", jd.label},
                           {"eta", jd.eta},
                           {"seed", jd.seed_idx},
                           {"stream", jd.stream},
                           {"spec", std::move(spec_echo)}};
  manifest << config_line.dump() << "\n";

  const TargetDensity& target = *problem.target;
  const ExplorationDensity& q0 = *problem.q0;
  const WeightKind kind =
      spec.weights == "effective" ? WeightKind::kEffective : WeightKind::kRaw;

  // Per-seed reference draws (toy targets); shared by every algorithm and
  // eta so comparisons at the same seed are paired.
  WeightedSampleSet reference{problem.dim, {}, {}};
  if (!problem.bayes) {
    RngStream ref_rng(spec.base_seed, reference_stream(jd.seed_idx));
    reference = uniform_sample_set(
        target.reference_sample(static_cast<std::size_t>(spec.ref_size),
                                ref_rng),
        problem.dim);
  }
  const std::uint64_t sw_seed = slicing_seed(spec.base_seed, jd.stream);

  auto evaluate = [&](const WeightedSampleSet& set) -> std::pair<double, double> {
    if (problem.bayes) {
      double acc = predictive_accuracy(set, *problem.test);
      return {acc, acc};
    }
    double sw2 = sliced_w2(set, reference, spec.n_proj, sw_seed, 1);
    return {sw2, std::log(sw2)};
  };

  auto emit_metric = [&](long long used, const WeightedSampleSet& set) {
    auto [primary, value] = evaluate(set);
    metrics << used << "," << jd.seed_idx << "," << format_double(jd.eta)
            << "," << jd.label << "," << format_double(primary);
    ordered_json line{{"type", "checkpoint"},
                      {"budget", used},
                      {"particles", set.size()}};
    if (problem.bayes) {
      line["accuracy"] = primary;
    } else {
      metrics << "," << format_double(value);
      line["sw2"] = primary;
      line["log_sw2"] = value;
    }
    metrics << "\n";
    manifest << line.dump() << "\n";
    result.points.emplace_back(used, value);
  };

  RngStream rng(spec.base_seed, jd.stream);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  };

  if (jd.is_ais) {
    AisConfig ac;
    ac.levels = jd.levels;
    ac.n_mh = spec.ais_mh;
    ac.beta_min = spec.ais_beta_min;
    ac.proposal_scale = spec.ais_proposal_scale;
    if (spec.ais_batch > 0) {
      ac.batch = spec.ais_batch;
    } else {
      // Budget-matched batch under the actual evaluation count
      // batch * K * (n_mh + 1).
      long long per_particle =
          static_cast<long long>(jd.levels) * (spec.ais_mh + 1);
      ac.batch = static_cast<int>(std::max(1ll, spec.budget / per_particle));
    }
    AisResult ais = ais_run(ac, target, q0, rng);
    emit_metric(ais.fu_evals, ais.samples);
    ordered_json line{{"type", "result"},
                      {"budget", ais.fu_evals},
                      {"headline_evals", ais.headline_evals},
                      {"levels", jd.levels},
                      {"ais_batch", ac.batch},
                      {"acceptance", ais.acceptance}};
    manifest << line.dump() << "\n";
    timings << ordered_json{{"type", "total"},
                            {"budget", ais.fu_evals},
                            {"seconds", elapsed()}}
                   .dump()
            << "\n";
    if (spec.dump != "none") {
      write_sample_set_dump_file(ais.samples,
                                 (dir / "particles_final.csv").string());
    }
    return result;
  }

  RunConfig rc;
  rc.algorithm = jd.algo;
  rc.kernel = kernel_family_from_string(spec.kernel);
  rc.eta = jd.eta;
  rc.budget = spec.budget;
  rc.batch = spec.batch;
  rc.schedule = make_schedule_spec(spec, problem.dim);
  manifest << validation_to_json(
                  validate_schedule(rc.schedule, jd.eta, problem.dim))
                  .dump()
           << "\n";

  Checkpoint on_checkpoint = [&](long long used, const ParticleStore& store,
                                 double /*lambda*/) {
    emit_metric(used, store_sample_set(store, target.scale(), kind));
    timings << ordered_json{{"type", "checkpoint"},
                            {"budget", used},
                            {"seconds", elapsed()}}
                   .dump()
            << "\n";
    if (spec.dump == "all") {
      write_particle_dump_file(
          store, target.scale(),
          (dir / ("particles_" + std::to_string(used) + ".csv")).string());
    }
  };

  SamplerRun run = run_sampler(target, q0, rc, rng, spec.checkpoint_every,
                               on_checkpoint, nullptr);
  ordered_json line{{"type", "result"},
                    {"budget", run.used},
                    {"steps", run.steps},
                    {"particles", run.store.size()},
                    {"final_lambda", run.final_lambda}};
  manifest << line.dump() << "\n";
  timings << ordered_json{{"type", "total"},
                          {"budget", run.used},
                          {"steps", run.steps},
                          {"seconds", elapsed()}}
                 .dump()
          << "\n";
  if (spec.dump == "final") {
    write_particle_dump_file(run.store, target.scale(),
                             (dir / "particles_final.csv").string());
  }
  return result;
}

}  // namespace

int run_experiment(const ExperimentSpec& spec) {
  const ProblemSetup problem = build_problem(spec);
  const std::vector<JobDesc> jobs = enumerate_jobs(spec);

  const fs::path out_root(spec.out_dir);
  const fs::path runs_root = out_root / "runs";
  fs::create_directories(runs_root);
  {
    std::ofstream config_out(out_root / "config.json", std::ios::binary);
    if (!config_out) {
      throw io_error("cannot write " + (out_root / "config.json").string());
    }
    config_out << spec_to_json(spec).dump(2) << "\n";
  }

  std::vector<JobResult> results(jobs.size());
  const int workers =
      std::max(1, std::min<int>(spec.jobs, (int)jobs.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      results[i] = run_one_job(spec, problem, jobs[i], runs_root);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= jobs.size()) return;
        {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (first_error) return;
        }
        try {
          results[i] = run_one_job(spec, problem, jobs[i], runs_root);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // Aggregate over seeds per (algorithm instance, eta, budget) in grid
  // order. Plain sum / count so the file is recomputable from the per-run
  // metrics exactly.
  struct Cell {
    double sum = 0.0;
    long long count = 0;
  };
  std::map<std::pair<int, int>, std::map<long long, Cell>> grid;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto& by_budget = grid[{jobs[i].algo_idx, jobs[i].eta_idx}];
    for (const auto& [budget, value] : results[i].points) {
      auto& cell = by_budget[budget];
      cell.sum += value;
      cell.count += 1;
    }
  }
  std::ofstream agg(out_root / "aggregate.csv", std::ios::binary);
  if (!agg) {
    throw io_error("cannot write " + (out_root / "aggregate.csv").string());
  }
  agg << "budget,eta,algo," << (problem.bayes ? "mean_accuracy" : "mean_log_sw2")
      << "\n";
  std::vector<std::pair<int, int>> cells;
  for (const auto& [key, unused] : grid) cells.push_back(key);
  std::sort(cells.begin(), cells.end());
  for (const auto& key : cells) {
    // Recover the label and eta from any job with this (algo, eta) index.
    const JobDesc* sample_job = nullptr;
    for (const auto& jd : jobs) {
      if (jd.algo_idx == key.first && jd.eta_idx == key.second) {
        sample_job = &jd;
        break;
      }
    }
    for (const auto& [budget, cell] : grid[key]) {
      agg << budget << "," << format_double(sample_job->eta) << ","
          << sample_job->label << ","
          << format_double(cell.sum / (double)cell.count) << "\n";
    }
  }
  return (int)jobs.size();
}

}  // namespace midas
