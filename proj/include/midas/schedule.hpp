#pragma once

#include <string>
#include <vector>

namespace midas {

// One tuning sequence as a shifted power law with an optional log factor:
//
//   term(n) = coef * (n + shift)^(-exponent)
//                  * log(log_scale * n + log_shift)^(-log_exponent)
//
// Every schedule this project uses (and every family the validator accepts)
// fits this shape: 1/(n+10) is {coef 1, exponent 1, shift 10}, the paper's
// bandwidth (0.4/sqrt d)(mn/1e4 + 1)^(-1/(4+d)) folds m into coef and shift,
// and 1/log(mn+10) is {log_exponent 1, log_scale m, log_shift 10}.
struct PowerLawTerm {
  double coef = 1.0;
  double exponent = 0.0;
  double shift = 0.0;
  double log_exponent = 0.0;
  double log_scale = 1.0;
  double log_shift = 0.0;

  double operator()(long long n) const;

  static PowerLawTerm constant(double c) { return {c, 0, 0, 0, 1, 0}; }
  static PowerLawTerm power(double c, double alpha, double shift = 0.0) {
    return {c, alpha, shift, 0, 1, 0};
  }
  static PowerLawTerm inverse_log(double c, double scale, double shift) {
    return {c, 0, 0, 1, scale, shift};
  }
};

struct ScheduleSpec {
  PowerLawTerm gamma;
  PowerLawTerm bandwidth;
  PowerLawTerm lambda;
  // Subsample count: ell_n = ceil(n^ell_exponent).
  double ell_exponent = 0.5;
  // Burn-in: enlarged first batch, elevated lambda for the first steps. A
  // burnin_steps of 0 disables the lambda override; burnin_batch applies to
  // step 1 only.
  int burnin_batch = 2000;
  double burnin_lambda = 0.5;
  long long burnin_steps = 10;
};

struct ScheduleValues {
  double gamma;
  double bandwidth;
  double lambda;
  long long ell;
};

// Evaluates the tuning sequences at step n >= 1; the burn-in lambda
// override (lambda = burnin_lambda for n <= burnin_steps) is applied here.
// batch_at reports the batch size including the enlarged first step.
class Schedule {
 public:
  explicit Schedule(ScheduleSpec spec) : spec_(spec) {}

  // Defaults for dimension d and batch size m:
  //   gamma_n  = 1/(n+10)
  //   b_n      = (0.4/sqrt d) (mn/1e4 + 1)^(-1/(4+d))
  //   lambda_n = 1/log(mn+10), 0.5 during the first 10 steps
  //   ell_n    = ceil(sqrt n)
  // with a first batch of 2000.
  static ScheduleSpec default_spec(int dim, int batch);

  ScheduleValues at(long long n) const;
  int batch_at(long long n, int batch) const {
    return n == 1 ? spec_.burnin_batch : batch;
  }
  const ScheduleSpec& spec() const { return spec_; }

 private:
  ScheduleSpec spec_;
};

// Stationarity conditions on the tuning sequences, decided by exponent
// arithmetic with log factors tracked symbolically.
//
// For gamma ~ C n^-alpha the checks require alpha in (1/2, 1) with any
// C > 0, or alpha = 1 with C > 1; the shifted family C/(n+s) with C = 1 and
// s > 0 also passes because successive differences then telescope exactly
// against the product gamma_n gamma_{n+1}. The final check is the
// eta-dependent ratio
//
//   n gamma^2 log n / (lambda b^d)                          (eta >= 1/2)
//   n gamma^2 log n / (lambda^{2(1-eta)} b^{2d(1-eta)})     (eta <  1/2)
//
// which must vanish: with every sequence ~ n^-p log^-q n the ratio is a
// power law again, and the report records its net exponents.
enum class ValidationStatus { kPass, kFail, kIndeterminate };

struct ScheduleCheck {
  std::string name;
  bool pass;
  std::string detail;
};

struct ValidationReport {
  ValidationStatus status;
  std::string reason;  // first violated condition; empty on pass
  std::string branch;  // which eta branch the ratio check used
  std::vector<ScheduleCheck> checks;

  bool pass() const { return status == ValidationStatus::kPass; }
};

ValidationReport validate_schedule(const ScheduleSpec& spec, double eta,
                                   int dim);

std::string to_string(ValidationStatus status);

}  // namespace midas
