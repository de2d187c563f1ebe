#include "midas/schedule.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace midas {

double PowerLawTerm::operator()(long long n) const {
  if (n < 1) throw std::invalid_argument("schedule step must be >= 1");
  double v = coef;
  if (exponent != 0.0)
    v *= std::pow(static_cast<double>(n) + shift, -exponent);
  if (log_exponent != 0.0)
    v *= std::pow(std::log(log_scale * static_cast<double>(n) + log_shift),
                  -log_exponent);
  return v;
}

ScheduleSpec Schedule::default_spec(int dim, int batch) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (batch < 1) throw std::invalid_argument("batch must be >= 1");
  const double d = static_cast<double>(dim);
  const double m = static_cast<double>(batch);
  const double beta = 1.0 / (4.0 + d);
  ScheduleSpec spec;
  spec.gamma = PowerLawTerm::power(1.0, 1.0, 10.0);
  // (0.4/sqrt d)(mn/1e4 + 1)^-beta == coef (n + 1e4/m)^-beta with
  // coef = (0.4/sqrt d)(m/1e4)^-beta.
  spec.bandwidth = PowerLawTerm::power(
      0.4 / std::sqrt(d) * std::pow(m / 1e4, -beta), beta, 1e4 / m);
  spec.lambda = PowerLawTerm::inverse_log(1.0, m, 10.0);
  spec.ell_exponent = 0.5;
  return spec;
}

ScheduleValues Schedule::at(long long n) const {
  ScheduleValues v;
  v.gamma = spec_.gamma(n);
  v.bandwidth = spec_.bandwidth(n);
  v.lambda = n <= spec_.burnin_steps ? spec_.burnin_lambda : spec_.lambda(n);
  double e = std::ceil(spec_.ell_exponent == 0.5
                           ? std::sqrt(static_cast<double>(n))
                           : std::pow(static_cast<double>(n),
                                      spec_.ell_exponent));
  v.ell = e < 1.0 ? 1 : static_cast<long long>(e);
  return v;
}

std::string to_string(ValidationStatus status) {
  switch (status) {
    case ValidationStatus::kPass:
      return "pass";
    case ValidationStatus::kFail:
      return "fail";
    default:
      return "indeterminate";
  }
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Whether term(n) is eventually decreasing with limit 0.
bool decreasing_to_zero(const PowerLawTerm& t) {
  if (!(t.coef > 0.0)) return false;
  if (t.exponent > 0.0) return true;
  return t.exponent == 0.0 && t.log_exponent > 0.0;
}

}  // namespace

ValidationReport validate_schedule(const ScheduleSpec& spec, double eta,
                                   int dim) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::invalid_argument("eta must lie in (0, 1]");

  ValidationReport report;
  report.status = ValidationStatus::kPass;
  auto add = [&report](const std::string& name, bool pass,
                       const std::string& detail) {
    report.checks.push_back({name, pass, detail});
    if (!pass && report.status == ValidationStatus::kPass) {
      report.status = ValidationStatus::kFail;
      report.reason = name + ": " + detail;
    }
  };
  auto indeterminate = [&report](const std::string& why) {
    report.status = ValidationStatus::kIndeterminate;
    report.reason = why;
    return report;
  };

  const PowerLawTerm& g = spec.gamma;
  const PowerLawTerm& b = spec.bandwidth;
  const PowerLawTerm& l = spec.lambda;

  // Supported families: gamma may carry a log factor, bandwidth must be a
  // pure power law, lambda is either a pure power law or a pure inverse log.
  if (!(g.coef > 0.0) || !(b.coef > 0.0) || !(l.coef > 0.0))
    return indeterminate("sequence coefficients must be positive");
  if (b.log_exponent != 0.0)
    return indeterminate("bandwidth with a log factor is unsupported");
  if (l.exponent != 0.0 && l.log_exponent != 0.0)
    return indeterminate(
        "lambda must be a pure power law or a pure inverse log");
  if (g.exponent == 1.0 && g.log_exponent != 0.0)
    return indeterminate(
        "gamma ~ 1/n with a log correction is outside the sufficient "
        "condition");

  add("gamma decreasing to 0", decreasing_to_zero(g),
      decreasing_to_zero(g) ? "limit 0" : "gamma does not decrease to 0");
  add("bandwidth decreasing to 0", decreasing_to_zero(b),
      decreasing_to_zero(b) ? "limit 0" : "bandwidth does not decrease to 0");
  add("lambda decreasing to 0", decreasing_to_zero(l),
      decreasing_to_zero(l) ? "limit 0" : "lambda does not decrease to 0");

  const double alpha = g.exponent;
  // Lower bound n^-1 <= C gamma_n: gamma may not decay faster than 1/n.
  {
    const bool pass =
        alpha < 1.0 || (alpha == 1.0 && g.log_exponent <= 0.0);
    add("gamma lower bound n^-1 <= C gamma_n", pass,
        pass ? "decay no faster than 1/n"
             : "gamma decays faster than 1/n (alpha = " + fmt(alpha) + ")");
  }
  // Successive differences: gamma_n - gamma_{n+1} <= gamma_n gamma_{n+1}
  // eventually. For alpha < 1 the difference is of strictly smaller order
  // than the product; at alpha = 1 the remark's sufficient condition needs
  // C > 1, except that C/(n+s) with C = 1, s > 0 telescopes exactly.
  {
    bool pass;
    std::string detail;
    if (alpha < 1.0) {
      pass = true;
      detail = "difference of smaller order than the product (alpha < 1)";
    } else if (alpha == 1.0) {
      if (g.coef > 1.0) {
        pass = true;
        detail = "alpha = 1 with C > 1";
      } else if (g.coef == 1.0 && g.shift > 0.0) {
        pass = true;
        detail = "1/(n+s) telescopes exactly: difference equals product";
      } else {
        pass = false;
        detail = "sufficient condition requires C > 1 when alpha = 1";
      }
    } else {
      pass = false;
      detail = "alpha > 1 already violates the lower bound";
    }
    add("gamma successive-difference condition", pass, detail);
  }
  // Summability of gamma^2: poly exponent 2 alpha, log exponent
  // 2 log_exponent.
  {
    const bool pass = 2.0 * alpha > 1.0 ||
                      (2.0 * alpha == 1.0 && 2.0 * g.log_exponent > 1.0);
    add("sum gamma^2 finite", pass,
        pass ? "2 alpha = " + fmt(2.0 * alpha)
             : "sum gamma^2 diverges (2 alpha = " + fmt(2.0 * alpha) + ")");
  }
  // Ratio condition. Write every sequence as n^-p log^-q n; the ratio is
  //   n^(1 - 2 p_g + A) log^(1 - 2 q_g + B) n
  // with (A, B) the denominator exponents, and must tend to 0.
  {
    const double pg = g.exponent, qg = g.log_exponent;
    const double pb = b.exponent, qb = b.log_exponent;
    const double pl = l.exponent, ql = l.log_exponent;
    const double d = static_cast<double>(dim);
    double poly, logexp;
    if (eta >= 0.5) {
      report.branch = "eta >= 1/2: n gamma^2 log n / (lambda b^d)";
      poly = 1.0 - 2.0 * pg + pl + d * pb;
      logexp = 1.0 - 2.0 * qg + ql + d * qb;
    } else {
      report.branch =
          "eta < 1/2: n gamma^2 log n / (lambda^{2(1-eta)} b^{2d(1-eta)})";
      const double two1e = 2.0 * (1.0 - eta);
      poly = 1.0 - 2.0 * pg + two1e * (pl + d * pb);
      logexp = 1.0 - 2.0 * qg + two1e * (ql + d * qb);
    }
    const bool pass = poly < 0.0 || (poly == 0.0 && logexp < 0.0);
    add("learning-rate ratio vanishes", pass,
        "net exponents: poly " + fmt(poly) + ", log " + fmt(logexp) +
            (pass ? " (ratio -> 0)" : " (ratio does not vanish)"));
  }

  return report;
}

}  // namespace midas
