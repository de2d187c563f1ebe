#include "midas/logistic.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include "midas/errors.hpp"

namespace midas {

namespace {

constexpr double kLogTwoPi = 1.83787706640934548356065947281;

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

double log_sigmoid(double t) {
  return t >= 0.0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t));
}

TargetDensity logistic_posterior(const LabeledDataset& data, double prior_a,
                                 double prior_b) {
  if (!(prior_a > 0.0) || !(prior_b > 0.0))
    throw std::invalid_argument("prior shape and rate must be positive");
  if (data.size() == 0) throw std::invalid_argument("empty dataset");
  const auto shared = std::make_shared<const LabeledDataset>(data);
  const int p = shared->n_features;
  const int dim = p + 1;
  const double a = prior_a;
  const double b = prior_b;
  // Constant pieces of the prior: a log b - lgamma(a) - (p/2) log 2pi.
  const double prior_const =
      a * std::log(b) - std::lgamma(a) - 0.5 * p * kLogTwoPi;

  auto log_core = [shared, p, a, b, prior_const](
                      std::span<const double> theta) -> double {
    const double* w = theta.data();
    const double s = theta[static_cast<std::size_t>(p)];
    const double es = std::exp(s);
    if (!std::isfinite(es)) return -std::numeric_limits<double>::infinity();

    double ll = 0.0;
    const std::size_t rows = shared->size();
    for (std::size_t i = 0; i < rows; ++i) {
      const auto z = shared->row(i);
      double dot = 0.0;
      for (int j = 0; j < p; ++j)
        dot += w[j] * z[static_cast<std::size_t>(j)];
      ll += log_sigmoid(static_cast<double>(shared->labels[i]) * dot);
    }

    double norm_w = 0.0;
    for (int j = 0; j < p; ++j) norm_w += w[j] * w[j];
    const double prior =
        prior_const + a * s - b * es + 0.5 * p * s - 0.5 * es * norm_w;
    return ll + prior;
  };

  return TargetDensity(dim, std::move(log_core));
}

ExplorationDensity logistic_exploration(int dim) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  const std::vector<double> loc(static_cast<std::size_t>(dim), 0.0);
  const std::vector<double> shape(static_cast<std::size_t>(dim), 25.0);
  return ExplorationDensity::student_t(loc, shape, 3.0);
}

double posterior_predict(const WeightedSampleSet& particles,
                         std::span<const double> z) {
  if (particles.size() == 0)
    throw degenerate_weights_error("no particles");
  if (particles.dim != static_cast<int>(z.size()) + 1)
    throw std::invalid_argument(
        "particle dimension must be feature count + 1");
  const int p = static_cast<int>(z.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const double wgt = particles.weights[i];
    if (wgt < 0.0) throw std::invalid_argument("negative particle weight");
    if (wgt == 0.0) continue;
    const auto theta = particles.point(i);
    double dot = 0.0;
    for (int j = 0; j < p; ++j)
      dot += theta[static_cast<std::size_t>(j)] * z[static_cast<std::size_t>(j)];
    num += wgt * sigmoid(dot);
    den += wgt;
  }
  if (!(den > 0.0))
    throw degenerate_weights_error("particle weights sum to zero");
  return num / den;
}

double predictive_accuracy(const WeightedSampleSet& particles,
                           const LabeledDataset& test) {
  if (test.size() == 0) throw std::invalid_argument("empty test set");
  if (particles.size() == 0)
    throw degenerate_weights_error("no particles");
  if (particles.dim != test.n_features + 1)
    throw std::invalid_argument(
        "particle dimension must be feature count + 1");
  const int p = test.n_features;
  const std::size_t n = particles.size();
  const std::size_t rows = test.size();

  // One pass per particle over a block of rows keeps both the particle and
  // the block hot in cache; per-row predictive numerators accumulate across
  // particles, the weight total once.
  double den = 0.0;
  std::vector<double> num(rows, 0.0);
  constexpr std::size_t kBlock = 256;
  for (std::size_t r0 = 0; r0 < rows; r0 += kBlock) {
    const std::size_t r1 = std::min(rows, r0 + kBlock);
    for (std::size_t i = 0; i < n; ++i) {
      const double wgt = particles.weights[i];
      if (wgt < 0.0) throw std::invalid_argument("negative particle weight");
      if (wgt == 0.0) continue;
      const double* theta =
          particles.points.data() + i * static_cast<std::size_t>(p + 1);
      if (r0 == 0) den += wgt;
      for (std::size_t r = r0; r < r1; ++r) {
        const auto z = test.row(r);
        double dot = 0.0;
        for (int j = 0; j < p; ++j)
          dot += theta[j] * z[static_cast<std::size_t>(j)];
        num[r] += wgt * sigmoid(dot);
      }
    }
  }
  if (!(den > 0.0))
    throw degenerate_weights_error("particle weights sum to zero");

  std::size_t hits = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double prob = num[r] / den;
    const int predicted = prob >= 0.5 ? 1 : -1;
    if (predicted == test.labels[r]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rows);
}

}  // namespace midas
