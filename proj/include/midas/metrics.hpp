#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "midas/sample_set.hpp"

namespace midas {

// Quantile function of a weighted discrete measure on R: sorted support
// values with right-continuous cumulative weights (the last one forced to
// exactly 1). operator() is the generalized inverse CDF.
class StepQuantile {
 public:
  StepQuantile(std::vector<double> values, std::vector<double> weights);

  double operator()(double u) const;

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& cum() const { return cum_; }

 private:
  std::vector<double> values_;  // sorted, ties merged
  std::vector<double> cum_;     // nondecreasing, cum_.back() == 1
};

StepQuantile weighted_quantile(std::vector<double> values,
                               std::vector<double> weights);

// Exact 1D Wasserstein-2 distance (with the root): the quantile difference
// is integrated piecewise over the merged knot set, no discretization.
double w2_1d(const StepQuantile& mu, const StepQuantile& nu);
// The squared distance, same integral without the root.
double w2_squared_1d(const StepQuantile& mu, const StepQuantile& nu);

// Monte Carlo sliced Wasserstein: the average over n_proj random directions
// (normalized Gaussian draws) of the SQUARED 1D W2 between the projected
// measures. No outer root; curves report the log of this value. Direction k
// uses the dedicated substream (seed, k), so results are independent of
// jobs, which only controls how many threads share the projection work.
double sliced_w2(const WeightedSampleSet& a, const WeightedSampleSet& b,
                 int n_proj, std::uint64_t seed, int jobs = 1);

// Self-normalized importance sampling estimate sum w h(X) / sum w.
double self_normalized_estimate(
    const WeightedSampleSet& samples,
    const std::function<double(std::span<const double>)>& h);

// CLT diagnostic: runs R independent replications through make_run, forms
// sqrt(n) (estimate - mu_h) for each, and returns the sample variance of
// those rescaled errors next to the asymptotic variance sigma2_h the caller
// computed analytically or by quadrature. Fewer than 20 repetitions is
// refused as meaningless.
struct CltDiagnostic {
  double empirical_var;
  double target_var;
  double ratio() const { return empirical_var / target_var; }
};

CltDiagnostic clt_diagnostic(
    const std::function<WeightedSampleSet(int)>& make_run,
    const std::function<double(std::span<const double>)>& h, int repetitions,
    long long n, double mu_h, double sigma2_h);

// Sup and Riemann L1 distance between two densities over a midpoint grid on
// the box [lo, hi], points_per_dim cells per axis. Dimensions above 2 are
// unsupported.
struct GridDistance {
  double sup_abs;
  double l1;
};

GridDistance grid_distance(
    const std::function<double(std::span<const double>)>& density_a,
    const std::function<double(std::span<const double>)>& density_b,
    std::span<const double> lo, std::span<const double> hi,
    int points_per_dim);

}  // namespace midas
