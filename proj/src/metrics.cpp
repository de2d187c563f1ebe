#include "midas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "midas/errors.hpp"
#include "midas/rng.hpp"

namespace midas {

StepQuantile::StepQuantile(std::vector<double> values,
                           std::vector<double> weights) {
  if (values.size() != weights.size())
    throw std::invalid_argument("values and weights differ in length");
  if (values.empty())
    throw degenerate_weights_error("empty weighted measure");

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i]) || std::isnan(weights[i]))
      throw std::invalid_argument("NaN in weighted measure");
    if (weights[i] < 0.0)
      throw std::invalid_argument("negative weight in measure");
    total += weights[i];
  }
  if (!(total > 0.0) || !std::isfinite(total))
    throw degenerate_weights_error("weights do not sum to a positive value");
  std::sort(order.begin(), order.end(), [&values](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });

  double running = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double v = values[order[k]];
    const double w = weights[order[k]];
    if (w == 0.0) continue;
    running += w;
    // Clamped into [previous, 1] so rounding in running/total can never
    // break monotonicity of the knots.
    double c = std::min(running / total, 1.0);
    if (!values_.empty() && values_.back() == v) {
      cum_.back() = std::max(c, cum_.back());
    } else {
      if (!cum_.empty()) c = std::max(c, cum_.back());
      values_.push_back(v);
      cum_.push_back(c);
    }
  }
  cum_.back() = 1.0;
}

double StepQuantile::operator()(double u) const {
  if (!(u >= 0.0 && u <= 1.0))
    throw std::invalid_argument("quantile level must lie in [0, 1]");
  const auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
  const std::size_t idx =
      it == cum_.end() ? cum_.size() - 1
                       : static_cast<std::size_t>(it - cum_.begin());
  return values_[idx];
}

StepQuantile weighted_quantile(std::vector<double> values,
                               std::vector<double> weights) {
  return StepQuantile(std::move(values), std::move(weights));
}

double w2_squared_1d(const StepQuantile& mu, const StepQuantile& nu) {
  const auto& va = mu.values();
  const auto& ca = mu.cum();
  const auto& vb = nu.values();
  const auto& cb = nu.cum();
  std::size_t i = 0, j = 0;
  double prev = 0.0;
  double acc = 0.0;
  while (i < va.size() && j < vb.size()) {
    const double p = std::min(ca[i], cb[j]);
    const double diff = va[i] - vb[j];
    acc += (p - prev) * diff * diff;
    prev = p;
    if (ca[i] <= p) ++i;
    if (cb[j] <= p) ++j;
  }
  return acc;
}

double w2_1d(const StepQuantile& mu, const StepQuantile& nu) {
  return std::sqrt(w2_squared_1d(mu, nu));
}

namespace {

// Projects the set onto the unit direction drawn from substream (seed, k)
// and returns the squared 1D W2 between the projections.
double directional_w2_squared(const WeightedSampleSet& a,
                              const WeightedSampleSet& b, std::uint64_t seed,
                              std::uint64_t k) {
  const int d = a.dim;
  RngStream rng(seed, k);
  std::vector<double> theta(static_cast<std::size_t>(d));
  double norm = 0.0;
  do {
    rng.fill_normal(theta);
    norm = 0.0;
    for (double t : theta) norm += t * t;
  } while (!(norm > 0.0));
  norm = std::sqrt(norm);
  for (double& t : theta) t /= norm;

  auto project = [d, &theta](const WeightedSampleSet& s) {
    std::vector<double> out(s.size());
    const double* p = s.points.data();
    for (std::size_t i = 0; i < s.size(); ++i) {
      double dot = 0.0;
      for (int j = 0; j < d; ++j) dot += theta[static_cast<std::size_t>(j)] * p[j];
      out[i] = dot;
      p += d;
    }
    return out;
  };
  const StepQuantile qa(project(a), a.weights);
  const StepQuantile qb(project(b), b.weights);
  return w2_squared_1d(qa, qb);
}

}  // namespace

double sliced_w2(const WeightedSampleSet& a, const WeightedSampleSet& b,
                 int n_proj, std::uint64_t seed, int jobs) {
  if (a.dim != b.dim)
    throw std::invalid_argument("sample sets differ in dimension");
  if (a.dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (n_proj < 1) throw std::invalid_argument("n_proj must be >= 1");
  if (a.size() == 0 || b.size() == 0)
    throw degenerate_weights_error("empty sample set");

  std::vector<double> per_direction(static_cast<std::size_t>(n_proj));
  if (jobs <= 1) {
    for (int k = 0; k < n_proj; ++k)
      per_direction[static_cast<std::size_t>(k)] =
          directional_w2_squared(a, b, seed, static_cast<std::uint64_t>(k));
  } else {
    const int workers = std::min(jobs, n_proj);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (int k = w; k < n_proj; k += workers)
          per_direction[static_cast<std::size_t>(k)] = directional_w2_squared(
              a, b, seed, static_cast<std::uint64_t>(k));
      });
    }
    for (auto& t : pool) t.join();
  }
  // Fixed-order reduction keeps the result independent of the job count.
  double acc = 0.0;
  for (double v : per_direction) acc += v;
  return acc / static_cast<double>(n_proj);
}

double self_normalized_estimate(
    const WeightedSampleSet& samples,
    const std::function<double(std::span<const double>)>& h) {
  if (samples.size() == 0)
    throw degenerate_weights_error("empty sample set");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double w = samples.weights[i];
    if (w < 0.0) throw std::invalid_argument("negative weight");
    if (w == 0.0) continue;
    num += w * h(samples.point(i));
    den += w;
  }
  if (!(den > 0.0))
    throw degenerate_weights_error("weights do not sum to a positive value");
  return num / den;
}

CltDiagnostic clt_diagnostic(
    const std::function<WeightedSampleSet(int)>& make_run,
    const std::function<double(std::span<const double>)>& h, int repetitions,
    long long n, double mu_h, double sigma2_h) {
  if (repetitions < 20)
    throw std::invalid_argument(
        "clt_diagnostic needs at least 20 repetitions");
  const double root_n = std::sqrt(static_cast<double>(n));
  std::vector<double> errors;
  errors.reserve(static_cast<std::size_t>(repetitions));
  for (int r = 0; r < repetitions; ++r) {
    const WeightedSampleSet run = make_run(r);
    errors.push_back(root_n * (self_normalized_estimate(run, h) - mu_h));
  }
  double mean = 0.0;
  for (double e : errors) mean += e;
  mean /= static_cast<double>(repetitions);
  double var = 0.0;
  for (double e : errors) var += (e - mean) * (e - mean);
  var /= static_cast<double>(repetitions - 1);
  return {var, sigma2_h};
}

GridDistance grid_distance(
    const std::function<double(std::span<const double>)>& density_a,
    const std::function<double(std::span<const double>)>& density_b,
    std::span<const double> lo, std::span<const double> hi,
    int points_per_dim) {
  const std::size_t d = lo.size();
  if (d == 0 || hi.size() != d)
    throw std::invalid_argument("box bounds differ in dimension");
  if (d > 2)
    throw unsupported_error("grid distances are limited to d <= 2");
  if (points_per_dim < 1)
    throw std::invalid_argument("points_per_dim must be >= 1");
  for (std::size_t j = 0; j < d; ++j)
    if (!(lo[j] < hi[j]))
      throw std::invalid_argument("empty box: lo must be < hi");

  const double n = static_cast<double>(points_per_dim);
  double sup = 0.0, l1 = 0.0;
  if (d == 1) {
    const double h = (hi[0] - lo[0]) / n;
    double x;
    std::span<const double> pt(&x, 1);
    for (int i = 0; i < points_per_dim; ++i) {
      x = lo[0] + (static_cast<double>(i) + 0.5) * h;
      const double diff = std::abs(density_a(pt) - density_b(pt));
      sup = std::max(sup, diff);
      l1 += diff * h;
    }
  } else {
    const double hx = (hi[0] - lo[0]) / n;
    const double hy = (hi[1] - lo[1]) / n;
    double xy[2];
    std::span<const double> pt(xy, 2);
    for (int i = 0; i < points_per_dim; ++i) {
      xy[0] = lo[0] + (static_cast<double>(i) + 0.5) * hx;
      for (int j = 0; j < points_per_dim; ++j) {
        xy[1] = lo[1] + (static_cast<double>(j) + 0.5) * hy;
        const double diff = std::abs(density_a(pt) - density_b(pt));
        sup = std::max(sup, diff);
        l1 += diff * hx * hy;
      }
    }
  }
  return {sup, l1};
}

}  // namespace midas
