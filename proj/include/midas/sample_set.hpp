#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace midas {

enum class WeightKind { kRaw, kEffective };

// Flat row-major collection of weighted points. The common currency between
// samplers, metrics, and CSV I/O.
struct WeightedSampleSet {
  int dim = 0;
  std::vector<double> points;   // size() == n * dim
  std::vector<double> weights;  // size() == n

  std::size_t size() const { return weights.size(); }

  std::span<const double> point(std::size_t i) const {
    return {points.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }

  void append(std::span<const double> x, double w) {
    if (static_cast<int>(x.size()) != dim)
      throw std::invalid_argument("point dimension mismatch");
    points.insert(points.end(), x.begin(), x.end());
    weights.push_back(w);
  }
};

// Equal-weight view over a flat matrix of draws.
inline WeightedSampleSet uniform_sample_set(std::vector<double> points,
                                            int dim) {
  WeightedSampleSet set;
  set.dim = dim;
  set.weights.assign(points.size() / static_cast<std::size_t>(dim), 1.0);
  set.points = std::move(points);
  return set;
}

}  // namespace midas
