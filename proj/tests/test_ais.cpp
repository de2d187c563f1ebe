#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "midas/ais.hpp"
#include "midas/metrics.hpp"
#include "midas/targets.hpp"
#include "support/oracles.hpp"

using midas::AisConfig;
using midas::RngStream;
namespace mt = midas::testing;

TEST_SUITE("ais") {

TEST_CASE("the geometric bridge has constant ratios and fixed endpoints") {
  const auto betas = midas::geometric_schedule(2, 1e-4);
  REQUIRE(betas.size() == 3);
  CHECK(betas[0] == doctest::Approx(1e-4).epsilon(1e-15));
  CHECK(betas[1] == doctest::Approx(1e-2).epsilon(1e-15));
  CHECK(betas[2] == 1.0);

  const auto long_bridge = midas::geometric_schedule(7, 1e-3);
  REQUIRE(long_bridge.size() == 8);
  CHECK(long_bridge.front() == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(long_bridge.back() == 1.0);
  for (std::size_t k = 2; k < long_bridge.size(); ++k)
    CHECK(long_bridge[k] / long_bridge[k - 1] ==
          doctest::Approx(long_bridge[1] / long_bridge[0]).epsilon(1e-12));
  for (std::size_t k = 1; k < long_bridge.size(); ++k)
    CHECK(long_bridge[k] > long_bridge[k - 1]);

  const auto single = midas::geometric_schedule(1, 0.05);
  CHECK(single == std::vector<double>{0.05, 1.0});

  CHECK_THROWS_AS((void)midas::geometric_schedule(0, 1e-4),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)midas::geometric_schedule(5, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)midas::geometric_schedule(5, 1.0),
                  std::invalid_argument);
}

TEST_CASE("every Metropolis step consumes d normals and one uniform") {
  const auto log_density = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s -= 0.5 * v * v;
    return s;
  };
  RngStream rng(501, 0), twin(501, 0);
  std::vector<double> x{0.3, -0.2, 1.0};
  double lp = log_density(x);
  for (int t = 0; t < 50; ++t) {
    (void)midas::rw_metropolis_step(log_density, x, lp, 0.8, rng);
    for (int j = 0; j < 3; ++j) (void)twin.normal();
    (void)twin.uniform01();
  }
  CHECK(rng.uniform01() == twin.uniform01());
  CHECK(lp == log_density(x));
  CHECK_THROWS_AS(
      (void)midas::rw_metropolis_step(log_density, x, lp, 0.0, rng),
      std::invalid_argument);
}

TEST_CASE("the walk holds the documented stationary acceptance rate") {
  const auto log_density = [](std::span<const double> x) {
    return -0.5 * x[0] * x[0];
  };
  RngStream rng(502, 0);
  std::vector<double> x{rng.normal()};
  double lp = log_density(x);
  int accepted = 0;
  const int kSteps = 20000;
  for (int t = 0; t < kSteps; ++t)
    if (midas::rw_metropolis_step(log_density, x, lp, 2.4, rng)) ++accepted;
  // Standard normal target, scale 2.4: exact stationary rate 0.442284...
  const double rate = static_cast<double>(accepted) / kSteps;
  CHECK(rate > 0.40);
  CHECK(rate < 0.48);
}

TEST_CASE("proposals into zero-density regions are always rejected") {
  const auto box = [](std::span<const double> x) {
    return (x[0] >= 0.0 && x[0] <= 1.0)
               ? 0.0
               : -std::numeric_limits<double>::infinity();
  };
  RngStream rng(503, 0);
  std::vector<double> x{0.5};
  double lp = box(x);
  for (int t = 0; t < 200; ++t) {
    (void)midas::rw_metropolis_step(box, x, lp, 100.0, rng);
    CHECK(x[0] >= 0.0);
    CHECK(x[0] <= 1.0);
    CHECK(lp == 0.0);
  }
  // A chain started outside recovers as soon as a proposal lands inside.
  std::vector<double> y{3.0};
  double lpy = box(y);
  REQUIRE(lpy == -std::numeric_limits<double>::infinity());
  bool recovered = false;
  for (int t = 0; t < 200 && !recovered; ++t)
    recovered = midas::rw_metropolis_step(box, y, lpy, 1.0, rng);
  CHECK(recovered);
  CHECK(y[0] >= 0.0);
  CHECK(y[0] <= 1.0);
  CHECK(lpy == 0.0);
}

TEST_CASE("the convenience overload replays the in-place step") {
  const auto log_density = [](std::span<const double> x) {
    return -0.5 * (x[0] * x[0] + x[1] * x[1]);
  };
  const std::vector<double> start{1.0, -2.0};
  RngStream a(504, 0), b(504, 0);
  const auto moved = midas::rw_metropolis_step(log_density, start, 0.7, a);
  std::vector<double> x(start);
  double lp = log_density(x);
  (void)midas::rw_metropolis_step(log_density, x, lp, 0.7, b);
  CHECK(moved == x);
}

TEST_CASE("the annealed run accounts for every density evaluation") {
  const auto target = midas::make_toy_target(midas::ToyTarget::kColdStart, 2);
  const auto q0 = midas::default_exploration(midas::ToyTarget::kColdStart, 2);
  AisConfig config;
  config.levels = 3;
  config.batch = 7;
  config.n_mh = 2;
  RngStream rng(505, 0);
  const auto result = midas::ais_run(config, target, q0, rng);
  CHECK(result.fu_evals == 7 * 3 * (2 + 1));
  CHECK(result.headline_evals == 3 * 7 * 2);
  CHECK(result.samples.size() == 7);
  CHECK(result.samples.dim == 2);
  CHECK(result.log_weights.size() == 7);
  REQUIRE(result.acceptance.size() == 3);
  for (double a : result.acceptance) {
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
  // Weights are exp(log_w - max log_w): the top one is exactly 1.
  double max_w = 0.0;
  for (double w : result.samples.weights) {
    CHECK(w > 0.0);
    CHECK(w <= 1.0);
    max_w = std::max(max_w, w);
  }
  CHECK(max_w == 1.0);

  RngStream replay(505, 0);
  const auto again = midas::ais_run(config, target, q0, replay);
  CHECK(again.log_weights == result.log_weights);
  CHECK(again.samples.points == result.samples.points);

  AisConfig no_moves = config;
  no_moves.n_mh = 0;
  RngStream rng2(506, 0);
  const auto frozen = midas::ais_run(no_moves, target, q0, rng2);
  CHECK(frozen.fu_evals == 7 * 3);
  CHECK(frozen.headline_evals == 0);
  for (double a : frozen.acceptance) CHECK(a == 0.0);

  AisConfig bad = config;
  bad.batch = 0;
  CHECK_THROWS_AS((void)midas::ais_run(bad, target, q0, rng),
                  std::invalid_argument);
  bad = config;
  bad.n_mh = -1;
  CHECK_THROWS_AS((void)midas::ais_run(bad, target, q0, rng),
                  std::invalid_argument);
  const auto q0_wrong =
      midas::default_exploration(midas::ToyTarget::kColdStart, 1);
  CHECK_THROWS_AS((void)midas::ais_run(config, target, q0_wrong, rng),
                  std::invalid_argument);
}

TEST_CASE("annealing reaches the displaced cold-start bulk") {
  const auto target = midas::make_toy_target(midas::ToyTarget::kColdStart, 1);
  const auto q0 = midas::default_exploration(midas::ToyTarget::kColdStart, 1);
  AisConfig config;
  config.levels = 10;
  config.batch = 2000;
  // 20 moves per level: the weighted KS below needs the effective sample
  // size this buys (~200); fewer moves leave the statistic noise-bound.
  config.n_mh = 20;
  RngStream rng(507, 0);
  const auto result = midas::ais_run(config, target, q0, rng);
  const double mean = midas::self_normalized_estimate(
      result.samples, [](std::span<const double> x) { return x[0]; });
  CHECK(mean == doctest::Approx(5.0).epsilon(0.02));
  std::vector<double> values(result.samples.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = result.samples.point(i)[0];
  const double ks = mt::weighted_ks_statistic(
      values, result.samples.weights,
      [](double x) { return mt::normal_cdf(x, 5.0, 0.4); });
  CHECK(ks < 0.08);
}

}  // TEST_SUITE
