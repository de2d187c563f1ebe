#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "midas/errors.hpp"
#include "midas/policy.hpp"
#include "support/oracles.hpp"

using midas::ExplorationDensity;
using midas::KernelFamily;
using midas::MixturePolicy;
using midas::ParticleStore;
using midas::RngStream;
using midas::SubsampledProposal;
namespace mt = midas::testing;

namespace {

// Builds a store and the O(n^2) reference side by side from one random
// history; returns both for comparison.
struct TwinRun {
  ParticleStore store;
  mt::ReferenceStore ref;
  TwinRun(int dim, KernelFamily family, double eta)
      : store(dim, family, eta), ref(eta) {}
};

void drive_random_history(TwinRun& twin, RngStream& rng, int steps,
                          double log_w_scale) {
  std::vector<double> x(twin.store.dim());
  for (int s = 0; s < steps; ++s) {
    const double gamma = 0.05 + 0.9 * rng.uniform01();
    const int batch = 1 + static_cast<int>(rng.uniform_below(4));
    twin.store.begin_step(gamma, batch);
    twin.ref.begin_step(gamma, batch);
    for (int k = 0; k < batch; ++k) {
      for (double& v : x) v = 3.0 * rng.normal();
      const double lw = log_w_scale * rng.normal();
      const double b = 0.2 + rng.uniform01();
      twin.store.insert(x, lw, b);
      twin.ref.insert(lw);
    }
  }
}

}  // namespace

TEST_SUITE("policy") {

TEST_CASE("two unit-weight particles with gamma 1/2 carry the hand-computed "
          "masses") {
  // Step 1 inserts X1, step 2 inserts X2, both with raw weight 1, gamma
  // always 1/2, batch size 1. Directly from the defining product:
  //   W_1 = (1/2) * (1 - 1/2) = 1/4,  W_2 = 1/2,  total = 3/4,
  // selection probabilities (1/3, 2/3).
  for (double eta : {0.3, 1.0}) {
    CAPTURE(eta);
    ParticleStore store(1, KernelFamily::kGaussian, eta);
    store.begin_step(0.5, 1);
    store.insert(std::array{1.0}, 0.0, 1.0);
    store.begin_step(0.5, 1);
    store.insert(std::array{2.0}, 0.0, 1.0);
    CHECK(store.effective_weight(0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(store.effective_weight(1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(store.total_mass() == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(store.selection_probability(0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(store.selection_probability(1) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  }
}

TEST_CASE("gamma = 1/(n+1) telescopes to uniform effective weights") {
  ParticleStore store(1, KernelFamily::kGaussian, 1.0);
  const int kSteps = 40;
  for (int n = 1; n <= kSteps; ++n) {
    store.begin_step(1.0 / (n + 1), 1);
    store.insert(std::array{static_cast<double>(n)}, 0.0, 1.0);
  }
  // W_i = 1/(s+1) * prod_{j=s+1}^{N} j/(j+1) = 1/(N+1) for every particle.
  const double want = 1.0 / (kSteps + 1);
  for (std::size_t i = 0; i < store.size(); ++i) {
    CHECK(store.effective_weight(i) == doctest::Approx(want).epsilon(1e-12));
    CHECK(store.selection_probability(i) ==
          doctest::Approx(1.0 / kSteps).epsilon(1e-12));
  }
}

TEST_CASE("lazy decay matches the direct O(n^2) recursion on random "
          "histories") {
  RngStream rng(101, 0);
  for (double eta : {0.0, 0.3, 1.0}) {
    CAPTURE(eta);
    TwinRun twin(2, KernelFamily::kGaussian, eta);
    drive_random_history(twin, rng, 60, 3.0);
    REQUIRE(twin.store.size() == twin.ref.size());
    const auto probs = twin.ref.probabilities();
    CHECK(twin.store.total_mass() ==
          doctest::Approx(twin.ref.total()).epsilon(1e-10));
    for (std::size_t i = 0; i < twin.store.size(); ++i) {
      CHECK(twin.store.effective_weight(i) ==
            doctest::Approx(twin.ref.weight(i)).epsilon(1e-10));
      CHECK(twin.store.selection_probability(i) ==
            doctest::Approx(probs[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("extreme raw weights trigger rescales without disturbing the "
          "selection law") {
  RngStream rng(102, 0);
  TwinRun twin(1, KernelFamily::kGaussian, 1.0);
  // Alternating +-600 log weights overflow/underflow any direct exp; the
  // reference softmax in log space stays exact.
  std::vector<double> x(1);
  for (int s = 0; s < 30; ++s) {
    twin.store.begin_step(0.3, 1);
    twin.ref.begin_step(0.3, 1);
    x[0] = rng.normal();
    const double lw = (s % 2 == 0 ? 600.0 : -600.0) + rng.normal();
    twin.store.insert(x, lw, 0.5);
    twin.ref.insert(lw);
  }
  const auto probs = twin.ref.probabilities();
  double sum = 0.0;
  for (std::size_t i = 0; i < twin.store.size(); ++i) {
    CHECK(twin.store.selection_probability(i) ==
          doctest::Approx(probs[i]).epsilon(1e-9));
    sum += twin.store.selection_probability(i);
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("eta = 0 makes the selection law independent of the raw weights") {
  ParticleStore a(1, KernelFamily::kGaussian, 0.0);
  ParticleStore b(1, KernelFamily::kGaussian, 0.0);
  RngStream rng(103, 0);
  for (int s = 0; s < 10; ++s) {
    const double gamma = 0.1 + 0.5 * rng.uniform01();
    a.begin_step(gamma, 2);
    b.begin_step(gamma, 2);
    for (int k = 0; k < 2; ++k) {
      const std::array<double, 1> x{rng.normal()};
      a.insert(x, 200.0 * rng.normal(), 1.0);
      b.insert(x, 200.0 * rng.normal(), 1.0);
    }
  }
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a.selection_probability(i) == b.selection_probability(i));
}

TEST_CASE("select draws particles with their exact probabilities") {
  ParticleStore store(1, KernelFamily::kGaussian, 1.0);
  store.begin_step(0.5, 3);
  store.insert(std::array{0.0}, std::log(1.0), 1.0);
  store.insert(std::array{1.0}, std::log(2.0), 1.0);
  store.insert(std::array{2.0}, std::log(5.0), 1.0);
  const int n = 40000;
  std::array<int, 3> counts{0, 0, 0};
  RngStream rng(104, 0);
  for (int t = 0; t < n; ++t) counts[store.select(rng)]++;
  for (std::size_t i = 0; i < 3; ++i) {
    const double p = store.selection_probability(i);
    const double freq = static_cast<double>(counts[i]) / n;
    CHECK(std::abs(freq - p) < 4.0 * std::sqrt(p * (1.0 - p) / n));
  }
}

TEST_CASE("mixture density equals the naive weighted kernel sum") {
  RngStream rng(105, 0);
  for (auto family : {KernelFamily::kGaussian, KernelFamily::kEpanechnikov}) {
    CAPTURE(midas::to_string(family));
    TwinRun twin(2, family, 0.7);
    drive_random_history(twin, rng, 12, 1.0);
    const auto& store = twin.store;
    std::array<double, 2> x;
    for (int t = 0; t < 40; ++t) {
      x = {3.0 * rng.normal(), 3.0 * rng.normal()};
      double naive = 0.0;
      for (std::size_t i = 0; i < store.size(); ++i)
        naive += store.selection_probability(i) *
                 midas::scaled_kernel_density(family, x, store.position(i),
                                              store.bandwidth(i));
      CHECK(store.mixture_density(x) ==
            doctest::Approx(naive).epsilon(1e-10));
    }
  }
}

TEST_CASE("far-away kernel terms are skipped without changing the sum") {
  // The skipped Gaussian term rounds to exactly zero in double arithmetic,
  // so omitting it cannot move the accumulated density.
  ParticleStore both(1, KernelFamily::kGaussian, 1.0);
  both.begin_step(0.5, 2);
  both.insert(std::array{0.0}, 0.0, 0.1);
  both.insert(std::array{500.0}, 0.0, 0.1);

  const std::array<double, 1> x{0.05};
  const double far_term = midas::scaled_kernel_density(
      KernelFamily::kGaussian, x, both.position(1), both.bandwidth(1));
  CHECK(far_term == 0.0);  // a true zero, not merely small
  const double naive =
      both.selection_probability(0) *
      midas::scaled_kernel_density(KernelFamily::kGaussian, x,
                                   both.position(0), both.bandwidth(0));
  CHECK(both.mixture_density(x) == doctest::Approx(naive).epsilon(1e-13));
  // A point far from every particle has exactly zero mixture density.
  CHECK(both.mixture_density(std::array{250.0}) == 0.0);
}

TEST_CASE("renormalize leaves every observable unchanged") {
  RngStream rng(106, 0);
  TwinRun twin(2, KernelFamily::kGaussian, 1.0);
  drive_random_history(twin, rng, 20, 2.0);
  auto& store = twin.store;
  const std::array<double, 2> x{0.4, -0.7};
  const double density = store.mixture_density(x);
  const double mass = store.total_mass();
  std::vector<double> probs(store.size()), weights(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    probs[i] = store.selection_probability(i);
    weights[i] = store.effective_weight(i);
  }
  store.renormalize();
  CHECK(store.mixture_density(x) == doctest::Approx(density).epsilon(1e-12));
  CHECK(store.total_mass() == doctest::Approx(mass).epsilon(1e-12));
  for (std::size_t i = 0; i < store.size(); ++i) {
    CHECK(store.selection_probability(i) ==
          doctest::Approx(probs[i]).epsilon(1e-12));
    CHECK(store.effective_weight(i) ==
          doctest::Approx(weights[i]).epsilon(1e-12));
  }
}

TEST_CASE("store constructor and mutators validate their arguments") {
  CHECK_THROWS_AS(ParticleStore(0, KernelFamily::kGaussian, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ParticleStore(1, KernelFamily::kGaussian, 1.5),
                  std::invalid_argument);
  ParticleStore store(2, KernelFamily::kGaussian, 1.0);
  CHECK_THROWS_AS(store.insert(std::array{0.0, 0.0}, 0.0, 1.0),
                  std::logic_error);
  CHECK_THROWS_AS(store.begin_step(0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(store.begin_step(1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(store.begin_step(0.5, 0), std::invalid_argument);
  store.begin_step(0.5, 1);
  CHECK_THROWS_AS(store.insert(std::array{0.0}, 0.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(store.insert(std::array{0.0, 0.0}, 0.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      store.insert(std::array{0.0, 0.0}, std::nan(""), 1.0),
      std::invalid_argument);
  RngStream rng(1, 0);
  CHECK_THROWS_AS((void)store.select(rng), midas::degenerate_weights_error);
  CHECK_THROWS_AS((void)store.mixture_density(std::array{0.0, 0.0}),
                  midas::degenerate_weights_error);
}

TEST_CASE("full policy density combines q0 and the store mixture") {
  const auto q0 = ExplorationDensity::gaussian({0.0}, {4.0});
  ParticleStore store(1, KernelFamily::kGaussian, 1.0);
  store.begin_step(0.5, 1);
  store.insert(std::array{2.0}, 0.0, 0.5);
  const MixturePolicy policy(store, q0, 0.3);
  const std::array<double, 1> x{1.1};
  const double want =
      0.3 * q0.density(x) + 0.7 * store.mixture_density(x);
  CHECK(policy.density(x) == doctest::Approx(want).epsilon(1e-14));
  CHECK(policy.log_density(x) ==
        doctest::Approx(std::log(want)).epsilon(1e-12));
  CHECK(policy.lambda() == 0.3);

  const MixturePolicy pure_q0(store, q0, 1.0);
  CHECK(pure_q0.density(x) == doctest::Approx(q0.density(x)).epsilon(1e-14));
  const MixturePolicy pure_mix(store, q0, 0.0);
  CHECK(pure_mix.density(x) ==
        doctest::Approx(store.mixture_density(x)).epsilon(1e-14));
}

TEST_CASE("full policy with an empty store is exactly q0") {
  const auto q0 = ExplorationDensity::gaussian({1.0}, {2.0});
  ParticleStore store(1, KernelFamily::kGaussian, 1.0);
  const MixturePolicy policy(store, q0, 1.0);
  const std::array<double, 1> x{0.3};
  CHECK(policy.density(x) == q0.density(x));

  RngStream a(107, 0), b(107, 0);
  std::array<double, 1> out;
  policy.sample(a, out);
  // Replay: one coin, then the q0 draw.
  (void)b.uniform01();
  std::array<double, 1> want;
  q0.sample(b, want);
  CHECK(out[0] == want[0]);

  const MixturePolicy broken(store, q0, 0.0);
  RngStream c(108, 0);
  CHECK_THROWS_AS(broken.sample(c, out), midas::degenerate_weights_error);
}

TEST_CASE("full policy sampling follows the documented draw protocol") {
  const auto q0 = ExplorationDensity::gaussian({0.0, 0.0}, {1.0, 1.0});
  ParticleStore store(2, KernelFamily::kGaussian, 1.0);
  store.begin_step(0.5, 2);
  store.insert(std::array{5.0, 5.0}, 0.0, 0.25);
  store.insert(std::array{-5.0, -5.0}, 1.0, 0.5);
  const MixturePolicy policy(store, q0, 0.4);
  RngStream a(109, 3), b(109, 3);
  std::array<double, 2> out, want;
  for (int t = 0; t < 200; ++t) {
    policy.sample(a, out);
    const double coin = b.uniform01();
    if (coin < 0.4) {
      q0.sample(b, want);
    } else {
      const std::size_t i = store.select(b);
      midas::kernel_sample(KernelFamily::kGaussian, b, want);
      for (int j = 0; j < 2; ++j)
        want[j] = store.position(i)[j] + store.bandwidth(i) * want[j];
    }
    CHECK(out[0] == want[0]);
    CHECK(out[1] == want[1]);
  }
}

TEST_CASE("full policy draws follow the mixture law in one dimension") {
  const auto q0 = ExplorationDensity::gaussian({0.0}, {1.0});
  ParticleStore store(1, KernelFamily::kGaussian, 1.0);
  store.begin_step(0.5, 1);
  store.insert(std::array{2.0}, 0.0, 0.5);
  const MixturePolicy policy(store, q0, 0.3);
  RngStream rng(110, 0);
  const std::size_t n = 50000;
  std::vector<double> draws(n);
  std::array<double, 1> buf;
  for (double& v : draws) {
    policy.sample(rng, buf);
    v = buf[0];
  }
  const double d = mt::ks_statistic(draws, [](double x) {
    return 0.3 * mt::normal_cdf(x) + 0.7 * mt::normal_cdf(x, 2.0, 0.5);
  });
  CHECK(d < mt::ks_threshold(n, 1e-3));
}

TEST_CASE("policy constructors validate lambda and dimensions") {
  const auto q0 = ExplorationDensity::gaussian({0.0}, {1.0});
  ParticleStore store(2, KernelFamily::kGaussian, 1.0);
  CHECK_THROWS_AS(MixturePolicy(store, q0, 0.5), std::invalid_argument);
  ParticleStore ok(1, KernelFamily::kGaussian, 1.0);
  CHECK_THROWS_AS(MixturePolicy(ok, q0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(MixturePolicy(ok, q0, 1.1), std::invalid_argument);
}

TEST_CASE("subsampled proposal consumes exactly ell uniforms to build") {
  const auto q0 = ExplorationDensity::gaussian({0.0}, {1.0});
  ParticleStore store(1, KernelFamily::kGaussian, 1.0);
  store.begin_step(0.5, 3);
  for (int k = 0; k < 3; ++k)
    store.insert(std::array{static_cast<double>(k)}, 0.3 * k, 0.5);
  RngStream a(111, 0), b(111, 0);
  const SubsampledProposal proposal(store, q0, 0.2, 5, a);
  CHECK(proposal.ell() == 5);
  for (int i = 0; i < 5; ++i) (void)b.uniform01();
  for (int i = 0; i < 8; ++i) CHECK(a.uniform01() == b.uniform01());
}

TEST_CASE("subsampled proposal density is the equal-weight blend") {
  const auto q0 = ExplorationDensity::gaussian({0.0, 0.0}, {4.0, 4.0});
  RngStream rng(112, 0);
  for (auto family : {KernelFamily::kGaussian, KernelFamily::kEpanechnikov}) {
    CAPTURE(midas::to_string(family));
    TwinRun twin(2, family, 1.0);
    drive_random_history(twin, rng, 8, 1.0);
    RngStream build(113, 0), replay(113, 0);
    const double lambda = 0.25;
    const SubsampledProposal proposal(twin.store, q0, lambda, 7, build);
    // Reconstruct the chosen centers through the twin stream.
    std::vector<std::size_t> chosen;
    for (int k = 0; k < 7; ++k) chosen.push_back(twin.store.select(replay));
    std::array<double, 2> x;
    for (int t = 0; t < 30; ++t) {
      x = {3.0 * rng.normal(), 3.0 * rng.normal()};
      double mix = 0.0;
      for (const std::size_t i : chosen)
        mix += midas::scaled_kernel_density(family, x, twin.store.position(i),
                                            twin.store.bandwidth(i));
      const double want = (1.0 - lambda) * mix / 7.0 + lambda * q0.density(x);
      CHECK(proposal.density(x) == doctest::Approx(want).epsilon(1e-12));
      CHECK(proposal.log_density(x) ==
            doctest::Approx(std::log(want)).epsilon(1e-12));
    }
  }
}

TEST_CASE("subsampled proposal sampling follows the documented protocol") {
  const auto q0 = ExplorationDensity::gaussian({0.0}, {9.0});
  ParticleStore store(1, KernelFamily::kGaussian, 1.0);
  store.begin_step(0.5, 2);
  store.insert(std::array{4.0}, 0.0, 0.3);
  store.insert(std::array{-4.0}, 0.5, 0.6);
  RngStream build_a(114, 0), build_b(114, 0);
  const SubsampledProposal proposal(store, q0, 0.35, 3, build_a);
  std::vector<std::size_t> chosen;
  for (int k = 0; k < 3; ++k) chosen.push_back(store.select(build_b));

  RngStream a(115, 0), b(115, 0);
  std::array<double, 1> out, want;
  for (int t = 0; t < 200; ++t) {
    proposal.sample(a, out);
    const double coin = b.uniform01();
    if (coin < 0.35) {
      q0.sample(b, want);
    } else {
      const std::size_t k = b.uniform_below(3);
      midas::kernel_sample(KernelFamily::kGaussian, b, want);
      want[0] = store.position(chosen[k])[0] +
                store.bandwidth(chosen[k]) * want[0];
    }
    CHECK(out[0] == want[0]);
  }
}

TEST_CASE("subsampled proposal rejects bad construction") {
  const auto q0 = ExplorationDensity::gaussian({0.0}, {1.0});
  ParticleStore empty(1, KernelFamily::kGaussian, 1.0);
  RngStream rng(116, 0);
  CHECK_THROWS_AS(SubsampledProposal(empty, q0, 0.5, 3, rng),
                  midas::degenerate_weights_error);
  ParticleStore store(1, KernelFamily::kGaussian, 1.0);
  store.begin_step(0.5, 1);
  store.insert(std::array{0.0}, 0.0, 1.0);
  CHECK_THROWS_AS(SubsampledProposal(store, q0, 0.5, 0, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(SubsampledProposal(store, q0, 1.5, 1, rng),
                  std::invalid_argument);
}

}  // TEST_SUITE
