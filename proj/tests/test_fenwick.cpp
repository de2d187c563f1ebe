#include <vector>

#include "doctest.h"
#include "midas/fenwick.hpp"
#include "midas/rng.hpp"

using midas::PrefixSumTree;

TEST_SUITE("fenwick") {

TEST_CASE("prefix sums match a naive accumulator under random appends") {
  midas::RngStream rng(11, 0);
  PrefixSumTree tree;
  std::vector<double> naive;
  for (int i = 0; i < 500; ++i) {
    const double v = rng.uniform01() * 10.0;
    tree.append(v);
    naive.push_back(v);
    REQUIRE(tree.size() == naive.size());
    double s = 0.0;
    for (std::size_t k = 0; k <= naive.size(); ++k) {
      CHECK(tree.prefix_sum(k) == doctest::Approx(s).epsilon(1e-12));
      if (k < naive.size()) s += naive[k];
    }
    CHECK(tree.value(i) == v);
  }
  double total = 0.0;
  for (double v : naive) total += v;
  CHECK(tree.total() == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("find_cumulative inverts the prefix sums") {
  midas::RngStream rng(12, 0);
  PrefixSumTree tree;
  std::vector<double> leaf;
  for (int i = 0; i < 257; ++i) {
    const double v = rng.uniform01() < 0.2 ? 0.0 : rng.uniform01();
    tree.append(v);
    leaf.push_back(v);
  }
  const double total = tree.total();
  for (int t = 0; t < 2000; ++t) {
    const double u = rng.uniform01();
    const std::size_t idx = tree.find_cumulative(u);
    REQUIRE(idx < leaf.size());
    // The selected leaf owns the cumulative interval containing u * total.
    CHECK(leaf[idx] > 0.0);
    CHECK(tree.prefix_sum(idx) <= u * total + 1e-9);
    CHECK(tree.prefix_sum(idx + 1) > u * total - 1e-9);
  }
}

TEST_CASE("find_cumulative at u = 0 picks the first positive leaf") {
  PrefixSumTree tree;
  tree.append(0.0);
  tree.append(0.0);
  tree.append(2.0);
  tree.append(1.0);
  CHECK(tree.find_cumulative(0.0) == 2);
}

TEST_CASE("scale_all multiplies every leaf and every prefix exactly") {
  midas::RngStream rng(13, 0);
  PrefixSumTree tree;
  std::vector<double> leaf;
  for (int i = 0; i < 100; ++i) {
    const double v = rng.uniform01();
    tree.append(v);
    leaf.push_back(v);
  }
  const double c = 0.37;
  std::vector<double> before(leaf.size() + 1);
  for (std::size_t k = 0; k <= leaf.size(); ++k) before[k] = tree.prefix_sum(k);
  tree.scale_all(c);
  for (std::size_t k = 0; k < leaf.size(); ++k)
    CHECK(tree.value(k) == leaf[k] * c);  // exact: one multiply per leaf
  // Prefix sums recombine several scaled nodes, so only near-exact equality
  // survives rounding.
  for (std::size_t k = 1; k <= leaf.size(); ++k)
    CHECK(tree.prefix_sum(k) ==
          doctest::Approx(before[k] * c).epsilon(1e-14));
}

TEST_CASE("negative values and scales are rejected") {
  PrefixSumTree tree;
  CHECK_THROWS_AS(tree.append(-1.0), std::invalid_argument);
  tree.append(1.0);
  CHECK_THROWS_AS(tree.scale_all(-0.5), std::invalid_argument);
}

}  // TEST_SUITE
