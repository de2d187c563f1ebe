#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace midas {

// Append-only binary indexed tree over nonnegative leaf values. Supports
// O(log n) append, prefix sums and cumulative inverse lookup, plus an O(n)
// multiplicative rescale of every leaf. Leaves are kept alongside the tree
// so exact per-leaf values stay available.
class PrefixSumTree {
 public:
  std::size_t size() const noexcept { return leaf_.size(); }
  bool empty() const noexcept { return leaf_.empty(); }

  double value(std::size_t i) const { return leaf_.at(i); }

  // Sum of all leaves, as accumulated by the tree.
  double total() const { return prefix_sum(leaf_.size()); }

  // Sum of leaves [0, count).
  double prefix_sum(std::size_t count) const {
    double s = 0.0;
    for (std::size_t j = count; j > 0; j -= j & (~j + 1)) s += tree_[j];
    return s;
  }

  void append(double v) {
    if (!(v >= 0.0))
      throw std::invalid_argument("PrefixSumTree: values must be >= 0");
    leaf_.push_back(v);
    const std::size_t idx = leaf_.size();  // 1-based position of the new leaf
    double t = v;
    const std::size_t low = idx & (~idx + 1);
    for (std::size_t j = 1; j < low; j <<= 1) t += tree_[idx - j];
    tree_.push_back(t);
  }

  // Multiplies every leaf (and every internal node, exactly) by c >= 0.
  void scale_all(double c) {
    if (!(c >= 0.0))
      throw std::invalid_argument("PrefixSumTree: scale must be >= 0");
    for (double& v : leaf_) v *= c;
    for (std::size_t j = 1; j < tree_.size(); ++j) tree_[j] *= c;
  }

  // Smallest index i with prefix_sum(i+1) > u * total(). Requires a
  // positive total; u must lie in [0, 1).
  std::size_t find_cumulative(double u) const {
    double rem = u * total();
    std::size_t pos = 0;
    std::size_t step = 1;
    while ((step << 1) <= leaf_.size()) step <<= 1;
    for (; step > 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next <= leaf_.size() && tree_[next] <= rem) {
        pos = next;
        rem -= tree_[next];
      }
    }
    // pos counts leaves whose cumulative sum is <= the target, so pos is
    // the selected index; guard the (measure-zero) u*total == total case.
    if (pos >= leaf_.size()) pos = leaf_.size() - 1;
    while (pos > 0 && leaf_[pos] == 0.0) --pos;
    return pos;
  }

 private:
  // tree_[j] covers the leaf range (j - lowbit(j), j], 1-based; tree_[0]
  // is a dummy so indices line up.
  std::vector<double> tree_{0.0};
  std::vector<double> leaf_;
};

}  // namespace midas
