#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace coal {

struct FeatureEntry {
  std::size_t index;
  double value;

  friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

// Sparse feature vector with strictly increasing indices and no stored zeros.
class SparseVector {
 public:
  SparseVector() = default;

  // Sorts by index, sums duplicates and drops entries that end up zero.
  // Throws NumericError on non-finite values.
  static SparseVector from_entries(std::vector<FeatureEntry> entries);

  std::span<const FeatureEntry> entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // One past the largest stored index (0 when empty).
  std::size_t dimension() const;

  double squared_norm() const;

  // Inner product with a dense vector; indices beyond weights.size() contribute 0.
  double dot(const Eigen::VectorXd& weights) const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::vector<FeatureEntry> entries_;
};

}  // namespace coal
