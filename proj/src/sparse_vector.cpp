#include "coal/sparse_vector.hpp"

#include <algorithm>
#include <cmath>

#include "coal/errors.hpp"

namespace coal {

SparseVector SparseVector::from_entries(std::vector<FeatureEntry> entries) {
  for (const auto& e : entries) {
    if (!std::isfinite(e.value)) {
      throw NumericError("non-finite feature value at index " + std::to_string(e.index));
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const FeatureEntry& a, const FeatureEntry& b) { return a.index < b.index; });

  SparseVector out;
  out.entries_.reserve(entries.size());
  for (const auto& e : entries) {
    if (!out.entries_.empty() && out.entries_.back().index == e.index) {
      out.entries_.back().value += e.value;
    } else {
      out.entries_.push_back(e);
    }
  }
  std::erase_if(out.entries_, [](const FeatureEntry& e) { return e.value == 0.0; });
  return out;
}

std::size_t SparseVector::dimension() const {
  return entries_.empty() ? 0 : entries_.back().index + 1;
}

double SparseVector::squared_norm() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.value * e.value;
  return s;
}

double SparseVector::dot(const Eigen::VectorXd& weights) const {
  const auto n = static_cast<std::size_t>(weights.size());
  double s = 0.0;
  for (const auto& e : entries_) {
    if (e.index >= n) break;
    s += weights[static_cast<Eigen::Index>(e.index)] * e.value;
  }
  return s;
}

}  // namespace coal
