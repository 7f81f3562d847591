#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "coal/cost_range.hpp"
#include "coal/data_model.hpp"
#include "coal/regression_oracle.hpp"

namespace coal {

// Generated feature layout (file indices; index 0 is reserved for the bias added by with_bias):
//   1..K        one-hot cluster id; the cluster fixes the best label
//   K+1..2K     tsybakov only: the example's margin, in the slot of its cluster
//   rest        continuous features in [-1,1], each present with probability 1/2
struct NoiseSpec {
  enum class Kind { massart, tsybakov };
  Kind kind = Kind::massart;
  double tau = 0.2;  // massart
  double tau0 = 0.5;  // tsybakov: CDF min{beta m^alpha, 1} on [0, tau0]
  double alpha = 1.0;
  double beta = 1.0;

  static NoiseSpec massart(double tau);
  static NoiseSpec tsybakov(double tau0, double alpha, double beta);
  // Throws ConfigError.
  void validate() const;
};

enum class CostNoise { bernoulli, none };

// f*(x; y) = <weights[y], x> over biased features (bias at index 0).
struct GroundTruth {
  std::vector<Eigen::VectorXd> weights;
  CostNoise noise = CostNoise::bernoulli;

  std::size_t num_labels() const { return weights.size(); }
  double expected_cost(const SparseVector& biased, Label y) const;
  std::vector<double> expected_costs(const SparseVector& biased) const;
  Label best_label(const SparseVector& biased) const;
  // Gap between the runner-up and the best expected cost.
  double margin(const SparseVector& biased) const;
};

// x with a 1.0 at index 0. Throws ConfigError if x already uses index 0.
SparseVector with_bias(const SparseVector& x);

struct SyntheticStream {
  // Features without the bias slot, ready for write_dataset.
  std::vector<LabeledExample> examples;
  GroundTruth truth;
};

// Requires dim >= K (dim >= 2K for tsybakov). dim counts the non-bias features.
// Deterministic given all arguments.
SyntheticStream gen_stream(std::size_t num_labels, std::size_t dim, const NoiseSpec& spec, std::size_t n,
                           std::uint64_t seed, CostNoise noise = CostNoise::bernoulli);

// Extremes of the raw prediction at x over the grid members that satisfy every ledger constraint
// (exactly, no slack). Returns an interval with empty = true when none does.
CostInterval brute_force_cost_range(std::span<const Eigen::VectorXd> grid, const LabelState& state,
                                    const SparseVector& x);

}  // namespace coal
