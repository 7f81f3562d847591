#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "coal/cost_range.hpp"
#include "coal/sparse_vector.hpp"

namespace coal {

// Online least-squares regressor with per-feature AdaGrad rates.
//
// An update with importance weight w follows the gradient flow of h -> (p - c)^2 for h in [0, w]:
//   dtheta_k/dh = -rate * 2 (p - c) x_k / sqrt(G_k),   dG_k/dh = (2 (p - c) x_k)^2,
// so the squared-gradient accumulators G integrate over the weight mass as well. Splitting w into
// pieces and applying them in sequence lands on the same state (up to integration error).
class OnlineRegressor {
 public:
  OnlineRegressor() = default;
  OnlineRegressor(std::size_t dim, double learning_rate, double initial_accumulator = 1.0);

  std::size_t dimension() const { return static_cast<std::size_t>(weights_.size()); }
  double learning_rate() const { return learning_rate_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& accumulators() const { return accum_; }

  double raw(const SparseVector& x) const { return x.dot(weights_); }

  void update(const SparseVector& x, double cost, double weight);

 private:
  Eigen::VectorXd weights_;
  Eigen::VectorXd accum_;
  double learning_rate_ = 0.5;
};

// Clamped to [0,1].
double predict(const OnlineRegressor& g, const SparseVector& x);

// Deterministic in-place update; weight 0 is a no-op. Requires cost in [0,1], weight >= 0.
void online_update(OnlineRegressor& g, const SparseVector& x, double cost, double weight);

// |d/dw raw prediction on x after online_update(g, x, target, w)| at w = 0:
// 2 * rate * |p - target| * sum_k x_k^2 / sqrt(G_k).
double sensitivity(const OnlineRegressor& g, const SparseVector& x, double target);

// Largest w in (0, bracket] with w * (p^2 - (p - w s)^2) <= delta, by bisection. The objective
// is increasing on (0, p/s], so bracket = p/s; returns bracket when its objective is within budget.
double max_importance_weight(double p, double s, double delta);

// Online cost range: lo = p - w_lo s(x,0), hi = p + w_hi s(x,1), both clamped to [0,1].
CostInterval approx_cost_range(const OnlineRegressor& g, const SparseVector& x, double delta);

}  // namespace coal
