#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "coal/data_model.hpp"
#include "coal/sparse_vector.hpp"

namespace coal {

inline constexpr double kDefaultNormBound = 10.0;
// Added to the normal equations so rank-deficient designs still solve.
inline constexpr double kRidge = 1e-12;

// x -> <w, x> with ||w||_2 <= norm_bound.
class LinearRegressor {
 public:
  LinearRegressor() = default;
  LinearRegressor(Eigen::VectorXd weights, double norm_bound);

  static LinearRegressor zero(std::size_t dim, double norm_bound = kDefaultNormBound);

  const Eigen::VectorXd& weights() const { return weights_; }
  double norm_bound() const { return norm_bound_; }
  std::size_t dimension() const { return static_cast<std::size_t>(weights_.size()); }

  // Unclamped inner product; risks and oracle objectives use this.
  double raw(const SparseVector& x) const { return x.dot(weights_); }

 private:
  Eigen::VectorXd weights_;
  double norm_bound_ = kDefaultNormBound;
};

// Reported cost prediction, clamped to [0,1].
double predict(const LinearRegressor& g, const SparseVector& x);

struct WeightedPoint {
  SparseVector features;
  double target = 0.0;
  double weight = 0.0;
};

// sum_k w_k (<theta, x_k> - c_k)^2 expanded as theta' A theta - 2 b' theta + constant.
struct QuadraticForm {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  double constant = 0.0;

  QuadraticForm() = default;
  explicit QuadraticForm(std::size_t dim);

  std::size_t dimension() const { return static_cast<std::size_t>(b.size()); }
  void add_point(const SparseVector& x, double target, double weight);
  double value(const Eigen::VectorXd& theta) const;
};

// argmin of q over the ball ||theta|| <= bound. The unconstrained normal equations are tried
// first; when their solution leaves the ball the boundary solution is found from the
// eigendecomposition of A by solving ||(A + lambda I)^{-1} b|| = bound for lambda.
Eigen::VectorXd minimize_in_ball(const QuadraticForm& q, double bound);

// Weighted least squares over the norm ball. dim == 0 infers the dimension from the points.
// An empty point set (or all-zero weights) yields the zero regressor.
LinearRegressor fit_weighted(std::span<const WeightedPoint> points, double bound, std::size_t dim = 0);

struct QueriedPoint {
  std::size_t round;
  SparseVector features;
  double cost;
};

// One version-space constraint R_j(g) <= delta_tilde_j recorded at round j.
struct LedgerEntry {
  std::size_t round;
  double erm_risk;
  double delta;
  double delta_tilde;
  // Number of queried points with round < this entry's round.
  std::size_t prefix_points;
};

// Query history and constraint ledger for one label.
class LabelState {
 public:
  LabelState() = default;
  LabelState(Label label, std::size_t dim);

  Label label() const { return label_; }
  std::size_t dimension() const { return dim_; }
  std::span<const QueriedPoint> points() const { return points_; }
  std::span<const LedgerEntry> ledger() const { return ledger_; }

  // Sufficient statistics of all queried points so far.
  const QuadraticForm& totals() const { return totals_; }

  // Rounds must be strictly increasing across calls.
  void add_point(std::size_t round, SparseVector x, double cost);
  // Records R_round(g_round) and the radius; delta_tilde = erm_risk + delta.
  void append_ledger(std::size_t round, double erm_risk, double delta);

  std::size_t points_before(std::size_t round) const;

  // R_round(theta) = (1/(round-1)) sum_{queried j < round} (<theta, x_j> - c_j)^2, 0 at round 1.
  double risk(const Eigen::VectorXd& theta, std::size_t round) const;

  // risk(theta, entry.round) for every ledger entry, in ledger order.
  void ledger_risks(const Eigen::VectorXd& theta, std::vector<double>& out) const;

  bool satisfies_ledger(const Eigen::VectorXd& theta, double slack = 0.0) const;

 private:
  Label label_ = 0;
  std::size_t dim_ = 0;
  std::vector<QueriedPoint> points_;
  std::vector<LedgerEntry> ledger_;
  QuadraticForm totals_;
};

double empirical_risk(const LinearRegressor& g, const LabelState& state, std::size_t round);

// Minimizer of R_round(.; y) over the ball, using the queried points with round < `round`.
LinearRegressor erm(const LabelState& state, std::size_t round, double bound);

}  // namespace coal
