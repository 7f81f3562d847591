#include "coal/regression_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "coal/errors.hpp"

namespace coal {

LinearRegressor::LinearRegressor(Eigen::VectorXd weights, double norm_bound)
    : weights_(std::move(weights)), norm_bound_(norm_bound) {
  if (!(norm_bound_ > 0.0)) throw ConfigError("norm bound must be positive");
}

LinearRegressor LinearRegressor::zero(std::size_t dim, double norm_bound) {
  return LinearRegressor(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)), norm_bound);
}

double predict(const LinearRegressor& g, const SparseVector& x) {
  return std::clamp(g.raw(x), 0.0, 1.0);
}

QuadraticForm::QuadraticForm(std::size_t dim)
    : A(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))),
      b(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))) {}

void QuadraticForm::add_point(const SparseVector& x, double target, double weight) {
  if (weight == 0.0) return;
  const auto entries = x.entries();
  const auto d = dimension();
  for (std::size_t p = 0; p < entries.size() && entries[p].index < d; ++p) {
    const auto i = static_cast<Eigen::Index>(entries[p].index);
    const double wi = weight * entries[p].value;
    b[i] += wi * target;
    for (std::size_t q = 0; q < entries.size() && entries[q].index < d; ++q) {
      A(i, static_cast<Eigen::Index>(entries[q].index)) += wi * entries[q].value;
    }
  }
  constant += weight * target * target;
}

double QuadraticForm::value(const Eigen::VectorXd& theta) const {
  return theta.dot(A * theta) - 2.0 * b.dot(theta) + constant;
}

Eigen::VectorXd minimize_in_ball(const QuadraticForm& q, double bound) {
  const auto d = static_cast<Eigen::Index>(q.dimension());
  if (!q.A.allFinite() || !q.b.allFinite() || !std::isfinite(q.constant)) {
    throw NumericError("non-finite least-squares system");
  }
  if (d == 0) return Eigen::VectorXd();
  if (q.b.squaredNorm() == 0.0) return Eigen::VectorXd::Zero(d);

  Eigen::MatrixXd ridged = q.A;
  ridged.diagonal().array() += kRidge;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(ridged);
  if (ldlt.info() == Eigen::Success) {
    Eigen::VectorXd theta = ldlt.solve(q.b);
    if (theta.allFinite() && theta.norm() <= bound) return theta;
  }

  // Boundary solution theta(lambda) = (A + lambda I)^{-1} b, ||theta(lambda)|| decreasing in lambda.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ridged);
  const Eigen::VectorXd alpha = es.eigenvalues().cwiseMax(kRidge);
  const Eigen::VectorXd beta = es.eigenvectors().transpose() * q.b;
  auto norm_at = [&](double lambda) {
    return (beta.array() / (alpha.array() + lambda)).matrix().norm();
  };
  double lo = 0.0;
  double hi = q.b.norm() / bound;  // ||theta(hi)|| <= ||b|| / hi = bound
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (norm_at(mid) > bound ? lo : hi) = mid;
  }
  Eigen::VectorXd theta = es.eigenvectors() * (beta.array() / (alpha.array() + hi)).matrix();
  const double n = theta.norm();
  if (n > bound) theta *= bound / n;
  return theta;
}

LinearRegressor fit_weighted(std::span<const WeightedPoint> points, double bound, std::size_t dim) {
  if (dim == 0) {
    for (const auto& p : points) dim = std::max(dim, p.features.dimension());
  }
  QuadraticForm q(dim);
  for (const auto& p : points) {
    if (!std::isfinite(p.target) || !std::isfinite(p.weight)) throw NumericError("non-finite weighted point");
    if (p.weight < 0.0) throw ContractError("negative weight in weighted least squares");
    q.add_point(p.features, p.target, p.weight);
  }
  return LinearRegressor(minimize_in_ball(q, bound), bound);
}

LabelState::LabelState(Label label, std::size_t dim) : label_(label), dim_(dim), totals_(dim) {}

void LabelState::add_point(std::size_t round, SparseVector x, double cost) {
  if (!points_.empty() && round <= points_.back().round) {
    throw ContractError("queried rounds must be strictly increasing");
  }
  totals_.add_point(x, cost, 1.0);
  points_.push_back({round, std::move(x), cost});
}

void LabelState::append_ledger(std::size_t round, double erm_risk, double delta) {
  if (!ledger_.empty() && round <= ledger_.back().round) {
    throw ContractError("ledger rounds must be strictly increasing");
  }
  ledger_.push_back({round, erm_risk, delta, erm_risk + delta, points_before(round)});
}

std::size_t LabelState::points_before(std::size_t round) const {
  const auto it = std::lower_bound(points_.begin(), points_.end(), round,
                                   [](const QueriedPoint& p, std::size_t r) { return p.round < r; });
  return static_cast<std::size_t>(it - points_.begin());
}

double LabelState::risk(const Eigen::VectorXd& theta, std::size_t round) const {
  if (round <= 1) return 0.0;
  const auto n = points_before(round);
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = points_[k].features.dot(theta) - points_[k].cost;
    s += r * r;
  }
  return s / static_cast<double>(round - 1);
}

void LabelState::ledger_risks(const Eigen::VectorXd& theta, std::vector<double>& out) const {
  // Prefix sums of squared residuals, then one division per ledger entry.
  thread_local std::vector<double> prefix;
  prefix.assign(points_.size() + 1, 0.0);
  for (std::size_t k = 0; k < points_.size(); ++k) {
    const double r = points_[k].features.dot(theta) - points_[k].cost;
    prefix[k + 1] = prefix[k] + r * r;
  }
  out.resize(ledger_.size());
  for (std::size_t j = 0; j < ledger_.size(); ++j) {
    const auto& e = ledger_[j];
    out[j] = e.round <= 1 ? 0.0 : prefix[e.prefix_points] / static_cast<double>(e.round - 1);
  }
}

bool LabelState::satisfies_ledger(const Eigen::VectorXd& theta, double slack) const {
  std::vector<double> risks;
  ledger_risks(theta, risks);
  for (std::size_t j = 0; j < ledger_.size(); ++j) {
    if (risks[j] > ledger_[j].delta_tilde + slack) return false;
  }
  return true;
}

double empirical_risk(const LinearRegressor& g, const LabelState& state, std::size_t round) {
  return state.risk(g.weights(), round);
}

LinearRegressor erm(const LabelState& state, std::size_t round, double bound) {
  const auto n = state.points_before(round);
  if (n == state.points().size()) {
    return LinearRegressor(minimize_in_ball(state.totals(), bound), bound);
  }
  QuadraticForm q(state.dimension());
  for (std::size_t k = 0; k < n; ++k) q.add_point(state.points()[k].features, state.points()[k].cost, 1.0);
  return LinearRegressor(minimize_in_ball(q, bound), bound);
}

}  // namespace coal
