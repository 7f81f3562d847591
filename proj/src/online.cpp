#include "coal/online.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "coal/errors.hpp"

namespace coal {

namespace odeint = boost::numeric::odeint;

OnlineRegressor::OnlineRegressor(std::size_t dim, double learning_rate, double initial_accumulator)
    : weights_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))),
      accum_(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), initial_accumulator)),
      learning_rate_(learning_rate) {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(initial_accumulator > 0.0)) throw ConfigError("initial accumulator must be positive");
}

void OnlineRegressor::update(const SparseVector& x, double cost, double weight) {
  if (!std::isfinite(cost) || !std::isfinite(weight)) throw NumericError("non-finite online update");
  if (weight == 0.0) return;

  std::vector<Eigen::Index> idx;
  std::vector<double> xs;
  for (const auto& e : x.entries()) {
    if (e.index >= dimension()) break;
    idx.push_back(static_cast<Eigen::Index>(e.index));
    xs.push_back(e.value);
  }
  const std::size_t n = idx.size();
  if (n == 0) return;

  // state = [G_1..G_n, theta_1..theta_n] over the active features.
  std::vector<double> state(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    state[k] = accum_[idx[k]];
    state[n + k] = weights_[idx[k]];
  }
  const double rate = learning_rate_;
  auto flow = [&](const std::vector<double>& s, std::vector<double>& ds, double /*h*/) {
    double p = 0.0;
    for (std::size_t k = 0; k < n; ++k) p += s[n + k] * xs[k];
    const double r = p - cost;
    for (std::size_t k = 0; k < n; ++k) {
      const double g = 2.0 * r * xs[k];
      ds[k] = g * g;
      ds[n + k] = -rate * g / std::sqrt(s[k]);
    }
  };
  auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<std::vector<double>>());
  odeint::integrate_adaptive(stepper, flow, state, 0.0, weight, weight / 16.0);

  for (std::size_t k = 0; k < n; ++k) {
    accum_[idx[k]] = state[k];
    weights_[idx[k]] = state[n + k];
  }
}

double predict(const OnlineRegressor& g, const SparseVector& x) {
  return std::clamp(g.raw(x), 0.0, 1.0);
}

void online_update(OnlineRegressor& g, const SparseVector& x, double cost, double weight) {
  if (!(cost >= 0.0 && cost <= 1.0)) throw ContractError("online update cost must lie in [0,1]");
  if (!(weight >= 0.0)) throw ContractError("online update weight must be non-negative");
  g.update(x, cost, weight);
}

double sensitivity(const OnlineRegressor& g, const SparseVector& x, double target) {
  double a = 0.0;
  for (const auto& e : x.entries()) {
    if (e.index >= g.dimension()) break;
    a += e.value * e.value / std::sqrt(g.accumulators()[static_cast<Eigen::Index>(e.index)]);
  }
  return 2.0 * g.learning_rate() * std::abs(g.raw(x) - target) * a;
}

double max_importance_weight(double p, double s, double delta) {
  if (!(p > 0.0) || !(s > 0.0)) return 0.0;
  auto objective = [&](double w) {
    const double moved = p - w * s;
    return w * (p * p - moved * moved);
  };
  const double bracket = p / s;
  if (objective(bracket) <= delta) return bracket;
  double lo = 0.0;
  double hi = bracket;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * bracket; ++it) {
    const double mid = 0.5 * (lo + hi);
    (objective(mid) <= delta ? lo : hi) = mid;
  }
  return lo;
}

CostInterval approx_cost_range(const OnlineRegressor& g, const SparseVector& x, double delta) {
  if (!(delta > 0.0)) throw ContractError("radius must be positive");
  const double p = predict(g, x);
  const double s_lo = sensitivity(g, x, 0.0);
  const double s_hi = sensitivity(g, x, 1.0);
  CostInterval out;
  out.lo = std::clamp(p - max_importance_weight(p, s_lo, delta) * s_lo, 0.0, 1.0);
  out.hi = std::clamp(p + max_importance_weight(1.0 - p, s_hi, delta) * s_hi, 0.0, 1.0);
  out.tol = 0.0;
  return out;
}

}  // namespace coal
