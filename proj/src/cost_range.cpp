#include "coal/cost_range.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coal/errors.hpp"

namespace coal {

void RadiusSchedule::validate() const {
  if (!(delta_prob > 0.0 && delta_prob <= std::exp(-1.0))) {
    throw ConfigError("failure probability delta must lie in (0, 1/e]");
  }
  if (dim == 0) throw ConfigError("radius schedule needs a positive dimension");
  if (num_labels == 0) throw ConfigError("radius schedule needs at least one label");
  if (mode == RadiusMode::theory) {
    if (!(kappa >= 2.0)) throw ConfigError("kappa must be at least 2 in theory mode");
    if (horizon == 0) throw ConfigError("theory-mode radius needs a positive horizon n");
  } else if (!(mellowness > 0.0)) {
    throw ConfigError("mellowness must be positive");
  }
}

double log_factor(std::size_t n, std::size_t dim, std::size_t num_labels, double delta_prob) {
  const double nn = static_cast<double>(n);
  const double d = static_cast<double>(dim);
  const double k = static_cast<double>(num_labels);
  return 324.0 * (d * std::log(nn) + std::log(8.0 * k * std::exp(1.0) * (d + 1.0) * nn * nn / delta_prob));
}

double radius(std::size_t round, const RadiusSchedule& sched) {
  if (round == 0) throw ContractError("rounds are numbered from 1");
  if (sched.mode == RadiusMode::theory) {
    if (round == 1) return sched.kappa;
    const double eps = log_factor(sched.horizon, sched.dim, sched.num_labels, sched.delta_prob);
    return sched.kappa * std::min(eps / static_cast<double>(round - 1), 1.0);
  }
  // No prefix at round 1; the mellowness plays kappa's role with the min{.,1} saturated.
  if (round == 1) return sched.mellowness;
  const double eps = log_factor(round - 1, sched.dim, sched.num_labels, sched.delta_prob);
  return sched.mellowness * eps / static_cast<double>(round - 1);
}

double query_threshold(std::size_t round) {
  if (round == 0) throw ContractError("rounds are numbered from 1");
  return 1.0 / std::sqrt(static_cast<double>(round));
}

MwConfig make_mw_config(std::size_t constraints, double delta, double tol, const MwOptions& options) {
  MwConfig cfg;
  cfg.constraints = std::max<std::size_t>(constraints, 1);
  cfg.early_exit = options.early_exit;
  cfg.keep_iterates = options.keep_iterates;
  cfg.widths = options.widths;
  const double logm = std::log(static_cast<double>(cfg.constraints));
  const double ratio = options.t_constant / delta;
  const double t = logm * ratio * ratio / std::pow(tol, 4.0);
  const double capped = std::min(static_cast<double>(std::max<std::size_t>(options.t_max, 1)), std::ceil(t));
  cfg.iterations = static_cast<std::size_t>(std::max(1.0, std::isfinite(capped) ? capped : 1.0));
  cfg.eta = std::sqrt(logm / static_cast<double>(cfg.iterations));
  return cfg;
}

double mw_slack(const MwConfig& cfg, double rho) {
  return 2.0 * rho * std::sqrt(std::log(static_cast<double>(cfg.constraints)) / static_cast<double>(cfg.iterations));
}

std::vector<double> mw_widths(const LabelState& state, MwWidths mode) {
  const auto ledger = state.ledger();
  std::vector<double> w;
  w.reserve(ledger.size() + 1);
  if (mode == MwWidths::bounded || ledger.empty()) {
    w.push_back(2.0);
    for (const auto& e : ledger) w.push_back(e.delta + 1.0);
  } else {
    w.push_back(ledger.back().delta);
    for (const auto& e : ledger) w.push_back(e.delta);
  }
  return w;
}

namespace {

QuadraticForm separation_form(std::span<const double> mu, double target, const SparseVector& x,
                              const LabelState& state, std::vector<double>& acc) {
  const auto points = state.points();
  const auto ledger = state.ledger();
  acc.assign(points.size() + 1, 0.0);
  for (std::size_t k = 0; k < ledger.size(); ++k) {
    const auto& e = ledger[k];
    if (e.round > 1) acc[e.prefix_points] += mu[1 + k] / static_cast<double>(e.round - 1);
  }
  QuadraticForm q(state.dimension());
  q.add_point(x, target, mu[0]);
  // Point p-1 belongs to every prefix of length >= p.
  double weight = 0.0;
  for (std::size_t p = points.size(); p >= 1; --p) {
    weight += acc[p];
    q.add_point(points[p - 1].features, points[p - 1].cost, weight);
  }
  return q;
}

// Version-space members seen so far, keeping the ones with the largest and smallest prediction.
struct MemberTracker {
  struct Member {
    bool found = false;
    double pred = 0.0;
    Eigen::VectorXd theta;
    std::vector<double> risks;
  };
  Member high;
  Member low;

  bool is_member(const LabelState& state, const std::vector<double>& risks) const {
    const auto ledger = state.ledger();
    for (std::size_t j = 0; j < ledger.size(); ++j) {
      if (risks[j] > ledger[j].delta_tilde) return false;
    }
    return true;
  }

  // Returns true when theta is a member.
  bool offer(const LabelState& state, const Eigen::VectorXd& theta, double pred, const std::vector<double>& risks) {
    if (!is_member(state, risks)) return false;
    if (!high.found || pred > high.pred) high = {true, pred, theta, risks};
    if (!low.found || pred < low.pred) low = {true, pred, theta, risks};
    return true;
  }

  bool offer(const LabelState& state, const Eigen::VectorXd& theta, const SparseVector& x) {
    std::vector<double> risks;
    state.ledger_risks(theta, risks);
    return offer(state, theta, x.dot(theta), risks);
  }

  const Member& toward(double target) const { return target > 0.5 ? high : low; }

  // Pulls an approximately feasible point into the version space by mixing it with the anchor member.
  void offer_mixed(const LabelState& state, const Eigen::VectorXd& theta, const SparseVector& x, double target) {
    const Member& anchor = toward(target);
    std::vector<double> risks;
    state.ledger_risks(theta, risks);
    if (offer(state, theta, x.dot(theta), risks) || !anchor.found) return;
    const auto ledger = state.ledger();
    double lambda = 0.0;
    for (std::size_t j = 0; j < ledger.size(); ++j) {
      const double violation = risks[j] - ledger[j].delta_tilde;
      if (violation <= 0.0) continue;
      const double slack = ledger[j].delta_tilde - anchor.risks[j];
      if (slack <= 0.0) return;
      lambda = std::max(lambda, violation / (violation + slack));
    }
    lambda = std::min(1.0, lambda * (1.0 + 1e-9) + 1e-12);
    const Eigen::VectorXd mixed = (1.0 - lambda) * theta + lambda * anchor.theta;
    offer(state, mixed, x);
  }
};

// theta(s) = argmin s (g(x) - target)^2 + sum_j mu_j R_j(g) moves toward the target as s grows.
// Bisects s = u/(1-u) for the last member on that path and offers what it finds to the tracker.
// Every point on the path is also a Lagrangian minimizer, so it yields the weak-duality bound
// (g_s(x) - target)^2 + sum_j (mu_j/s)(R_j(g_s) - Delta~_j) on the squared distance of any member;
// the largest one is returned.
double path_search(std::span<const double> mu, double target, const SparseVector& x, const LabelState& state,
                   double bound, MemberTracker& tracker, std::size_t& calls) {
  const auto ledger = state.ledger();
  std::vector<double> w(mu.begin(), mu.end());
  std::vector<double> acc;
  std::vector<double> risks;
  double best_lower = 0.0;
  auto member_at = [&](double u) {
    const double s = u / (1.0 - u);
    w[0] = s;
    ++calls;
    const Eigen::VectorXd theta = minimize_in_ball(separation_form(w, target, x, state, acc), bound);
    const double pred = x.dot(theta);
    state.ledger_risks(theta, risks);
    if (s > 0.0) {
      double slack = 0.0;
      double scale = 1.0;
      for (std::size_t j = 0; j < ledger.size(); ++j) {
        slack += w[1 + j] * (risks[j] - ledger[j].delta_tilde);
        scale += w[1 + j] * ledger[j].delta_tilde;
      }
      const double lower = (pred - target) * (pred - target) + (slack - 1e-9 * scale) / s;
      best_lower = std::max(best_lower, lower);
    }
    return tracker.offer(state, theta, pred, risks);
  };
  const bool start_member = member_at(0.0);
  double lo = 0.0;
  double hi = 1.0 - 1e-12;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (member_at(mid)) {
      lo = mid;
    } else {
      hi = mid;
      if (!start_member && it > 8) break;
    }
  }
  return best_lower;
}

MwResult run_mw(double c, double target, const SparseVector& x, const LabelState& state, double bound,
                const MwConfig& cfg, MemberTracker* tracker) {
  const auto ledger = state.ledger();
  const std::size_t m = ledger.size() + 1;
  std::vector<double> mu(m, 1.0);
  const std::vector<double> widths = mw_widths(state, cfg.widths);
  std::vector<double> acc;
  std::vector<double> risks;

  MwResult result;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(state.dimension()));
  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    const Eigen::VectorXd theta = minimize_in_ball(separation_form(mu, target, x, state, acc), bound);
    ++result.iterations;
    const double pred = x.dot(theta);
    const double objective = (pred - target) * (pred - target);
    state.ledger_risks(theta, risks);

    double lhs = mu[0] * objective;
    double rhs = mu[0] * c;
    for (std::size_t j = 0; j < ledger.size(); ++j) {
      lhs += mu[1 + j] * risks[j];
      rhs += mu[1 + j] * ledger[j].delta_tilde;
    }
    if (mu[0] > 0.0) {
      const double budget = rhs - mu[0] * c;
      const double margin = 1e-9 * std::max(1.0, std::abs(rhs));
      result.lower_bound = std::max(result.lower_bound, (lhs - budget - margin) / mu[0]);
    }
    // theta minimizes the weighted objective, so exceeding the weighted budget rules out every g.
    if (lhs > rhs + 1e-9 * std::max(1.0, std::abs(rhs))) {
      result.feasible = false;
      result.weights = mu;
      return result;
    }

    const bool member = tracker ? tracker->offer(state, theta, pred, risks)
                                : MemberTracker{}.is_member(state, risks);
    if (member && objective <= c && cfg.early_exit) {
      result.feasible = true;
      result.exact_witness = true;
      result.average = theta;
      result.weights = mu;
      if (cfg.keep_iterates) result.iterates.push_back(theta);
      return result;
    }

    sum += theta;
    if (cfg.keep_iterates) result.iterates.push_back(theta);

    auto step = [&](double gain, double width) {
      return 1.0 - cfg.eta * std::clamp(gain / width, -1.0, 1.0);
    };
    mu[0] *= step(c - objective, widths[0]);
    double top = mu[0];
    for (std::size_t j = 0; j < ledger.size(); ++j) {
      mu[1 + j] *= step(ledger[j].delta_tilde - risks[j], widths[1 + j]);
      top = std::max(top, mu[1 + j]);
    }
    // The oracle and the certificate are invariant to rescaling mu.
    if (top > 0.0) {
      for (double& v : mu) v /= top;
    }
  }
  result.feasible = true;
  result.average = sum / static_cast<double>(result.iterations);
  result.weights = std::move(mu);
  return result;
}

CostBound search(const SparseVector& x, const LabelState& state, double tol, const CostRangeOptions& options,
                 double target, MemberTracker& tracker) {
  if (!(tol > 0.0 && tol <= 1.0)) throw ContractError("cost-range tolerance must lie in (0,1]");
  const double bound = options.norm_bound;
  const bool is_max = target > 0.5;
  CostBound out;

  auto to_cost = [&](double c) { return is_max ? 1.0 - std::sqrt(c) : std::sqrt(c); };
  auto finish_exact = [&](double pred) {
    out.value = std::clamp(pred, 0.0, 1.0);
    out.tol = 0.0;
    out.c_lo = out.c_hi = std::min(1.0, (pred - target) * (pred - target));
    out.certified = true;
    return out;
  };
  auto beyond_target = [&](double pred) { return is_max ? pred >= 1.0 : pred <= 0.0; };

  // The minimizer of the objective alone settles the question when it is a member.
  {
    QuadraticForm q(state.dimension());
    q.add_point(x, target, 1.0);
    const Eigen::VectorXd theta = minimize_in_ball(q, bound);
    ++out.oracle_calls;
    if (tracker.offer(state, theta, x)) return finish_exact(x.dot(theta));
  }
  if (tracker.toward(target).found && beyond_target(tracker.toward(target).pred)) {
    return finish_exact(tracker.toward(target).pred);
  }

  const MwConfig cfg =
      make_mw_config(state.ledger().size() + 1, state.ledger().empty() ? 1.0 : state.ledger().back().delta, tol,
                     options.mw);
  const auto widths = mw_widths(state, cfg.widths);
  out.mw_slack = mw_slack(cfg, *std::max_element(widths.begin(), widths.end()));

  double c_lo = 0.0;
  double c_hi = 1.0;
  auto tighten_hi = [&] {
    if (!tracker.toward(target).found) return false;
    const double pred = tracker.toward(target).pred;
    if (beyond_target(pred)) return true;
    c_hi = std::min(c_hi, (pred - target) * (pred - target));
    return false;
  };
  {
    std::vector<double> uniform(state.ledger().size() + 1, 1.0);
    c_lo = std::max(c_lo, path_search(uniform, target, x, state, bound, tracker, out.oracle_calls));
  }
  if (tighten_hi()) return finish_exact(tracker.toward(target).pred);
  // The certified answer is 1 - sqrt(c_lo) (or sqrt(c_lo)); once a member sits within tol/2 of it in
  // cost units, further halving of the bracket cannot change the guarantee.
  auto certified_gap = [&] {
    const auto& best = tracker.toward(target);
    if (!best.found) return 1.0;
    return std::abs(std::clamp(to_cost(c_lo), 0.0, 1.0) - std::clamp(best.pred, 0.0, 1.0));
  };
  while (c_hi - c_lo > tol * tol / 2.0 && certified_gap() > tol / 2.0) {
    const double c = 0.5 * (c_lo + c_hi);
    const MwResult r = run_mw(c, target, x, state, bound, cfg, &tracker);
    out.oracle_calls += r.iterations;
    // Weak duality certifies everything below the best Lagrangian bound, not just below c.
    c_lo = std::max(c_lo, std::min(r.lower_bound, c_hi));
    if (!r.feasible) {
      c_lo = std::max(c_lo, c);
    } else {
      c_hi = std::min(c_hi, c);
      if (!r.exact_witness) tracker.offer_mixed(state, r.average, x, target);
    }
    c_lo = std::max(c_lo, std::min(c_hi, path_search(r.weights, target, x, state, bound, tracker, out.oracle_calls)));
    if (tighten_hi()) return finish_exact(tracker.toward(target).pred);
  }
  out.c_lo = c_lo;
  out.c_hi = c_hi;
  out.value = std::clamp(to_cost(c_lo), 0.0, 1.0);

  const auto& best = tracker.toward(target);
  if (best.found) {
    const double certified = std::clamp(best.pred, 0.0, 1.0);
    // A member beyond the returned value would contradict an infeasibility certificate.
    out.value = is_max ? std::max(out.value, certified) : std::min(out.value, certified);
    out.tol = std::abs(out.value - certified);
    out.certified = true;
  } else {
    out.tol = is_max ? out.value : 1.0 - out.value;
  }
  return out;
}

}  // namespace

LinearRegressor separation_oracle(std::span<const double> mu, double target, const SparseVector& x,
                                  const LabelState& state, double bound) {
  if (mu.size() != state.ledger().size() + 1) throw ContractError("one MW weight per ledger entry plus the objective");
  for (double v : mu) {
    if (!(v >= 0.0)) throw ContractError("MW weights must be non-negative");
  }
  if (std::all_of(mu.begin(), mu.end(), [](double v) { return v == 0.0; })) {
    return LinearRegressor::zero(state.dimension(), bound);
  }
  std::vector<double> acc;
  return LinearRegressor(minimize_in_ball(separation_form(mu, target, x, state, acc), bound), bound);
}

MwResult mw_feasibility(double c, double target, const SparseVector& x, const LabelState& state, double bound,
                        const MwConfig& cfg) {
  return run_mw(c, target, x, state, bound, cfg, nullptr);
}

CostBound max_cost(const SparseVector& x, const LabelState& state, double tol, const CostRangeOptions& options) {
  MemberTracker tracker;
  tracker.offer(state, erm(state, state.ledger().empty() ? 1 : state.ledger().back().round, options.norm_bound).weights(), x);
  return search(x, state, tol, options, 1.0, tracker);
}

CostBound min_cost(const SparseVector& x, const LabelState& state, double tol, const CostRangeOptions& options) {
  MemberTracker tracker;
  tracker.offer(state, erm(state, state.ledger().empty() ? 1 : state.ledger().back().round, options.norm_bound).weights(), x);
  return search(x, state, tol, options, 0.0, tracker);
}

CostInterval cost_range(const SparseVector& x, const LabelState& state, double tol, const CostRangeOptions& options) {
  // Members found by one search anchor the other.
  MemberTracker tracker;
  tracker.offer(state, erm(state, state.ledger().empty() ? 1 : state.ledger().back().round, options.norm_bound).weights(), x);
  const CostBound hi = search(x, state, tol, options, 1.0, tracker);
  const CostBound lo = search(x, state, tol, options, 0.0, tracker);
  CostInterval out{lo.value, hi.value, std::max(lo.tol, hi.tol), false};
  if (out.lo > out.hi + 2.0 * out.tol) out.empty = true;
  return out;
}

}  // namespace coal
