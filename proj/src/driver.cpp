#include "coal/driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coal/errors.hpp"

namespace coal {

Policy parse_policy(std::string_view name) {
  if (name == "coal") return Policy::coal;
  if (name == "passive") return Policy::passive;
  if (name == "allornone") return Policy::all_or_none;
  if (name == "nodom") return Policy::no_dom;
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

Mode parse_mode(std::string_view name) {
  if (name == "exact") return Mode::exact;
  if (name == "online") return Mode::online;
  throw ConfigError("unknown mode '" + std::string(name) + "'");
}

std::string to_string(Policy policy) {
  switch (policy) {
    case Policy::coal: return "coal";
    case Policy::passive: return "passive";
    case Policy::all_or_none: return "allornone";
    case Policy::no_dom: return "nodom";
  }
  return "?";
}

std::string to_string(Mode mode) { return mode == Mode::exact ? "exact" : "online"; }

std::size_t QueryDecision::num_queries() const {
  return static_cast<std::size_t>(std::count(to_query.begin(), to_query.end(), true));
}

QueryDecision decide(std::vector<CostInterval> intervals, Policy policy, double threshold, std::size_t num_labels) {
  QueryDecision d;
  d.threshold = threshold;
  d.nondominated.assign(num_labels, true);
  d.to_query.assign(num_labels, false);
  if (policy == Policy::passive) {
    d.to_query.assign(num_labels, true);
    d.intervals = std::move(intervals);
    return d;
  }
  if (intervals.size() != num_labels) throw ContractError("one interval per label required");
  for (auto& iv : intervals) {
    if (iv.empty) {
      // No surviving regressor: treat the label as fully uncertain.
      iv.lo = 0.0;
      iv.hi = 1.0;
    }
    iv.lo = std::clamp(iv.lo, 0.0, 1.0);
    iv.hi = std::clamp(iv.hi, 0.0, 1.0);
  }
  double min_hi = std::numeric_limits<double>::infinity();
  for (const auto& iv : intervals) min_hi = std::min(min_hi, iv.hi);

  std::size_t survivors = 0;
  for (Label y = 0; y < num_labels; ++y) {
    d.nondominated[y] = intervals[y].lo <= min_hi;
    survivors += d.nondominated[y] ? 1 : 0;
  }
  std::vector<bool> coal_set(num_labels, false);
  if (survivors > 1) {
    for (Label y = 0; y < num_labels; ++y) {
      coal_set[y] = d.nondominated[y] && intervals[y].width() > threshold;
    }
  }
  switch (policy) {
    case Policy::coal:
      d.to_query = coal_set;
      break;
    case Policy::all_or_none:
      if (std::find(coal_set.begin(), coal_set.end(), true) != coal_set.end()) d.to_query.assign(num_labels, true);
      break;
    case Policy::no_dom:
      for (Label y = 0; y < num_labels; ++y) d.to_query[y] = intervals[y].width() > threshold;
      break;
    case Policy::passive:
      break;
  }
  d.intervals = std::move(intervals);
  return d;
}

Learner::Learner(LearnerConfig config) : config_(std::move(config)), log_(config_.num_labels) {
  if (config_.num_labels == 0) throw ConfigError("need at least one label");
  if (config_.dim == 0) throw ConfigError("feature dimension must be positive");
  config_.schedule.dim = config_.dim;
  config_.schedule.num_labels = config_.num_labels;
  config_.schedule.validate();
  if (!(config_.range.norm_bound > 0.0)) throw ConfigError("norm bound must be positive");

  if (config_.mode == Mode::exact) {
    const double delta1 = radius(1, config_.schedule);
    for (Label y = 0; y < config_.num_labels; ++y) {
      labels_.emplace_back(y, config_.dim);
      labels_.back().append_ledger(1, 0.0, delta1);
      erms_.push_back(LinearRegressor::zero(config_.dim, config_.range.norm_bound));
    }
    erm_sse_.assign(config_.num_labels, 0.0);
  } else {
    for (Label y = 0; y < config_.num_labels; ++y) online_.emplace_back(config_.dim, config_.learning_rate);
  }
}

std::vector<double> Learner::predictions(const SparseVector& x) const {
  std::vector<double> out(config_.num_labels);
  for (Label y = 0; y < config_.num_labels; ++y) {
    out[y] = config_.mode == Mode::exact ? predict(erms_[y], x) : predict(online_[y], x);
  }
  return out;
}

Label Learner::predict_label(const SparseVector& x) const {
  const auto p = predictions(x);
  return static_cast<Label>(std::min_element(p.begin(), p.end()) - p.begin());
}

std::vector<CostInterval> Learner::intervals(const SparseVector& x) const {
  const auto k = static_cast<long>(config_.num_labels);
  std::vector<CostInterval> out(config_.num_labels);
  const double tol = query_threshold(round_) / 4.0;
  const double delta = current_radius();
  const bool parallel = config_.exec == ExecPolicy::parallel;
  if (config_.mode == Mode::exact) {
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long y = 0; y < k; ++y) out[y] = cost_range(x, labels_[y], tol, config_.range);
  } else {
#pragma omp parallel for schedule(static) if (parallel)
    for (long y = 0; y < k; ++y) out[y] = approx_cost_range(online_[y], x, delta);
  }
  return out;
}

QueryDecision Learner::process_example(const SparseVector& x) const {
  std::vector<CostInterval> iv;
  if (config_.policy != Policy::passive) iv = intervals(x);
  QueryDecision d = decide(std::move(iv), config_.policy, query_threshold(round_), config_.num_labels);
  d.round = round_;
  return d;
}

void Learner::observe_costs(const SparseVector& x, const QueryDecision& decision, const CostVector& costs) {
  if (decision.round != round_) throw ContractError("decision belongs to a different round");
  observe_forced(x, decision.to_query, costs);
}

void Learner::observe_forced(const SparseVector& x, const std::vector<bool>& to_query, const CostVector& costs) {
  if (to_query.size() != config_.num_labels || costs.size() != config_.num_labels) {
    throw ContractError("query mask and costs must cover every label");
  }
  for (Label y = 0; y < config_.num_labels; ++y) {
    if (to_query[y] && !costs.observed(y)) {
      throw ContractError("label " + std::to_string(y + 1) + " was queried but its cost is unobserved");
    }
  }

  const std::size_t i = round_;
  if (config_.mode == Mode::exact) {
    const double next_delta = radius(i + 1, config_.schedule);
    for (Label y = 0; y < config_.num_labels; ++y) {
      auto& state = labels_[y];
      if (to_query[y]) {
        state.add_point(i, x, costs.cost(y));
        erms_[y] = LinearRegressor(minimize_in_ball(state.totals(), config_.range.norm_bound),
                                   config_.range.norm_bound);
        erm_sse_[y] = std::max(0.0, state.totals().value(erms_[y].weights()));
      }
      state.append_ledger(i + 1, erm_sse_[y] / static_cast<double>(i), next_delta);
    }
  } else {
    for (Label y = 0; y < config_.num_labels; ++y) {
      if (to_query[y]) online_update(online_[y], x, costs.cost(y), 1.0);
    }
  }
  log_.record(to_query);
  ++round_;
}

}  // namespace coal
