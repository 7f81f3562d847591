#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "coal/cost_range.hpp"
#include "coal/data_model.hpp"
#include "coal/online.hpp"
#include "coal/regression_oracle.hpp"

namespace coal {

enum class Policy { coal, passive, all_or_none, no_dom };
// exact: least-squares oracle with MW cost ranges. online: AdaGrad regressors with sensitivity ranges.
enum class Mode { exact, online };
// Per-label range computations run on OpenMP threads under `parallel`; `serial` is the reference path.
enum class ExecPolicy { serial, parallel };

Policy parse_policy(std::string_view name);
Mode parse_mode(std::string_view name);
std::string to_string(Policy policy);
std::string to_string(Mode mode);

struct LearnerConfig {
  std::size_t num_labels = 2;
  // Feature dimension including the bias slot at index 0.
  std::size_t dim = 1;
  Policy policy = Policy::coal;
  Mode mode = Mode::online;
  // dim and num_labels are taken from the fields above.
  RadiusSchedule schedule{.mode = RadiusMode::mellow};
  CostRangeOptions range;
  double learning_rate = 0.5;
  ExecPolicy exec = ExecPolicy::serial;
};

struct QueryDecision {
  std::size_t round = 0;
  double threshold = 1.0;  // psi_i
  // One clamped interval per label; empty under the passive policy, which never looks at them.
  std::vector<CostInterval> intervals;
  std::vector<bool> nondominated;
  std::vector<bool> to_query;

  std::size_t num_queries() const;
};

// The query rule applied to precomputed intervals.
// Y' = {y : lo_y <= min_y' hi_y'}; COAL queries y in Y' with hi - lo > psi, and nothing when |Y'| <= 1.
QueryDecision decide(std::vector<CostInterval> intervals, Policy policy, double threshold, std::size_t num_labels);

class Learner {
 public:
  explicit Learner(LearnerConfig config);

  const LearnerConfig& config() const { return config_; }
  std::size_t num_labels() const { return config_.num_labels; }
  // Index i of the next example (1-based).
  std::size_t round() const { return round_; }
  const QueryLog& query_log() const { return log_; }

  double current_radius() const { return radius(round_, config_.schedule); }

  // Clamped per-label cost predictions of the current regressors.
  std::vector<double> predictions(const SparseVector& x) const;
  // argmin_y prediction, ties to the smallest label.
  Label predict_label(const SparseVector& x) const;

  // Per-label intervals at the current round (tolerance psi_i/4 in exact mode).
  std::vector<CostInterval> intervals(const SparseVector& x) const;

  QueryDecision process_example(const SparseVector& x) const;

  // Adds the queried costs, refits, extends the ledgers and advances the round.
  // Throws ContractError if a queried label's cost is unobserved.
  void observe_costs(const SparseVector& x, const QueryDecision& decision, const CostVector& costs);
  void observe_forced(const SparseVector& x, const std::vector<bool>& to_query, const CostVector& costs);

  const LabelState& label_state(Label y) const { return labels_.at(y); }
  const LinearRegressor& erm_regressor(Label y) const { return erms_.at(y); }
  const OnlineRegressor& online_regressor(Label y) const { return online_.at(y); }

 private:
  LearnerConfig config_;
  std::size_t round_ = 1;
  QueryLog log_;
  std::vector<LabelState> labels_;
  std::vector<LinearRegressor> erms_;
  std::vector<double> erm_sse_;
  std::vector<OnlineRegressor> online_;
};

}  // namespace coal
