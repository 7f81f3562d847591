#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coal/driver.hpp"
#include "coal/synthetic.hpp"

namespace coal {

// 2^(q-1) * base * K.
std::size_t budget_schedule(std::size_t q, std::size_t num_labels, std::size_t base = 10);

// Trapezoid area of perf against log2(queries). Points are (perf, queries) with queries
// strictly increasing and positive; throws ContractError otherwise or with fewer than 2 points.
double auc(std::span<const std::pair<double, std::size_t>> curve);

// Linear-interpolation quantile (R type 7). Throws ContractError on empty input.
double quantile(std::vector<double> values, double p);

struct SyntheticConfig {
  std::size_t num_labels = 5;
  // Non-bias feature count.
  std::size_t dim = 10;
  NoiseSpec noise = NoiseSpec::massart(0.3);
  CostNoise cost_noise = CostNoise::bernoulli;
  std::size_t train_size = 4096;
  std::size_t test_size = 1000;
  std::uint64_t data_seed = 1;
};

// Parses "massart:TAU" or "tsybakov:TAU0,ALPHA,BETA". Throws ConfigError.
NoiseSpec parse_noise_spec(const std::string& text);

struct ExperimentConfig {
  std::optional<std::filesystem::path> data_path;
  std::optional<std::filesystem::path> test_path;
  std::optional<std::filesystem::path> hierarchy_path;
  std::optional<SyntheticConfig> synthetic;
  // 0 infers K from the data.
  std::size_t num_labels = 0;

  Policy policy = Policy::coal;
  Mode mode = Mode::online;
  RadiusMode radius_mode = RadiusMode::mellow;
  double mellowness = 0.01;
  double kappa = 3.0;
  double delta = 0.05;
  double learning_rate = 0.5;
  double norm_bound = kDefaultNormBound;

  std::size_t seeds = 20;
  std::uint64_t first_seed = 1;
  std::size_t budget_base = 10;
  // Query every label of the first example regardless of policy (the query rule itself never
  // queries at round 1).
  bool passive_first_round = false;
  ExecPolicy exec = ExecPolicy::parallel;

  // Throws ConfigError.
  void validate() const;
};

// Biased features; every cost observed.
struct Dataset {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> test;
  std::size_t num_labels = 0;
  std::size_t dim = 0;
};

// Reads files or generates the synthetic stream. File test split: --test-data, else the last 20%.
// Unobserved costs become tree distances when a hierarchy is given, else 1.
// Synthetic test examples carry expected costs rather than sampled ones.
Dataset load_dataset(const ExperimentConfig& cfg);

// Prepends the bias feature and fills unobserved costs. Throws ConfigError on feature index 0.
std::vector<LabeledExample> prepare_examples(const std::vector<LabeledExample>& raw, std::size_t num_labels,
                                             const HierarchySpec* hierarchy);

struct CurvePoint {
  // Budget index q, or 0 for the end-of-stream point.
  std::size_t checkpoint_q = 0;
  std::size_t queries = 0;           // L2
  std::size_t examples_touched = 0;  // L1
  std::size_t examples_seen = 0;
  double test_cost = 0.0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<CurvePoint> curve;
  // L2 after each example.
  std::vector<std::size_t> cumulative_queries;
  // perf = -test_cost over the curve; NaN with fewer than two points.
  double auc = 0.0;
  // State after the whole pass.
  std::size_t final_queries = 0;
  std::size_t final_examples_touched = 0;
  double final_test_cost = 0.0;
};

// checkpoint_q == 0 aggregates the end-of-pass state.
struct QuantileRow {
  std::size_t checkpoint_q = 0;
  std::size_t seeds = 0;
  double median_queries = 0.0;
  double median_test_cost = 0.0;
  double q15_test_cost = 0.0;
  double q85_test_cost = 0.0;
};

struct ResultTable {
  std::string name;
  std::vector<SeedResult> seeds;
  std::vector<QuantileRow> quantiles;
  double auc_median = 0.0;
  double auc_q15 = 0.0;
  double auc_q85 = 0.0;
};

LearnerConfig learner_config(const ExperimentConfig& cfg, const Dataset& data);
double test_cost(const Learner& learner, const std::vector<LabeledExample>& test);

// One permuted pass for one seed.
SeedResult run_seed(const ExperimentConfig& cfg, const Dataset& data, std::uint64_t seed);

ResultTable run_experiment(const ExperimentConfig& cfg, const Dataset& data);
ResultTable run_experiment(const ExperimentConfig& cfg);

// Aggregates across seeds; independent of seed order.
void aggregate(ResultTable& table);

// "<policy>_<mode>_m<mellowness>", or with _lr<rate> in online mode.
std::string result_name(const ExperimentConfig& cfg);

void write_curves_csv(std::ostream& out, const ResultTable& table);
void write_quantiles_csv(std::ostream& out, const ResultTable& table);
void write_summary_csv(std::ostream& out, const ExperimentConfig& cfg, const ResultTable& table);
// Writes curves_<name>.csv, quantiles_<name>.csv and summary_<name>.csv into dir.
void write_results(const std::filesystem::path& dir, const ExperimentConfig& cfg, const ResultTable& table);

}  // namespace coal
