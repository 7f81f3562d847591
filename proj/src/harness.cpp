#include "coal/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "coal/errors.hpp"

namespace coal {

std::size_t budget_schedule(std::size_t q, std::size_t num_labels, std::size_t base) {
  if (q == 0) throw ContractError("budget index starts at 1");
  if (q > 60) throw ContractError("budget index too large");
  return (std::size_t{1} << (q - 1)) * base * num_labels;
}

double auc(std::span<const std::pair<double, std::size_t>> curve) {
  if (curve.size() < 2) throw ContractError("auc needs at least two points");
  if (curve.front().second == 0) throw ContractError("auc query counts must be positive");
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
    const auto [p0, q0] = curve[k];
    const auto [p1, q1] = curve[k + 1];
    if (q1 <= q0) throw ContractError("auc query counts must be strictly increasing");
    area += 0.5 * (p0 + p1) * std::log2(static_cast<double>(q1) / static_cast<double>(q0));
  }
  return area;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ContractError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ContractError("quantile level must lie in [0,1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

NoiseSpec parse_noise_spec(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  std::vector<double> params;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        params.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw ConfigError("bad noise parameter '" + item + "'");
      }
    }
  }
  NoiseSpec spec;
  if (kind == "massart" && params.size() == 1) {
    spec = NoiseSpec::massart(params[0]);
  } else if (kind == "tsybakov" && params.size() == 3) {
    spec = NoiseSpec::tsybakov(params[0], params[1], params[2]);
  } else {
    throw ConfigError("noise spec must be massart:TAU or tsybakov:TAU0,ALPHA,BETA, got '" + text + "'");
  }
  spec.validate();
  return spec;
}

void ExperimentConfig::validate() const {
  if (data_path.has_value() == synthetic.has_value()) {
    throw ConfigError("exactly one of a dataset path or a synthetic spec is required");
  }
  if (test_path && !data_path) throw ConfigError("a test file needs a training file");
  if (synthetic) {
    synthetic->noise.validate();
    if (synthetic->train_size == 0) throw ConfigError("synthetic train size must be positive");
    if (synthetic->test_size == 0) throw ConfigError("synthetic test size must be positive");
  }
  if (seeds == 0) throw ConfigError("need at least one seed");
  if (budget_base == 0) throw ConfigError("budget base must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(norm_bound > 0.0)) throw ConfigError("norm bound must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
  if (!(mellowness > 0.0)) throw ConfigError("mellowness must be positive");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
}

std::vector<LabeledExample> prepare_examples(const std::vector<LabeledExample>& raw, std::size_t num_labels,
                                             const HierarchySpec* hierarchy) {
  std::vector<LabeledExample> out;
  out.reserve(raw.size());
  const double scale =
      hierarchy && hierarchy->max_label_distance() > 0 ? 1.0 / static_cast<double>(hierarchy->max_label_distance()) : 1.0;
  for (const auto& ex : raw) {
    LabeledExample e;
    e.features = with_bias(ex.features);
    if (ex.costs.size() != num_labels) throw ContractError("cost vector size differs from the label count");
    if (ex.costs.all_observed()) {
      e.costs = ex.costs;
    } else if (hierarchy) {
      // The cheapest observed label stands in for the true one.
      Label truth = 0;
      double best = std::numeric_limits<double>::infinity();
      for (Label y = 0; y < num_labels; ++y) {
        if (ex.costs.observed(y) && ex.costs.cost(y) < best) {
          best = ex.costs.cost(y);
          truth = y;
        }
      }
      const CostVector tree = tree_distance_costs(*hierarchy, truth, scale);
      e.costs = CostVector(num_labels);
      for (Label y = 0; y < num_labels; ++y) e.costs.set(y, ex.costs.observed(y) ? ex.costs.cost(y) : tree.cost(y));
    } else {
      e.costs = CostVector(num_labels);
      for (Label y = 0; y < num_labels; ++y) e.costs.set(y, ex.costs.observed(y) ? ex.costs.cost(y) : 1.0);
    }
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

std::vector<LabeledExample> read_file(const std::filesystem::path& path, std::size_t num_labels) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_dataset(in, num_labels);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.column(), path.string() + ": " + e.what());
  }
}

std::size_t max_label(const std::vector<LabeledExample>& xs) {
  std::size_t k = 0;
  for (const auto& e : xs) k = std::max(k, e.costs.size());
  return k;
}

std::size_t feature_dim(const std::vector<LabeledExample>& xs) {
  std::size_t d = 1;
  for (const auto& e : xs) d = std::max(d, e.features.dimension());
  return d;
}

}  // namespace

Dataset load_dataset(const ExperimentConfig& cfg) {
  cfg.validate();
  Dataset data;
  if (cfg.synthetic) {
    const auto& s = *cfg.synthetic;
    if (cfg.hierarchy_path) throw ConfigError("hierarchies apply to dataset files only");
    auto stream = gen_stream(s.num_labels, s.dim, s.noise, s.train_size + s.test_size, s.data_seed, s.cost_noise);
    std::vector<LabeledExample> train(stream.examples.begin(),
                                      stream.examples.begin() + static_cast<std::ptrdiff_t>(s.train_size));
    data.num_labels = s.num_labels;
    data.train = prepare_examples(train, s.num_labels, nullptr);
    for (std::size_t i = s.train_size; i < stream.examples.size(); ++i) {
      LabeledExample e;
      e.features = with_bias(stream.examples[i].features);
      auto expected = stream.truth.expected_costs(e.features);
      for (double& c : expected) c = std::clamp(c, 0.0, 1.0);
      e.costs = CostVector::observed_all(std::move(expected));
      data.test.push_back(std::move(e));
    }
    data.dim = s.dim + 1;
    return data;
  }

  auto train = read_file(*cfg.data_path, cfg.num_labels);
  std::vector<LabeledExample> test;
  std::size_t k = cfg.num_labels ? cfg.num_labels : max_label(train);
  if (cfg.test_path) {
    // Re-read the training file if the test file mentions more labels than inferred.
    test = read_file(*cfg.test_path, cfg.num_labels);
    if (!cfg.num_labels && max_label(test) != k) {
      k = std::max(k, max_label(test));
      train = read_file(*cfg.data_path, k);
      test = read_file(*cfg.test_path, k);
    }
  } else {
    if (train.size() < 2) throw DataError("need at least two examples to split off a test set");
    const std::size_t n_test = std::max<std::size_t>(1, train.size() / 5);
    test.assign(train.end() - static_cast<std::ptrdiff_t>(n_test), train.end());
    train.resize(train.size() - n_test);
  }
  if (train.empty()) throw DataError("training set is empty");
  if (test.empty()) throw DataError("test set is empty");

  std::optional<HierarchySpec> hierarchy;
  if (cfg.hierarchy_path) {
    std::ifstream in(*cfg.hierarchy_path);
    if (!in) throw DataError("cannot open " + cfg.hierarchy_path->string());
    hierarchy = read_hierarchy(in, k);
  }
  const HierarchySpec* h = hierarchy ? &*hierarchy : nullptr;
  data.num_labels = k;
  data.train = prepare_examples(train, k, h);
  data.test = prepare_examples(test, k, h);
  data.dim = std::max(feature_dim(data.train), feature_dim(data.test));
  return data;
}

LearnerConfig learner_config(const ExperimentConfig& cfg, const Dataset& data) {
  LearnerConfig lc;
  lc.num_labels = data.num_labels;
  lc.dim = data.dim;
  lc.policy = cfg.policy;
  lc.mode = cfg.mode;
  lc.schedule.kappa = cfg.kappa;
  lc.schedule.delta_prob = cfg.delta;
  lc.schedule.horizon = std::max<std::size_t>(1, data.train.size());
  lc.schedule.mode = cfg.radius_mode;
  lc.schedule.mellowness = cfg.mellowness;
  lc.range.norm_bound = cfg.norm_bound;
  lc.learning_rate = cfg.learning_rate;
  lc.exec = ExecPolicy::serial;
  return lc;
}

double test_cost(const Learner& learner, const std::vector<LabeledExample>& test) {
  if (test.empty()) return 0.0;
  double total = 0.0;
  for (const auto& e : test) total += e.costs.cost(learner.predict_label(e.features));
  return total / static_cast<double>(test.size());
}

SeedResult run_seed(const ExperimentConfig& cfg, const Dataset& data, std::uint64_t seed) {
  Learner learner(learner_config(cfg, data));
  const std::size_t k = data.num_labels;
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  SeedResult r;
  r.seed = seed;
  r.cumulative_queries.reserve(order.size());
  std::size_t q = 1;
  std::size_t seen = 0;
  for (const std::size_t idx : order) {
    const auto& ex = data.train[idx];
    if (seen == 0 && cfg.passive_first_round) {
      learner.observe_forced(ex.features, std::vector<bool>(k, true), ex.costs);
    } else {
      const QueryDecision d = learner.process_example(ex.features);
      learner.observe_costs(ex.features, d, ex.costs);
    }
    ++seen;
    const auto& log = learner.query_log();
    r.cumulative_queries.push_back(log.l2());
    if (log.l2() >= budget_schedule(q, k, cfg.budget_base)) {
      const double tc = test_cost(learner, data.test);
      // One example adds at most K queries, so it normally crosses at most one boundary.
      while (q <= 60 && log.l2() >= budget_schedule(q, k, cfg.budget_base)) {
        r.curve.push_back({q, log.l2(), log.l1(), seen, tc});
        ++q;
      }
    }
  }
  r.final_queries = learner.query_log().l2();
  r.final_examples_touched = learner.query_log().l1();
  r.final_test_cost = test_cost(learner, data.test);
  if (r.final_queries > 0 && (r.curve.empty() || r.curve.back().queries != r.final_queries)) {
    r.curve.push_back({0, r.final_queries, r.final_examples_touched, seen, r.final_test_cost});
  }

  std::vector<std::pair<double, std::size_t>> pts;
  for (const auto& p : r.curve) {
    if (pts.empty() || p.queries > pts.back().second) pts.emplace_back(-p.test_cost, p.queries);
  }
  r.auc = pts.size() >= 2 ? auc(pts) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

void aggregate(ResultTable& table) {
  table.quantiles.clear();
  std::map<std::size_t, std::vector<const CurvePoint*>> by_q;
  std::vector<double> aucs;
  for (const auto& s : table.seeds) {
    for (const auto& p : s.curve) {
      if (p.checkpoint_q > 0) by_q[p.checkpoint_q].push_back(&p);
    }
    if (!std::isnan(s.auc)) aucs.push_back(s.auc);
  }
  auto row = [](std::size_t q, const std::vector<double>& queries, const std::vector<double>& costs) {
    QuantileRow r;
    r.checkpoint_q = q;
    r.seeds = costs.size();
    r.median_queries = quantile(queries, 0.5);
    r.median_test_cost = quantile(costs, 0.5);
    r.q15_test_cost = quantile(costs, 0.15);
    r.q85_test_cost = quantile(costs, 0.85);
    return r;
  };
  for (const auto& [q, pts] : by_q) {
    std::vector<double> queries, costs;
    for (const auto* p : pts) {
      queries.push_back(static_cast<double>(p->queries));
      costs.push_back(p->test_cost);
    }
    table.quantiles.push_back(row(q, queries, costs));
  }
  if (!table.seeds.empty()) {
    std::vector<double> queries, costs;
    for (const auto& s : table.seeds) {
      queries.push_back(static_cast<double>(s.final_queries));
      costs.push_back(s.final_test_cost);
    }
    table.quantiles.push_back(row(0, queries, costs));
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  table.auc_median = aucs.empty() ? nan : quantile(aucs, 0.5);
  table.auc_q15 = aucs.empty() ? nan : quantile(aucs, 0.15);
  table.auc_q85 = aucs.empty() ? nan : quantile(aucs, 0.85);
}

ResultTable run_experiment(const ExperimentConfig& cfg, const Dataset& data) {
  cfg.validate();
  ResultTable table;
  table.name = result_name(cfg);
  table.seeds.resize(cfg.seeds);
  std::vector<std::exception_ptr> errors(cfg.seeds);
  const auto n = static_cast<long>(cfg.seeds);
  const bool parallel = cfg.exec == ExecPolicy::parallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long s = 0; s < n; ++s) {
    try {
      table.seeds[s] = run_seed(cfg, data, cfg.first_seed + static_cast<std::uint64_t>(s));
    } catch (...) {
      errors[s] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  aggregate(table);
  return table;
}

ResultTable run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, load_dataset(cfg)); }

std::string result_name(const ExperimentConfig& cfg) {
  std::string name = to_string(cfg.policy) + "_" + to_string(cfg.mode);
  if (cfg.radius_mode == RadiusMode::theory) {
    name += "_theory";
  } else {
    name += "_m" + format_double(cfg.mellowness);
  }
  if (cfg.mode == Mode::online) name += "_lr" + format_double(cfg.learning_rate);
  return name;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  return format_double(v);
}

}  // namespace

void write_curves_csv(std::ostream& out, const ResultTable& table) {
  out << "seed,checkpoint_q,queries,examples_touched,examples_seen,test_cost\n";
  for (const auto& s : table.seeds) {
    for (const auto& p : s.curve) {
      out << s.seed << ',' << p.checkpoint_q << ',' << p.queries << ',' << p.examples_touched << ','
          << p.examples_seen << ',' << num(p.test_cost) << '\n';
    }
  }
}

void write_quantiles_csv(std::ostream& out, const ResultTable& table) {
  out << "checkpoint_q,seeds,median_queries,median_test_cost,q15_test_cost,q85_test_cost\n";
  for (const auto& r : table.quantiles) {
    out << r.checkpoint_q << ',' << r.seeds << ',' << num(r.median_queries) << ',' << num(r.median_test_cost) << ','
        << num(r.q15_test_cost) << ',' << num(r.q85_test_cost) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const ExperimentConfig& cfg, const ResultTable& table) {
  std::vector<double> l2, l1, tc;
  for (const auto& s : table.seeds) {
    l2.push_back(static_cast<double>(s.final_queries));
    l1.push_back(static_cast<double>(s.final_examples_touched));
    tc.push_back(s.final_test_cost);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto med = [&](const std::vector<double>& v) { return v.empty() ? nan : quantile(v, 0.5); };
  out << "name,policy,mode,radius,mellowness,learning_rate,norm_bound,delta,seeds,auc_median,auc_q15,auc_q85,"
         "median_final_queries,median_final_examples_touched,median_final_test_cost\n";
  out << table.name << ',' << to_string(cfg.policy) << ',' << to_string(cfg.mode) << ','
      << (cfg.radius_mode == RadiusMode::theory ? "theory" : "mellow") << ',' << num(cfg.mellowness) << ','
      << num(cfg.learning_rate) << ',' << num(cfg.norm_bound) << ',' << num(cfg.delta) << ',' << table.seeds.size()
      << ',' << num(table.auc_median) << ',' << num(table.auc_q15) << ',' << num(table.auc_q85) << ','
      << num(med(l2)) << ',' << num(med(l1)) << ',' << num(med(tc)) << '\n';
}

void write_results(const std::filesystem::path& dir, const ExperimentConfig& cfg, const ResultTable& table) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
  auto open = [&](const std::string& stem) {
    const auto path = dir / (stem + "_" + table.name + ".csv");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path.string());
    return f;
  };
  {
    auto f = open("curves");
    write_curves_csv(f, table);
  }
  {
    auto f = open("quantiles");
    write_quantiles_csv(f, table);
  }
  {
    auto f = open("summary");
    write_summary_csv(f, cfg, table);
  }
}

}  // namespace coal
