// coal: run active-learning experiments or emit synthetic datasets.
//
//   coal --synthetic massart:0.3 --classes 5 --policy coal --mellowness 0.01 --out results/
//   coal --data train.txt --test-data test.txt --mode exact --seeds 5 --out results/
//   coal generate --synthetic tsybakov:0.5,2,4 --classes 4 --dim 8 --size 1000 > data.txt

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coal/errors.hpp"
#include "coal/harness.hpp"
#include "coal/synthetic.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

coal::CostNoise parse_cost_noise(const std::string& s) {
  if (s == "bernoulli") return coal::CostNoise::bernoulli;
  if (s == "none") return coal::CostNoise::none;
  throw coal::ConfigError("cost noise must be bernoulli or none");
}

int run(const coal::ExperimentConfig& base, const std::vector<double>& mellowness,
        const std::vector<double>& rates, const std::string& out_dir) {
  const coal::Dataset data = coal::load_dataset(base);
  std::cerr << "train " << data.train.size() << ", test " << data.test.size() << ", K " << data.num_labels
            << ", dim " << data.dim << "\n";

  std::ofstream best;
  const bool grid = base.mode == coal::Mode::online && rates.size() > 1;
  if (grid) {
    std::filesystem::create_directories(out_dir);
    best.open(std::filesystem::path(out_dir) / "best_learning_rate.csv", std::ios::binary);
    best << "mellowness,learning_rate,auc_median\n";
  }
  for (const double m : mellowness) {
    double best_auc = -std::numeric_limits<double>::infinity();
    double best_rate = rates.front();
    for (const double lr : rates) {
      coal::ExperimentConfig cfg = base;
      cfg.mellowness = m;
      cfg.learning_rate = lr;
      const auto table = coal::run_experiment(cfg, data);
      coal::write_results(out_dir, cfg, table);
      std::cerr << table.name << ": auc median " << table.auc_median << "\n";
      if (!std::isnan(table.auc_median) && table.auc_median > best_auc) {
        best_auc = table.auc_median;
        best_rate = lr;
      }
      if (base.mode == coal::Mode::exact) break;  // the rate only matters online
    }
    if (grid) best << coal::format_double(m) << ',' << coal::format_double(best_rate) << ','
                   << coal::format_double(best_auc) << '\n';
    if (base.radius_mode == coal::RadiusMode::theory) break;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-overlapped active learning experiments"};
  app.set_version_flag("--version", "coal 0.1.0");

  std::string data_path, test_path, hierarchy_path, synthetic, out_dir = "coal_results";
  std::string policy = "coal", mode = "online", radius = "mellow", cost_noise = "bernoulli";
  std::vector<double> mellowness{0.01};
  std::vector<double> rates{0.5};
  coal::ExperimentConfig cfg;
  coal::SyntheticConfig syn;
  bool serial = false;

  app.add_option("--data", data_path, "Training data file");
  app.add_option("--test-data", test_path, "Test data file (default: last 20% of --data)");
  app.add_option("--hierarchy", hierarchy_path, "Label tree, one 'node parent' pair per line");
  app.add_option("--synthetic", synthetic, "massart:TAU or tsybakov:TAU0,ALPHA,BETA");
  app.add_option("--classes", cfg.num_labels, "Number of labels (inferred from --data when omitted)");
  app.add_option("--dim", syn.dim, "Synthetic feature count (default 2K)");
  app.add_option("--train-size", syn.train_size, "Synthetic training examples")->capture_default_str();
  app.add_option("--test-size", syn.test_size, "Synthetic test examples")->capture_default_str();
  app.add_option("--data-seed", syn.data_seed, "Seed of the synthetic stream")->capture_default_str();
  app.add_option("--cost-noise", cost_noise, "bernoulli or none")->capture_default_str();
  app.add_option("--policy", policy, "coal, passive, allornone or nodom")->capture_default_str();
  app.add_option("--mode", mode, "exact or online")->capture_default_str();
  app.add_option("--radius", radius, "mellow or theory")->capture_default_str();
  app.add_option("--mellowness", mellowness, "One or more mellowness values")->capture_default_str();
  app.add_option("--learning-rate", rates, "One or more learning rates; the best by AUC median is reported")
      ->capture_default_str();
  app.add_option("--norm-bound", cfg.norm_bound, "Norm bound B of the regressor class")->capture_default_str();
  app.add_option("--delta", cfg.delta, "Failure probability in the radius")->capture_default_str();
  app.add_option("--kappa", cfg.kappa, "Theory-mode radius constant")->capture_default_str();
  app.add_option("--seeds", cfg.seeds, "Number of permutations")->capture_default_str();
  app.add_option("--first-seed", cfg.first_seed, "Seed of the first permutation")->capture_default_str();
  app.add_option("--budget-base", cfg.budget_base, "Budgets are 2^(q-1) * base * K")->capture_default_str();
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_flag("--passive-first-round", cfg.passive_first_round, "Query all labels of the first example");
  app.add_flag("--serial", serial, "Run seeds sequentially");

  auto* gen = app.add_subcommand("generate", "Write a synthetic stream in the text format");
  std::string gen_spec = "massart:0.3", gen_out, gen_noise = "bernoulli";
  std::size_t gen_k = 5, gen_dim = 0, gen_n = 1000;
  std::uint64_t gen_seed = 1;
  gen->add_option("--synthetic", gen_spec, "massart:TAU or tsybakov:TAU0,ALPHA,BETA")->capture_default_str();
  gen->add_option("--classes", gen_k, "Number of labels")->capture_default_str();
  gen->add_option("--dim", gen_dim, "Feature count (default 2K)");
  gen->add_option("--size", gen_n, "Number of examples")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
  gen->add_option("--cost-noise", gen_noise, "bernoulli or none")->capture_default_str();
  gen->add_option("--output", gen_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      const auto spec = coal::parse_noise_spec(gen_spec);
      const auto stream = coal::gen_stream(gen_k, gen_dim ? gen_dim : 2 * gen_k, spec, gen_n, gen_seed,
                                           parse_cost_noise(gen_noise));
      if (gen_out.empty()) {
        coal::write_dataset(std::cout, stream.examples);
      } else {
        std::ofstream f(gen_out, std::ios::binary);
        if (!f) throw coal::DataError("cannot write " + gen_out);
        coal::write_dataset(f, stream.examples);
      }
      return 0;
    }

    if (!data_path.empty()) cfg.data_path = data_path;
    if (!test_path.empty()) cfg.test_path = test_path;
    if (!hierarchy_path.empty()) cfg.hierarchy_path = hierarchy_path;
    if (!synthetic.empty()) {
      syn.noise = coal::parse_noise_spec(synthetic);
      syn.num_labels = cfg.num_labels ? cfg.num_labels : syn.num_labels;
      if (app.count("--dim") == 0) syn.dim = 2 * syn.num_labels;
      syn.cost_noise = parse_cost_noise(cost_noise);
      cfg.synthetic = syn;
    }
    cfg.policy = coal::parse_policy(policy);
    cfg.mode = coal::parse_mode(mode);
    if (radius == "mellow") {
      cfg.radius_mode = coal::RadiusMode::mellow;
    } else if (radius == "theory") {
      cfg.radius_mode = coal::RadiusMode::theory;
    } else {
      throw coal::ConfigError("radius must be mellow or theory");
    }
    if (mellowness.empty() || rates.empty()) throw coal::ConfigError("need at least one mellowness and learning rate");
    cfg.mellowness = mellowness.front();
    cfg.learning_rate = rates.front();
    cfg.exec = serial ? coal::ExecPolicy::serial : coal::ExecPolicy::parallel;
    cfg.validate();
    return run(cfg, mellowness, rates, out_dir);
  } catch (const coal::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const coal::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const coal::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
