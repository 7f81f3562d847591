// Serial vs OpenMP paths: per-label cost ranges inside one round, and seeds inside one experiment.

#include <benchmark/benchmark.h>

#include "coal/driver.hpp"
#include "coal/harness.hpp"
#include "coal/synthetic.hpp"

namespace {

// A learner in exact mode that has already seen `warm` fully queried examples.
coal::Learner warm_learner(coal::ExecPolicy exec, std::size_t warm) {
  const std::size_t k = 6;
  const auto stream = coal::gen_stream(k, 2 * k, coal::NoiseSpec::massart(0.3), warm + 1, 7);
  coal::LearnerConfig lc;
  lc.num_labels = k;
  lc.dim = 2 * k + 1;
  lc.mode = coal::Mode::exact;
  lc.schedule.mellowness = 0.05;
  lc.exec = exec;
  coal::Learner learner(lc);
  const std::vector<bool> all(k, true);
  for (std::size_t i = 0; i < warm; ++i) {
    const auto x = coal::with_bias(stream.examples[i].features);
    learner.observe_forced(x, all, stream.examples[i].costs);
  }
  return learner;
}

void BM_ExactIntervals(benchmark::State& state) {
  const auto exec = state.range(0) ? coal::ExecPolicy::parallel : coal::ExecPolicy::serial;
  const auto learner = warm_learner(exec, 60);
  const auto probe = coal::gen_stream(6, 12, coal::NoiseSpec::massart(0.3), 16, 99);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto x = coal::with_bias(probe.examples[i++ % probe.examples.size()].features);
    benchmark::DoNotOptimize(learner.intervals(x));
  }
}
BENCHMARK(BM_ExactIntervals)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_OnlineExperiment(benchmark::State& state) {
  coal::ExperimentConfig cfg;
  coal::SyntheticConfig syn;
  syn.train_size = 1024;
  syn.test_size = 200;
  cfg.synthetic = syn;
  cfg.seeds = 4;
  cfg.exec = state.range(0) ? coal::ExecPolicy::parallel : coal::ExecPolicy::serial;
  const auto data = coal::load_dataset(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(coal::run_experiment(cfg, data));
}
BENCHMARK(BM_OnlineExperiment)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
