#include <doctest.h>

#include <random>
#include <vector>

#include "coal/driver.hpp"
#include "coal/errors.hpp"
#include "coal/synthetic.hpp"

using namespace coal;

namespace {

CostInterval iv(double lo, double hi) {
  CostInterval c;
  c.lo = lo;
  c.hi = hi;
  return c;
}

LearnerConfig config(std::size_t k, std::size_t dim, Policy policy, Mode mode, ExecPolicy exec) {
  LearnerConfig cfg;
  cfg.num_labels = k;
  cfg.dim = dim;
  cfg.policy = policy;
  cfg.mode = mode;
  cfg.schedule.mellowness = mode == Mode::exact ? 0.0002 : 0.01;
  cfg.exec = exec;
  return cfg;
}

struct Stream {
  std::vector<SparseVector> x;
  std::vector<CostVector> costs;
};

Stream stream(std::size_t k, std::size_t n, std::uint64_t seed) {
  const auto s = gen_stream(k, 2 * k, NoiseSpec::massart(0.3), n, seed);
  Stream out;
  for (const auto& e : s.examples) {
    out.x.push_back(with_bias(e.features));
    out.costs.push_back(e.costs);
  }
  return out;
}

}  // namespace

TEST_CASE("policy and mode names") {
  CHECK(parse_policy("coal") == Policy::coal);
  CHECK(parse_policy("passive") == Policy::passive);
  CHECK(parse_policy("allornone") == Policy::all_or_none);
  CHECK(parse_policy("nodom") == Policy::no_dom);
  CHECK_THROWS_AS(parse_policy("greedy"), ConfigError);
  CHECK(parse_mode("exact") == Mode::exact);
  CHECK(parse_mode("online") == Mode::online);
  CHECK_THROWS_AS(parse_mode("batch"), ConfigError);
  for (const auto p : {Policy::coal, Policy::passive, Policy::all_or_none, Policy::no_dom}) {
    CHECK(parse_policy(to_string(p)) == p);
  }
}

TEST_CASE("decide on a worked example") {
  // min hi = 0.1, so label 2 is dominated; labels 0 and 1 are wider than psi = 0.04.
  const auto d = decide({iv(0.0, 0.1), iv(0.05, 0.2), iv(0.6, 0.9)}, Policy::coal, 0.04, 3);
  CHECK(d.nondominated == std::vector<bool>{true, true, false});
  CHECK(d.to_query == std::vector<bool>{true, true, false});
  CHECK(d.num_queries() == 2);

  // A single survivor is never queried.
  const auto one = decide({iv(0.0, 0.3), iv(0.5, 0.9)}, Policy::coal, 0.04, 2);
  CHECK(one.num_queries() == 0);
  CHECK(decide({iv(0.0, 0.3), iv(0.5, 0.9)}, Policy::all_or_none, 0.04, 2).num_queries() == 0);
  CHECK(decide({iv(0.0, 0.3), iv(0.5, 0.9)}, Policy::no_dom, 0.04, 2).num_queries() == 2);

  // Narrow survivors are not queried.
  CHECK(decide({iv(0.1, 0.12), iv(0.11, 0.13)}, Policy::coal, 0.04, 2).num_queries() == 0);

  CHECK(decide({iv(0.0, 0.1), iv(0.05, 0.2), iv(0.6, 0.9)}, Policy::all_or_none, 0.04, 3).num_queries() == 3);
  CHECK(decide({}, Policy::passive, 0.5, 4).num_queries() == 4);
  CHECK_THROWS_AS(decide({iv(0, 1)}, Policy::coal, 0.5, 2), ContractError);

  // Empty intervals count as [0,1].
  CostInterval e;
  e.empty = true;
  e.lo = 1.0;
  e.hi = 0.0;
  const auto withempty = decide({e, iv(0.2, 0.4)}, Policy::coal, 0.1, 2);
  CHECK(withempty.to_query == std::vector<bool>{true, true});
}

TEST_CASE("policies nest on random intervals") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t k = 2 + trial % 5;
    std::vector<CostInterval> ivs;
    for (std::size_t y = 0; y < k; ++y) {
      const double a = u(rng), b = u(rng);
      ivs.push_back(iv(std::min(a, b), std::max(a, b)));
    }
    const double psi = 0.05 + 0.5 * u(rng);
    const auto c = decide(ivs, Policy::coal, psi, k);
    const auto nd = decide(ivs, Policy::no_dom, psi, k);
    const auto all = decide(ivs, Policy::all_or_none, psi, k);
    for (std::size_t y = 0; y < k; ++y) {
      if (c.to_query[y]) {
        CHECK(nd.to_query[y]);
        CHECK(all.to_query[y]);
        CHECK(c.nondominated[y]);
      }
    }
    CHECK((all.num_queries() == 0 || all.num_queries() == k));
    CHECK((all.num_queries() == 0) == (c.num_queries() == 0));
    // The label with the smallest hi is always nondominated.
    std::size_t arg = 0;
    for (std::size_t y = 1; y < k; ++y) {
      if (ivs[y].hi < ivs[arg].hi) arg = y;
    }
    CHECK(c.nondominated[arg]);
  }
}

TEST_CASE("predict_label breaks ties toward the smallest label") {
  Learner learner(config(3, 2, Policy::coal, Mode::online, ExecPolicy::serial));
  const auto x = SparseVector::from_entries({{0, 1.0}, {1, 0.5}});
  CHECK(learner.predict_label(x) == 0);  // all predictions are 0
  // Pull labels 0 and 2 up, leaving label 1 cheapest.
  std::vector<bool> q{true, false, true};
  learner.observe_forced(x, q, CostVector::observed_all({1.0, 0.0, 1.0}));
  CHECK(learner.predict_label(x) == 1);
}

TEST_CASE("round one never queries") {
  for (const auto mode : {Mode::exact, Mode::online}) {
    Learner learner(config(4, 9, Policy::coal, mode, ExecPolicy::serial));
    const auto s = stream(4, 1, 3);
    const auto d = learner.process_example(s.x[0]);
    CHECK(d.round == 1);
    CHECK(d.threshold == 1.0);
    CHECK(d.num_queries() == 0);
  }
}

TEST_CASE("observing costs updates the log and the round") {
  for (const auto mode : {Mode::exact, Mode::online}) {
    Learner learner(config(3, 7, Policy::passive, mode, ExecPolicy::serial));
    const auto s = stream(3, 5, 4);
    std::size_t expect_l2 = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      const auto d = learner.process_example(s.x[i]);
      CHECK(d.round == i + 1);
      learner.observe_costs(s.x[i], d, s.costs[i]);
      expect_l2 += 3;
      CHECK(learner.round() == i + 2);
      CHECK(learner.query_log().l1() == i + 1);
      CHECK(learner.query_log().l2() == expect_l2);
    }
    if (mode == Mode::exact) {
      CHECK(learner.label_state(0).points().size() == 5);
      CHECK(learner.label_state(0).ledger().size() == 6);
    }
    // Stale decision.
    const auto old = learner.process_example(s.x[0]);
    learner.observe_costs(s.x[0], old, s.costs[0]);
    CHECK_THROWS_AS(learner.observe_costs(s.x[0], old, s.costs[0]), ContractError);
  }
}

TEST_CASE("queried labels must carry a cost") {
  Learner learner(config(3, 2, Policy::passive, Mode::online, ExecPolicy::serial));
  const auto x = SparseVector::from_entries({{0, 1.0}});
  CostVector partial(3);
  partial.set(0, 0.2);
  const auto d = learner.process_example(x);
  CHECK_THROWS_AS(learner.observe_costs(x, d, partial), ContractError);
  CHECK(learner.round() == 1);
  CHECK(learner.query_log().l2() == 0);
  // Unqueried labels may stay unobserved.
  learner.observe_forced(x, {true, false, false}, partial);
  CHECK(learner.query_log().l2() == 1);
}

TEST_CASE("COAL queries a subset of NoDom on the same history") {
  const auto s = stream(3, 60, 5);
  Learner learner(config(3, 7, Policy::coal, Mode::online, ExecPolicy::serial));
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    const auto iv = learner.intervals(s.x[i]);
    const double psi = query_threshold(learner.round());
    const auto c = decide(iv, Policy::coal, psi, 3);
    const auto nd = decide(iv, Policy::no_dom, psi, 3);
    for (std::size_t y = 0; y < 3; ++y) {
      if (c.to_query[y]) CHECK(nd.to_query[y]);
    }
    learner.observe_forced(s.x[i], nd.to_query, s.costs[i]);
  }
}

TEST_CASE("parallel and serial learners agree") {
  for (const auto mode : {Mode::online, Mode::exact}) {
    const std::size_t n = mode == Mode::exact ? 40 : 300;
    const auto s = stream(3, n, 6);
    Learner a(config(3, 7, Policy::coal, mode, ExecPolicy::serial));
    Learner b(config(3, 7, Policy::coal, mode, ExecPolicy::parallel));
    for (std::size_t i = 0; i < n; ++i) {
      const auto da = a.process_example(s.x[i]);
      const auto db = b.process_example(s.x[i]);
      REQUIRE(da.to_query == db.to_query);
      for (std::size_t y = 0; y < 3; ++y) {
        CHECK(da.intervals[y].lo == db.intervals[y].lo);
        CHECK(da.intervals[y].hi == db.intervals[y].hi);
      }
      a.observe_costs(s.x[i], da, s.costs[i]);
      b.observe_costs(s.x[i], db, s.costs[i]);
    }
    CHECK(a.query_log().l2() == b.query_log().l2());
  }
}

TEST_CASE("exact learner keeps one ledger entry per round") {
  const auto s = stream(2, 30, 7);
  Learner learner(config(2, 5, Policy::coal, Mode::exact, ExecPolicy::serial));
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    const auto d = learner.process_example(s.x[i]);
    learner.observe_costs(s.x[i], d, s.costs[i]);
  }
  for (Label y = 0; y < 2; ++y) {
    const auto ledger = learner.label_state(y).ledger();
    REQUIRE(ledger.size() == 31);
    for (std::size_t j = 0; j < ledger.size(); ++j) CHECK(ledger[j].round == j + 1);
    // Each ledger entry's ERM risk is the minimum of that prefix risk.
    const auto& g = learner.erm_regressor(y);
    for (const auto& e : ledger) CHECK(e.erm_risk <= learner.label_state(y).risk(g.weights(), e.round) + 1e-9);
  }
}
