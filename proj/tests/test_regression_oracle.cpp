#include <doctest.h>

#include <random>
#include <vector>

#include "coal/errors.hpp"
#include "coal/regression_oracle.hpp"

using namespace coal;

namespace {

SparseVector vec(std::initializer_list<FeatureEntry> e) { return SparseVector::from_entries(e); }

double objective(std::span<const WeightedPoint> pts, const Eigen::VectorXd& w) {
  double s = 0.0;
  for (const auto& p : pts) {
    const double r = p.features.dot(w) - p.target;
    s += p.weight * r * r;
  }
  return s;
}

// Projected gradient descent on the ball; slow but independent of the library's solver.
Eigen::VectorXd projected_gradient(std::span<const WeightedPoint> pts, std::size_t dim, double bound) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
  for (const auto& p : pts) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
    for (const auto& e : p.features.entries()) x[e.index] = e.value;
    a += p.weight * x * x.transpose();
    b += p.weight * p.target * x;
  }
  const double lip = 2.0 * std::max(1e-12, a.eigenvalues().real().maxCoeff());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  for (int it = 0; it < 200000; ++it) {
    Eigen::VectorXd next = w - (2.0 * (a * w - b)) / lip;
    if (next.norm() > bound) next *= bound / next.norm();
    if ((next - w).norm() < 1e-15) break;
    w = next;
  }
  return w;
}

std::vector<WeightedPoint> random_points(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<WeightedPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<FeatureEntry> f{{0, 1.0}};
    for (std::size_t j = 1; j < dim; ++j) {
      if (u(rng) < 0.6) f.push_back({j, 2.0 * u(rng) - 1.0});
    }
    pts.push_back({SparseVector::from_entries(f), u(rng), u(rng) * 2.0});
  }
  return pts;
}

Eigen::VectorXd random_in_ball(std::mt19937_64& rng, std::size_t dim, double bound) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd w(dim);
  for (auto& v : w) v = g(rng);
  return w / w.norm() * bound * std::pow(u(rng), 1.0 / static_cast<double>(dim));
}

}  // namespace

TEST_CASE("fit_weighted interpolates and averages") {
  const std::vector<WeightedPoint> one{{vec({{0, 1.0}}), 0.5, 1.0}};
  CHECK(predict(fit_weighted(one, 10.0), vec({{0, 1.0}})) == doctest::Approx(0.5).epsilon(1e-9));

  const std::vector<WeightedPoint> two{{vec({{0, 1.0}}), 0.0, 1.0}, {vec({{0, 1.0}}), 1.0, 1.0}};
  CHECK(predict(fit_weighted(two, 10.0), vec({{0, 1.0}})) == doctest::Approx(0.5).epsilon(1e-9));

  CHECK(fit_weighted(std::span<const WeightedPoint>{}, 10.0, 3).weights().isZero());
  const std::vector<WeightedPoint> weightless{{vec({{0, 1.0}}), 0.7, 0.0}};
  CHECK(fit_weighted(weightless, 10.0).weights().isZero());
}

TEST_CASE("fit_weighted respects the norm bound") {
  // x = 2, c = 1, bound 0.25: the unconstrained weight 0.5 is outside the ball.
  const std::vector<WeightedPoint> pts{{vec({{0, 2.0}}), 1.0, 1.0}};
  const auto g = fit_weighted(pts, 0.25);
  // Grid search over the admissible weights.
  double best_w = 0.0, best = INFINITY;
  for (int k = -2500; k <= 2500; ++k) {
    const double w = 0.25 * k / 2500.0;
    const double obj = (2.0 * w - 1.0) * (2.0 * w - 1.0);
    if (obj < best) {
      best = obj;
      best_w = w;
    }
  }
  CHECK(g.weights()[0] == doctest::Approx(best_w).epsilon(1e-9));
  CHECK(g.raw(vec({{0, 2.0}})) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("predict clamps raw predictions") {
  CHECK(predict(LinearRegressor::zero(3), vec({{1, 1.0}})) == 0.0);
  Eigen::VectorXd w(1);
  w << 1.7;
  CHECK(predict(LinearRegressor(w, 10.0), vec({{0, 1.0}})) == 1.0);
  w << 0.42;
  CHECK(predict(LinearRegressor(w, 10.0), vec({{0, 1.0}})) == doctest::Approx(0.42));
  w << -0.3;
  CHECK(predict(LinearRegressor(w, 10.0), vec({{0, 1.0}})) == 0.0);
}

TEST_CASE("oracle matches projected gradient on and inside the ball") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t dim = 1 + trial % 4;
    const auto pts = random_points(rng, 3 + trial % 5, dim);
    const double bound = trial % 2 ? 0.3 : 10.0;
    const auto g = fit_weighted(pts, bound, dim);
    const auto ref = projected_gradient(pts, dim, bound);
    CHECK(g.weights().norm() <= bound + 1e-8);
    CHECK(objective(pts, g.weights()) <= objective(pts, ref) + 1e-10);
  }
}

TEST_CASE("oracle beats random feasible regressors") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 1 + trial % 5;
    const auto pts = random_points(rng, 1 + trial % 7, dim);
    const double bound = trial % 3 == 0 ? 0.5 : 10.0;
    const auto g = fit_weighted(pts, bound, dim);
    const double best = objective(pts, g.weights());
    CHECK(g.weights().norm() <= bound + 1e-8);
    for (int k = 0; k < 1000; ++k) {
      const auto w = random_in_ball(rng, dim, bound);
      if (objective(pts, w) < best - 1e-8) {
        FAIL("random regressor beat the oracle on trial " << trial);
      }
    }
  }
}

TEST_CASE("the norm ball is convex") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const auto a = random_in_ball(rng, 4, 2.0);
    const auto b = random_in_ball(rng, 4, 2.0);
    const double t = u(rng);
    CHECK(((1 - t) * a + t * b).norm() <= 2.0 + 1e-12);
  }
}

TEST_CASE("empirical risk over the queried prefix") {
  LabelState state(0, 1);
  Eigen::VectorXd w(1);
  w << 0.3;
  const LinearRegressor g(w, 10.0);
  CHECK(empirical_risk(g, state, 1) == 0.0);

  state.add_point(1, vec({{0, 1.0}}), 0.5);
  CHECK(empirical_risk(g, state, 1) == 0.0);
  CHECK(empirical_risk(g, state, 3) == doctest::Approx(0.02));

  LabelState two(0, 1);
  two.add_point(1, vec({{0, 1.0}}), 0.4);  // residual 0.1
  two.add_point(2, vec({{0, 1.0}}), 0.0);  // residual 0.3
  CHECK(empirical_risk(g, two, 3) == doctest::Approx(0.05));
  CHECK(empirical_risk(g, two, 2) == doctest::Approx(0.01));

  CHECK_THROWS_AS(two.add_point(2, vec({{0, 1.0}}), 0.1), ContractError);
}

TEST_CASE("ledger risks agree with direct risks") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LabelState state(1, 4);
  std::size_t round = 1;
  state.append_ledger(1, 0.0, 3.0);
  for (int k = 0; k < 30; ++k) {
    ++round;
    if (u(rng) < 0.6) {
      state.add_point(round - 1, vec({{0, 1.0}, {static_cast<std::size_t>(1 + k % 3), u(rng)}}), u(rng));
    }
    const auto g = erm(state, round, 10.0);
    state.append_ledger(round, empirical_risk(g, state, round), 0.1);
  }
  for (const auto& e : state.ledger()) CHECK(e.delta_tilde == doctest::Approx(e.erm_risk + e.delta));
  for (int k = 0; k < 20; ++k) {
    const auto w = random_in_ball(rng, 4, 1.0);
    std::vector<double> risks;
    state.ledger_risks(w, risks);
    REQUIRE(risks.size() == state.ledger().size());
    for (std::size_t j = 0; j < risks.size(); ++j) {
      CHECK(risks[j] == doctest::Approx(state.risk(w, state.ledger()[j].round)).epsilon(1e-10));
    }
  }
  // Every prefix ERM minimizes its own prefix risk, so it beats the final ERM there.
  const auto last = erm(state, round, 10.0);
  for (const auto& e : state.ledger()) {
    CHECK(e.erm_risk <= state.risk(last.weights(), e.round) + 1e-10);
  }
}

TEST_CASE("adding a heavier fake point trades prefix risk for fit at x") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto pts = random_points(rng, 2 + trial % 6, 3);
    const WeightedPoint fake{vec({{0, 1.0}, {1, u(rng)}}), u(rng), 0.0};
    const double w = u(rng) * 3.0;
    const double w2 = w + u(rng) * 3.0;
    auto fit_with = [&](double weight) {
      auto all = pts;
      all.push_back({fake.features, fake.target, weight});
      return fit_weighted(all, 10.0, 3);
    };
    const auto g = fit_with(w);
    const auto g2 = fit_with(w2);
    CHECK(objective(pts, g2.weights()) >= objective(pts, g.weights()) - 1e-8);
    const double r = g.raw(fake.features) - fake.target;
    const double r2 = g2.raw(fake.features) - fake.target;
    CHECK(r2 * r2 <= r * r + 1e-8);
  }
}
