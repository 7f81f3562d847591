#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "coal/regression_oracle.hpp"
#include "coal/sparse_vector.hpp"

namespace coal {

enum class RadiusMode { theory, mellow };

// Version-space radius Delta_i. Theory mode uses kappa * min{eps_{n,delta}/(i-1), 1};
// mellow mode uses mellowness * eps_{i-1,delta}/(i-1), i.e. the horizon grows with the round.
struct RadiusSchedule {
  double kappa = 3.0;
  double delta_prob = 0.05;
  std::size_t horizon = 1;
  std::size_t dim = 1;
  std::size_t num_labels = 2;
  RadiusMode mode = RadiusMode::theory;
  double mellowness = 0.01;

  // Throws ConfigError.
  void validate() const;
};

// eps_{n,delta} = 324 (d log n + log(8 K e (d+1) n^2 / delta)).
double log_factor(std::size_t n, std::size_t dim, std::size_t num_labels, double delta_prob);

double radius(std::size_t round, const RadiusSchedule& sched);

// psi_i = 1/sqrt(i): minimum cost range worth a query at round i.
double query_threshold(std::size_t round);

// Approximate [c_-, c_+] for one (example, label), both ends clamped to [0,1].
// tol bounds how far each end may sit outside the exact version-space range:
// the true maximum lies in [hi - tol, hi] and the true minimum in [lo, lo + tol].
struct CostInterval {
  double lo = 0.0;
  double hi = 1.0;
  double tol = 0.0;
  // Set when the two searches cross, i.e. no regressor satisfied every ledger constraint.
  bool empty = false;

  double width() const { return hi - lo; }
};

// Normalizers of the MW gains. bounded: 2 for the objective and Delta_j + 1 per ledger entry, which
// bounds every gain. radius: Delta_i for the objective and Delta_j per entry, with gains clipped to
// [-1,1]; the weights then move at the scale the constraints actually live on.
enum class MwWidths { bounded, radius };

struct MwOptions {
  // Numerator constant in T = log(m) (C/Delta)^2 / tol^4.
  double t_constant = 12.0;
  std::size_t t_max = 2000;
  // Stop as soon as an iterate satisfies every constraint and the objective guess.
  bool early_exit = true;
  bool keep_iterates = false;
  MwWidths widths = MwWidths::radius;
};

struct MwConfig {
  std::size_t iterations = 1;   // T
  double eta = 0.0;             // sqrt(log(m)/T)
  std::size_t constraints = 1;  // m: the objective plus one per ledger entry
  bool early_exit = true;
  bool keep_iterates = false;
  MwWidths widths = MwWidths::radius;
};

MwConfig make_mw_config(std::size_t constraints, double delta, double tol, const MwOptions& options);

// MW regret width: 2 rho sqrt(log(m)/T).
double mw_slack(const MwConfig& cfg, double rho);

// Gain normalizers, objective first, then one per ledger entry.
std::vector<double> mw_widths(const LabelState& state, MwWidths mode);

// argmin_g mu_0 (g(x) - target)^2 + sum_j mu_j R_j(g) over the norm ball, as one weighted
// least-squares solve: the fake point (x, target, mu_0) plus every queried point weighted by
// the sum of mu_j/(j-1) over the ledger entries whose prefix contains it.
// mu[0] is the objective weight, mu[1 + k] pairs with ledger entry k.
LinearRegressor separation_oracle(std::span<const double> mu, double target, const SparseVector& x,
                                  const LabelState& state, double bound);

struct MwResult {
  bool feasible = false;
  std::size_t iterations = 0;
  // Feasible because some iterate met every constraint exactly.
  bool exact_witness = false;
  // Uniform average of the iterates, or the exact witness.
  Eigen::VectorXd average;
  // Largest weak-duality bound (L(g_t; mu) - sum_j mu_j Delta~_j) / mu_0 seen over the iterates:
  // no member has squared distance to the target below it. The infeasibility test is lower_bound > c.
  double lower_bound = 0.0;
  // Weights after the last update.
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> iterates;
};

// Does some distribution over the class satisfy E(g(x)-target)^2 <= c and every ledger constraint?
// Infeasible is a certificate; feasible means the averaged iterate is approximately feasible.
MwResult mw_feasibility(double c, double target, const SparseVector& x, const LabelState& state, double bound,
                        const MwConfig& cfg);

struct CostRangeOptions {
  double norm_bound = kDefaultNormBound;
  MwOptions mw;
};

struct CostBound {
  double value = 0.0;
  double tol = 0.0;
  // Final binary-search bracket on the squared distance to the target.
  double c_lo = 0.0;
  double c_hi = 1.0;
  std::size_t oracle_calls = 0;
  // Worst-case MW violation bound for the T actually used (0 when MW never ran).
  double mw_slack = 0.0;
  // A version-space member was found, so tol is a certified gap rather than a fallback.
  bool certified = false;
};

// Binary search over the squared distance of g(x) to 1 (max) or 0 (min) with MW feasibility
// checks. Stops when the bracket is narrower than tol^2/2 or a known member's prediction is within
// tol/2 of the certified bound. value is always a valid outer bound on the true extremum.
CostBound max_cost(const SparseVector& x, const LabelState& state, double tol, const CostRangeOptions& options);
CostBound min_cost(const SparseVector& x, const LabelState& state, double tol, const CostRangeOptions& options);

CostInterval cost_range(const SparseVector& x, const LabelState& state, double tol, const CostRangeOptions& options);

}  // namespace coal
