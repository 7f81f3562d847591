#include "coal/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "coal/errors.hpp"

namespace coal {

NoiseSpec NoiseSpec::massart(double tau) {
  NoiseSpec s;
  s.kind = Kind::massart;
  s.tau = tau;
  return s;
}

NoiseSpec NoiseSpec::tsybakov(double tau0, double alpha, double beta) {
  NoiseSpec s;
  s.kind = Kind::tsybakov;
  s.tau0 = tau0;
  s.alpha = alpha;
  s.beta = beta;
  return s;
}

void NoiseSpec::validate() const {
  if (kind == Kind::massart) {
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("massart tau must lie in (0,1]");
    return;
  }
  if (!(tau0 > 0.0 && tau0 <= 1.0)) throw ConfigError("tsybakov tau0 must lie in (0,1]");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("tsybakov alpha and beta must be positive");
  if (beta * std::pow(tau0, alpha) > 1.0 + 1e-12) throw ConfigError("tsybakov requires beta * tau0^alpha <= 1");
}

double GroundTruth::expected_cost(const SparseVector& biased, Label y) const {
  return biased.dot(weights.at(y));
}

std::vector<double> GroundTruth::expected_costs(const SparseVector& biased) const {
  std::vector<double> out(weights.size());
  for (Label y = 0; y < weights.size(); ++y) out[y] = expected_cost(biased, y);
  return out;
}

Label GroundTruth::best_label(const SparseVector& biased) const {
  const auto c = expected_costs(biased);
  return static_cast<Label>(std::min_element(c.begin(), c.end()) - c.begin());
}

double GroundTruth::margin(const SparseVector& biased) const {
  auto c = expected_costs(biased);
  if (c.size() < 2) return std::numeric_limits<double>::infinity();
  std::partial_sort(c.begin(), c.begin() + 2, c.end());
  return c[1] - c[0];
}

SparseVector with_bias(const SparseVector& x) {
  std::vector<FeatureEntry> e;
  e.reserve(x.nnz() + 1);
  e.push_back({0, 1.0});
  for (const auto& f : x.entries()) {
    if (f.index == 0) throw ConfigError("feature index 0 is reserved for the bias");
    e.push_back(f);
  }
  return SparseVector::from_entries(std::move(e));
}

namespace {

double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

// best[c] is the best label of cluster c.
std::vector<Label> best_labels(std::size_t k, std::mt19937_64& rng) {
  std::vector<Label> perm(k);
  std::iota(perm.begin(), perm.end(), Label{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

}  // namespace

SyntheticStream gen_stream(std::size_t num_labels, std::size_t dim, const NoiseSpec& spec, std::size_t n,
                           std::uint64_t seed, CostNoise noise) {
  spec.validate();
  const std::size_t k = num_labels;
  if (k < 2) throw ConfigError("synthetic streams need at least two labels");
  const bool tsy = spec.kind == NoiseSpec::Kind::tsybakov;
  if (dim < k) throw ConfigError("synthetic dimension must be at least the number of labels");
  if (tsy && dim < 2 * k) throw ConfigError("tsybakov streams need dimension at least twice the number of labels");

  std::mt19937_64 rng(seed);
  const auto full = static_cast<Eigen::Index>(dim + 1);
  GroundTruth truth;
  truth.noise = noise;
  truth.weights.assign(k, Eigen::VectorXd::Zero(full));
  const auto best = best_labels(k, rng);
  const std::size_t first_cont = tsy ? 2 * k + 1 : k + 1;

  if (!tsy) {
    // Base cost table per cluster plus a label-specific linear term bounded by perturb in absolute value.
    const double tau = spec.tau;
    const double perturb = std::min(0.05, (1.0 - tau) / 5.0);
    for (std::size_t c = 0; c < k; ++c) {
      const double low = uniform(rng, perturb, std::max(perturb, 1.0 - tau - 3.0 * perturb));
      for (Label y = 0; y < k; ++y) {
        const double base = y == best[c] ? low : uniform(rng, low + tau + 2.0 * perturb, std::max(low + tau + 2.0 * perturb, 1.0 - perturb));
        truth.weights[y][static_cast<Eigen::Index>(1 + c)] = base;
      }
    }
    if (perturb > 0.0 && dim >= first_cont) {
      for (Label y = 0; y < k; ++y) {
        std::vector<double> u(dim + 1 - first_cont);
        double l1 = 0.0;
        for (auto& v : u) {
          v = uniform(rng, -1.0, 1.0);
          l1 += std::abs(v);
        }
        if (l1 == 0.0) continue;
        for (std::size_t j = 0; j < u.size(); ++j) {
          truth.weights[y][static_cast<Eigen::Index>(first_cont + j)] = perturb * u[j] / l1;
        }
      }
    }
  } else {
    const double m_max = std::max(spec.tau0, 0.9);
    for (std::size_t c = 0; c < k; ++c) {
      const double low = uniform(rng, 0.0, 1.0 - m_max);
      const Label runner = best[(c + 1) % k];
      for (Label y = 0; y < k; ++y) {
        if (y == best[c]) {
          truth.weights[y][static_cast<Eigen::Index>(1 + c)] = low;
          continue;
        }
        const double extra = y == runner ? 0.0 : uniform(rng, 0.0, 1.0 - low - m_max);
        truth.weights[y][static_cast<Eigen::Index>(1 + c)] = low + extra;
        truth.weights[y][static_cast<Eigen::Index>(1 + k + c)] = 1.0;
      }
    }
  }

  SyntheticStream out;
  out.examples.reserve(n);
  const double mass = tsy ? spec.beta * std::pow(spec.tau0, spec.alpha) : 0.0;
  const double m_max = tsy ? std::max(spec.tau0, 0.9) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<FeatureEntry> f;
    const auto c = static_cast<std::size_t>(std::uniform_int_distribution<std::size_t>(0, k - 1)(rng));
    f.push_back({1 + c, 1.0});
    if (tsy) {
      // Inverse CDF: beta m^alpha on [0, tau0], the remaining mass uniform on [tau0, m_max].
      const double u = uniform(rng, 0.0, 1.0);
      double m;
      if (u <= mass) {
        m = std::pow(u / spec.beta, 1.0 / spec.alpha);
      } else {
        m = spec.tau0 + (mass < 1.0 ? (u - mass) / (1.0 - mass) : 0.0) * (m_max - spec.tau0);
      }
      if (m > 0.0) f.push_back({1 + k + c, m});
    }
    for (std::size_t j = first_cont; j <= dim; ++j) {
      if (uniform(rng, 0.0, 1.0) < 0.5) {
        const double v = uniform(rng, -1.0, 1.0);
        if (v != 0.0) f.push_back({j, v});
      }
    }
    LabeledExample ex;
    ex.features = SparseVector::from_entries(std::move(f));
    const SparseVector biased = with_bias(ex.features);
    std::vector<double> costs(k);
    for (Label y = 0; y < k; ++y) {
      const double mean = truth.expected_cost(biased, y);
      if (mean < -1e-12 || mean > 1.0 + 1e-12) throw NumericError("synthetic expected cost left [0,1]");
      const double p = std::clamp(mean, 0.0, 1.0);
      costs[y] = noise == CostNoise::none ? p : (uniform(rng, 0.0, 1.0) < p ? 1.0 : 0.0);
    }
    if (!tsy && truth.margin(biased) < spec.tau - 1e-12) throw NumericError("massart margin violated");
    ex.costs = CostVector::observed_all(std::move(costs));
    out.examples.push_back(std::move(ex));
  }
  out.truth = std::move(truth);
  return out;
}

CostInterval brute_force_cost_range(std::span<const Eigen::VectorXd> grid, const LabelState& state,
                                    const SparseVector& x) {
  if (grid.empty()) throw ContractError("brute-force grid must be non-empty");
  CostInterval out;
  out.lo = std::numeric_limits<double>::infinity();
  out.hi = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& theta : grid) {
    if (!state.satisfies_ledger(theta)) continue;
    const double p = x.dot(theta);
    out.lo = std::min(out.lo, p);
    out.hi = std::max(out.hi, p);
    any = true;
  }
  if (!any) {
    out.lo = 1.0;
    out.hi = 0.0;
    out.empty = true;
  }
  return out;
}

}  // namespace coal
