#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "conetree/scenario.hpp"

namespace conetree::testing {

/// One-period binary market with root price 1 and leaf prices (up, down).
inline Scenario one_period(double s_up, double s_down, double p_up,
                           double lambda, double eps) {
  Scenario scn;
  scn.tree = make_binary_tree({0.0, 1.0}, p_up);
  scn.d = 1;
  scn.prices = AdaptedProcess(scn.tree.num_nodes(), 1, 1.0);
  scn.prices.at(1, 0) = s_up;
  scn.prices.at(2, 0) = s_down;
  scn.lambda = {0.0, lambda, lambda, 0.0};
  scn.habit = HabitParams::constants(scn.tree, 0.0, 0.0, 0.0);
  scn.utility.kind = UtilityKind::log_utility;
  scn.x = 1.0;
  scn.tolerances.eps = eps;
  return scn;
}

/// Recombining-price (but non-recombining-tree) binomial market on an
/// arbitrary grid.
inline Scenario binomial_on_grid(const std::vector<double>& times, double up,
                                 double down, double p_up, double lambda,
                                 double eps) {
  Scenario scn;
  scn.tree = make_binary_tree(times, p_up);
  scn.d = 1;
  scn.prices = AdaptedProcess(scn.tree.num_nodes(), 1, 1.0);
  for (int id = 1; id < scn.tree.num_nodes(); ++id) {
    const TreeNode& n = scn.tree.node(id);
    const double parent_price = scn.prices.at(n.parent, 0);
    scn.prices.at(id, 0) = parent_price * (id % 2 == 1 ? up : down);
  }
  scn.lambda = {0.0, lambda, lambda, 0.0};
  scn.habit = HabitParams::constants(scn.tree, 0.0, 0.0, 0.0);
  scn.utility.kind = UtilityKind::log_utility;
  scn.x = 1.0;
  scn.tolerances.eps = eps;
  return scn;
}

inline Scenario binomial(int periods, double horizon, double up, double down,
                         double p_up, double lambda, double eps) {
  return binomial_on_grid(uniform_grid(horizon, periods), up, down, p_up,
                          lambda, eps);
}

/// Uniform grid whose first cell is shrunk to `first_dt`; initial-value
/// formulas of the continuum are then matched to within that width.
inline std::vector<double> pinched_grid(double horizon, int steps,
                                        double first_dt) {
  std::vector<double> t{0.0, first_dt};
  for (int k = 1; k < steps; ++k)
    t.push_back(first_dt + (horizon - first_dt) * k / (steps - 1));
  t.back() = horizon;
  return t;
}

/// Single-branch market (constant price path).
inline Scenario chain(int periods, double horizon) {
  Scenario scn;
  scn.tree = make_chain_tree(uniform_grid(horizon, periods));
  scn.d = 1;
  scn.prices = AdaptedProcess(scn.tree.num_nodes(), 1, 1.0);
  scn.lambda = {0.0, 0.05, 0.05, 0.0};
  scn.habit = HabitParams::constants(scn.tree, 0.0, 0.0, 0.0);
  scn.utility.kind = UtilityKind::log_utility;
  scn.x = 1.0;
  scn.tolerances.eps = 1e-6;
  return scn;
}

/// Random non-uniform grid on [0, horizon].
inline std::vector<double> random_grid(std::mt19937_64& rng, int periods,
                                       double horizon) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<double> steps(periods);
  double total = 0.0;
  for (double& s : steps) total += (s = u(rng));
  std::vector<double> t{0.0};
  for (int k = 0; k < periods; ++k)
    t.push_back(t.back() + horizon * steps[k] / total);
  t.back() = horizon;
  return t;
}

/// Random binary-tree market with random habit rates, for property tests.
struct RandomScenarioOptions {
  int max_periods = 3;
  bool random_habit = true;
  bool random_endowment = false;
  double max_lambda = 0.15;
};

inline Scenario random_scenario(std::mt19937_64& rng,
                                const RandomScenarioOptions& opt = {}) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int m = std::min(opt.max_periods,
                         1 + static_cast<int>(u01(rng) * opt.max_periods));
  Scenario scn;
  scn.tree = make_binary_tree(random_grid(rng, m, 1.0),
                              0.3 + 0.4 * u01(rng));
  scn.d = 1;
  scn.prices = AdaptedProcess(scn.tree.num_nodes(), 1, 1.0);
  for (int id = 1; id < scn.tree.num_nodes(); ++id) {
    const TreeNode& n = scn.tree.node(id);
    const double move = (id % 2 == 1) ? 1.05 + 0.25 * u01(rng)
                                      : 0.75 + 0.2 * u01(rng);
    scn.prices.at(id, 0) = scn.prices.at(n.parent, 0) * move;
  }
  const double lam = 0.01 + opt.max_lambda * u01(rng);
  scn.lambda = {0.0, lam, lam, 0.0};
  if (opt.random_habit) {
    scn.habit = HabitParams::constants(scn.tree, u01(rng), u01(rng),
                                       0.4 * u01(rng));
  } else {
    scn.habit = HabitParams::constants(scn.tree, 0.0, 0.0, 0.0);
  }
  scn.utility.kind = u01(rng) < 0.5 ? UtilityKind::log_utility
                                    : UtilityKind::power;
  scn.utility.p = 0.5;
  scn.x = 1.0 + u01(rng);
  if (opt.random_endowment && u01(rng) < 0.7) {
    scn.q = {-0.3 + 0.6 * u01(rng)};
    scn.endowment_payoffs.assign(scn.tree.leaves().size(), {0.0});
    const auto& leaves = scn.tree.leaves();
    for (size_t i = 0; i < leaves.size(); ++i)
      scn.endowment_payoffs[i][0] =
          std::max(scn.prices.at(leaves[i], 0) - 0.9, 0.0);
  }
  scn.tolerances.eps = 1e-5;
  scn.tolerances.tol = 1e-9;
  return scn;
}

/// Random positive consumption plan.
inline AdaptedProcess random_plan(std::mt19937_64& rng, const EventTree& tree,
                                  double lo = 0.1, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  AdaptedProcess c(tree.num_nodes(), 1);
  for (int id = 0; id < tree.num_nodes(); ++id) c.at(id) = u(rng);
  return c;
}

}  // namespace conetree::testing
