#pragma once

#include <vector>

#include "conetree/cones.hpp"
#include "conetree/event_tree.hpp"
#include "conetree/habit.hpp"
#include "conetree/preferences.hpp"

namespace conetree {

struct Tolerances {
  double eps = 1e-4;   // interior margin for strict price systems
  double tol = 1e-8;   // solver convergence target
  int max_cuts = 64;
};

/// Complete market-and-preferences description: the event tree, per-node
/// risky prices, proportional cost factors, habit data, utility, initial
/// cash x (risky positions start at zero), and static endowment holdings q
/// with nonnegative terminal payoffs per leaf.
struct Scenario {
  EventTree tree;
  int d = 1;
  AdaptedProcess prices;       // dim d per node
  std::vector<double> lambda;  // (1+d)^2 row-major, zero diagonal
  HabitParams habit;
  UtilitySpec utility;
  double x = 0.0;
  std::vector<double> q;
  std::vector<std::vector<double>> endowment_payoffs;  // per leaf, each size N
  Tolerances tolerances;

  int num_endowments() const { return static_cast<int>(q.size()); }

  void validate() const;

  BidAskMatrix bid_ask_at(int node) const;
  SolvencyCone cone_at(int node) const;

  /// Position of a leaf id inside tree.leaves(), or -1.
  int leaf_index(int node) const;

  /// q . E_T at one leaf (0 when there are no endowments).
  double endowment_cash(int leaf) const;
};

/// Convenience builders used by tests and fixtures.
EventTree make_chain_tree(const std::vector<double>& times);
EventTree make_binary_tree(const std::vector<double>& times, double up_prob);

/// Uniform grid 0..T with m steps.
std::vector<double> uniform_grid(double horizon, int steps);

}  // namespace conetree
