#pragma once

#include <optional>
#include <vector>

#include "conetree/cps.hpp"
#include "conetree/scenario.hpp"

namespace conetree {

/// Holdings in units of each asset, one vector per node.
struct PortfolioProcess {
  AdaptedProcess v;  // dim 1+d
};

/// Terminal vector payoff, one row per leaf in tree.leaves() order.
struct Claim {
  std::vector<std::vector<double>> terminal;  // each size 1+d

  static Claim cash(const Scenario& scn, double amount);
  static Claim one_share(const Scenario& scn, int asset);  // asset in 1..d
  static Claim call(const Scenario& scn, int asset, double strike);
};

struct SelfFinancingReport {
  bool ok = true;
  std::vector<std::pair<int, int>> violations;  // (from node, to node)
};

/// Checks V_child - V_node in -K_node for every transition (the cone at the
/// left end of the interval governs the trade), plus an optional terminal
/// liquidation target at the leaves.
SelfFinancingReport self_financing_check(
    const PortfolioProcess& v, const Scenario& scn,
    const std::optional<Claim>& terminal_target = std::nullopt);

struct HedgePrice {
  LpStatus status = LpStatus::infeasible;
  double price = 0.0;
  PriceSystem certificate;
};

/// Superhedging price: sup over the eps polytope of E[<g, Z_T>], the least
/// initial cash whose dominating portfolio exists for every pricing system.
HedgePrice superhedge_price(const Scenario& scn, const Claim& g, double eps);

struct BudgetCheck {
  bool feasible = false;
  double worst_value = 0.0;  // sup_Z E[int c Z0 dt] - E[q.E_T Z0_T]
  double slack = 0.0;        // x - worst_value
  PriceSystem worst_system;
  LpStatus status = LpStatus::infeasible;
};

/// Financing test for a consumption rate plan: feasible iff the worst-case
/// funding cost over the eps polytope stays within x (up to tol).
BudgetCheck budget_feasible(const AdaptedProcess& c, const Scenario& scn,
                            double eps, double tol = 1e-8);

/// Least wealth process dominating the terminal claim h in the frictionless
/// shadow market: backward conditional expectations under Q. Coincides with
/// the minimal superhedge wherever one-step markets are complete, and is a
/// Q-martingale with X_T = h by construction.
AdaptedProcess maximal_dominating_wealth(const EventTree& tree,
                                         const std::vector<double>& q_leaf,
                                         const std::vector<double>& h_leaf);

struct AcceptabilityPair {
  bool pairing_ok = false;
  bool terminal_ok = false;
  int worst_node = -1;
  double worst_value = 0.0;
};

struct AcceptabilityReport {
  bool admissible = false;   // constant-floor sufficient test
  bool floor_ok = false;     // moving-floor sufficient test
  bool acceptable = false;   // sampled certificate over (Q, S~) pairs
  int sample_count = 0;
  std::vector<AcceptabilityPair> pairs;
};

/// Desk-scale acceptability certificate: first tries the constant-floor and
/// the price-shift-floor sufficient criteria, then verifies the pairing
/// <V + (X,0), Z> >= 0 against a sampled family of strict systems, where X
/// dominates the total endowment in each sampled shadow market. The result
/// is a certificate over the sampled family, not a proof over all systems.
AcceptabilityReport acceptability_check(const PortfolioProcess& v,
                                        const Scenario& scn, double eps,
                                        int samples = 16,
                                        unsigned long seed = 12345);

}  // namespace conetree
