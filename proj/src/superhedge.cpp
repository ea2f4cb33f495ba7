#include "conetree/superhedge.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace conetree {

Claim Claim::cash(const Scenario& scn, double amount) {
  Claim c;
  c.terminal.assign(scn.tree.leaves().size(),
                    std::vector<double>(scn.d + 1, 0.0));
  for (auto& row : c.terminal) row[0] = amount;
  return c;
}

Claim Claim::one_share(const Scenario& scn, int asset) {
  if (asset < 1 || asset > scn.d)
    throw std::invalid_argument("claim: asset index out of range");
  Claim c;
  c.terminal.assign(scn.tree.leaves().size(),
                    std::vector<double>(scn.d + 1, 0.0));
  for (auto& row : c.terminal) row[asset] = 1.0;
  return c;
}

Claim Claim::call(const Scenario& scn, int asset, double strike) {
  if (asset < 1 || asset > scn.d)
    throw std::invalid_argument("claim: asset index out of range");
  Claim c;
  const auto& leaves = scn.tree.leaves();
  c.terminal.assign(leaves.size(), std::vector<double>(scn.d + 1, 0.0));
  for (size_t i = 0; i < leaves.size(); ++i) {
    const double s = scn.prices.at(leaves[i], asset - 1);
    c.terminal[i][0] = std::max(s - strike, 0.0);
  }
  return c;
}

SelfFinancingReport self_financing_check(
    const PortfolioProcess& v, const Scenario& scn,
    const std::optional<Claim>& terminal_target) {
  const EventTree& tree = scn.tree;
  if (v.v.dim() != scn.d + 1 || v.v.num_nodes() != tree.num_nodes())
    throw std::invalid_argument("self_financing_check: shape mismatch");
  SelfFinancingReport rep;
  for (int id = 0; id < tree.num_nodes(); ++id) {
    const TreeNode& n = tree.node(id);
    if (n.children.empty()) continue;
    const SolvencyCone cone = scn.cone_at(id);
    for (int c : n.children) {
      std::vector<double> incr(scn.d + 1);
      for (int i = 0; i <= scn.d; ++i) incr[i] = v.v.at(id, i) - v.v.at(c, i);
      if (!cone_contains(cone, incr)) {
        rep.ok = false;
        rep.violations.emplace_back(id, c);
      }
    }
  }
  if (terminal_target) {
    const auto& leaves = tree.leaves();
    for (size_t i = 0; i < leaves.size(); ++i) {
      const SolvencyCone cone = scn.cone_at(leaves[i]);
      std::vector<double> incr(scn.d + 1);
      for (int j = 0; j <= scn.d; ++j)
        incr[j] = v.v.at(leaves[i], j) - terminal_target->terminal[i][j];
      if (!cone_contains(cone, incr)) {
        rep.ok = false;
        rep.violations.emplace_back(leaves[i], leaves[i]);
      }
    }
  }
  return rep;
}

HedgePrice superhedge_price(const Scenario& scn, const Claim& g, double eps) {
  const auto& leaves = scn.tree.leaves();
  if (g.terminal.size() != leaves.size())
    throw std::invalid_argument("superhedge_price: one payoff row per leaf");
  NodeFunctional f = NodeFunctional::zero(scn.tree, scn.d);
  for (size_t i = 0; i < leaves.size(); ++i)
    for (int j = 0; j <= scn.d; ++j) f.a.at(leaves[i], j) = g.terminal[i][j];
  CpsOptimum opt = optimize_over_cps(scn, f, eps, LpSense::maximize);
  HedgePrice out;
  out.status = opt.status;
  out.price = opt.value;
  out.certificate = opt.system;
  return out;
}

BudgetCheck budget_feasible(const AdaptedProcess& c, const Scenario& scn,
                            double eps, double tol) {
  const EventTree& tree = scn.tree;
  if (c.dim() != 1 || c.num_nodes() != tree.num_nodes())
    throw std::invalid_argument("budget_feasible: scalar plan expected");
  NodeFunctional f = NodeFunctional::zero(tree, scn.d);
  for (int k = 0; k < tree.num_periods(); ++k)
    for (int id : tree.nodes_at(k)) f.a.at(id, 0) += tree.dt(k) * c.at(id);
  for (int leaf : tree.leaves()) f.a.at(leaf, 0) -= scn.endowment_cash(leaf);

  CpsOptimum opt = optimize_over_cps(scn, f, eps, LpSense::maximize);
  BudgetCheck out;
  out.status = opt.status;
  if (opt.status != LpStatus::optimal) return out;
  out.worst_value = opt.value;
  out.slack = scn.x - opt.value;
  out.worst_system = opt.system;
  out.feasible = opt.value <= scn.x + tol * (1.0 + std::abs(scn.x));
  return out;
}

AdaptedProcess maximal_dominating_wealth(const EventTree& tree,
                                         const std::vector<double>& q_leaf,
                                         const std::vector<double>& h_leaf) {
  const auto& leaves = tree.leaves();
  if (q_leaf.size() != leaves.size() || h_leaf.size() != leaves.size())
    throw std::invalid_argument("maximal_dominating_wealth: leaf size mismatch");
  // Q mass per node, then X = E_Q[h | node].
  AdaptedProcess mass(tree.num_nodes(), 1, 0.0);
  AdaptedProcess acc(tree.num_nodes(), 1, 0.0);
  for (size_t pos = 0; pos < leaves.size(); ++pos) {
    if (q_leaf[pos] < 0.0)
      throw std::invalid_argument("maximal_dominating_wealth: Q must be >= 0");
    int id = leaves[pos];
    while (true) {
      mass.at(id) += q_leaf[pos];
      acc.at(id) += q_leaf[pos] * h_leaf[pos];
      const TreeNode& n = tree.node(id);
      if (n.parent < 0) break;
      id = n.parent;
    }
  }
  AdaptedProcess x(tree.num_nodes(), 1, 0.0);
  for (int id = 0; id < tree.num_nodes(); ++id) {
    if (!(mass.at(id) > 0.0))
      throw std::invalid_argument(
          "maximal_dominating_wealth: Q vanishes on a subtree");
    x.at(id) = acc.at(id) / mass.at(id);
  }
  return x;
}

AcceptabilityReport acceptability_check(const PortfolioProcess& v,
                                        const Scenario& scn, double eps,
                                        int samples, unsigned long seed) {
  const EventTree& tree = scn.tree;
  const auto& leaves = tree.leaves();
  AcceptabilityReport rep;

  std::vector<double> total_endow(leaves.size(), 0.0);
  for (size_t i = 0; i < leaves.size(); ++i)
    for (int e = 0; e < scn.num_endowments(); ++e)
      total_endow[i] += scn.endowment_payoffs[i][e];

  // Sampled strict systems along random objectives. The first sample is the
  // canonical max-slack system so the report never relies on randomness
  // alone.
  std::vector<PriceSystem> systems;
  {
    ScpsSearch s = find_scps(scn, eps);
    if (s.status == LpStatus::optimal) systems.push_back(s.system);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int attempt = 0;
       attempt < 4 * samples && static_cast<int>(systems.size()) < samples;
       ++attempt) {
    NodeFunctional f = NodeFunctional::zero(tree, scn.d);
    for (int leaf : leaves)
      for (int i = 0; i <= scn.d; ++i) f.a.at(leaf, i) = gauss(rng);
    CpsOptimum opt = optimize_over_cps(scn, f, eps, LpSense::maximize);
    if (opt.status != LpStatus::optimal) break;
    bool positive = true;
    for (int id = 0; id < tree.num_nodes() && positive; ++id)
      positive = opt.system.z.at(id, 0) > 1e-12;
    if (positive) systems.push_back(opt.system);
  }
  rep.sample_count = static_cast<int>(systems.size());
  if (systems.empty()) return rep;

  // Sufficient test 1: constant floor (admissibility). One constant must
  // work for every sampled system and dominate the terminal value in the
  // cone order.
  {
    double need = 0.0;
    for (const auto& ps : systems) {
      for (int id = 0; id < tree.num_nodes(); ++id) {
        double pair = 0.0;
        for (int i = 0; i <= scn.d; ++i) pair += v.v.at(id, i) * ps.z.at(id, i);
        need = std::max(need, -pair / ps.z.at(id, 0));
      }
    }
    const double a = need + 1e-9;
    bool terminal_ok = true;
    for (int leaf : leaves) {
      std::vector<double> vt(scn.d + 1);
      for (int i = 0; i <= scn.d; ++i) vt[i] = v.v.at(leaf, i);
      vt[0] += a;
      if (!cone_contains(scn.cone_at(leaf), vt)) {
        terminal_ok = false;
        break;
      }
    }
    rep.admissible = terminal_ok && std::isfinite(a);
  }

  // Sufficient test 2: floor a + (1-l) k sum_i (S_t^i - S_0^i) with the
  // smallest flat short size k covering the portfolio.
  {
    double k_short = 0.0;
    for (int id = 0; id < tree.num_nodes(); ++id)
      for (int i = 1; i <= scn.d; ++i)
        k_short = std::max(k_short, -v.v.at(id, i));
    double lam = 0.0;
    for (int i = 1; i <= scn.d; ++i) lam = std::max(lam, scn.lambda[i]);
    double s0 = 0.0;
    for (int i = 0; i < scn.d; ++i) s0 += scn.prices.at(tree.root(), i);
    const double a = (1.0 - lam) * k_short * s0 + 1e-9;
    auto floor_at = [&](int id) {
      double st = 0.0;
      for (int i = 0; i < scn.d; ++i) st += scn.prices.at(id, i);
      return a + (1.0 - lam) * k_short * (st - s0);
    };
    bool ok = true;
    for (const auto& ps : systems) {
      for (int id = 0; id < tree.num_nodes() && ok; ++id) {
        double pair = ps.z.at(id, 0) * floor_at(id);
        for (int i = 0; i <= scn.d; ++i) pair += v.v.at(id, i) * ps.z.at(id, i);
        ok = pair >= -1e-9;
      }
      if (!ok) break;
    }
    for (size_t i = 0; i < leaves.size() && ok; ++i) {
      std::vector<double> vt(scn.d + 1);
      for (int j = 0; j <= scn.d; ++j) vt[j] = v.v.at(leaves[i], j);
      vt[0] += floor_at(leaves[i]);
      ok = cone_contains(scn.cone_at(leaves[i]), vt);
    }
    rep.floor_ok = ok;
  }

  // Full sampled certificate with the dominating wealth per shadow market.
  bool all_ok = true;
  for (const auto& ps : systems) {
    AcceptabilityPair pr;
    MeasureShadowPair pair = to_measure_shadow_pair(tree, ps);
    AdaptedProcess xw =
        maximal_dominating_wealth(tree, pair.leaf_weights, total_endow);
    pr.terminal_ok = true;
    for (size_t i = 0; i < leaves.size(); ++i) {
      std::vector<double> vt(scn.d + 1);
      for (int j = 0; j <= scn.d; ++j) vt[j] = v.v.at(leaves[i], j);
      vt[0] += xw.at(leaves[i]);
      if (!cone_contains(scn.cone_at(leaves[i]), vt)) {
        pr.terminal_ok = false;
        break;
      }
    }
    pr.pairing_ok = true;
    double worst = kLpInfinity;
    for (int id = 0; id < tree.num_nodes(); ++id) {
      double val = ps.z.at(id, 0) * xw.at(id);
      for (int i = 0; i <= scn.d; ++i) val += v.v.at(id, i) * ps.z.at(id, i);
      if (val < worst) {
        worst = val;
        pr.worst_node = id;
        pr.worst_value = val;
      }
    }
    pr.pairing_ok = worst >= -1e-9;
    all_ok = all_ok && pr.pairing_ok && pr.terminal_ok;
    rep.pairs.push_back(pr);
  }
  rep.acceptable = all_ok;
  return rep;
}

}  // namespace conetree
