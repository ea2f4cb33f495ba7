#include "conetree/cps.hpp"

#include <cmath>
#include <stdexcept>

namespace conetree {

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Leaf-variable formulation of the price-system polytope. Terminal values
// determine the whole system through the martingale property, so the LP
// carries one variable per leaf and component; interior node values are
// conditional expectations and the margin rows push those expectations
// against every solvency-cone generator.
struct PolytopeLp {
  const Scenario& scn;
  double eps;
  std::vector<int> leaves;
  int width;  // 1+d
  std::vector<std::vector<std::pair<int, double>>> leaf_mix;  // node -> (leaf pos, cond prob)
  std::vector<double> leaf_prob;

  PolytopeLp(const Scenario& s, double eps_in) : scn(s), eps(eps_in) {
    leaves = scn.tree.leaves();
    width = scn.d + 1;
    const int nn = scn.tree.num_nodes();
    leaf_mix.assign(nn, {});
    for (size_t pos = 0; pos < leaves.size(); ++pos) {
      int id = leaves[pos];
      double p = 1.0;
      while (true) {
        leaf_mix[id].emplace_back(static_cast<int>(pos), p);
        const TreeNode& n = scn.tree.node(id);
        if (n.parent < 0) break;
        p *= n.prob;
        id = n.parent;
      }
      leaf_prob.push_back(scn.tree.node_probability(leaves[pos]));
    }
  }

  int num_vars() const { return static_cast<int>(leaves.size()) * width; }
  int var(int leaf_pos, int comp) const { return leaf_pos * width + comp; }

  // extra_cols appends free-standing columns (e.g. a slack) after the
  // leaf variables; margin rows give them `slack_coef * |g|` entries.
  LpProblem base(int extra_cols = 0, double slack_coef = 0.0) const {
    LpProblem lp;
    const int n = num_vars() + extra_cols;
    lp.objective.assign(n, 0.0);
    lp.lower.assign(n, 0.0);
    lp.upper.assign(n, kLpInfinity);

    int rows = 1;
    for (int id = 0; id < scn.tree.num_nodes(); ++id)
      rows += static_cast<int>(scn.cone_at(id).generators.size());
    lp.reserve_rows(rows);

    for (int id = 0; id < scn.tree.num_nodes(); ++id) {
      const SolvencyCone cone = scn.cone_at(id);
      for (const auto& g : cone.generators) {
        const double gn = norm2(g);
        std::vector<std::pair<int, double>> entries;
        entries.reserve(leaf_mix[id].size() * width + 1);
        for (auto [pos, pc] : leaf_mix[id])
          for (int i = 0; i < width; ++i)
            entries.emplace_back(var(pos, i), pc * (g[i] - eps * gn));
        if (extra_cols > 0 && slack_coef != 0.0)
          entries.emplace_back(num_vars(), -slack_coef * gn);
        lp.add_sparse_row(entries, RowSense::ge, 0.0);
      }
    }
    {
      std::vector<std::pair<int, double>> entries;
      for (size_t pos = 0; pos < leaves.size(); ++pos)
        entries.emplace_back(var(static_cast<int>(pos), 0), leaf_prob[pos]);
      lp.add_sparse_row(entries, RowSense::eq, 1.0);
    }
    return lp;
  }

  PriceSystem reconstruct(const std::vector<double>& x) const {
    PriceSystem ps;
    ps.z = AdaptedProcess(scn.tree.num_nodes(), width, 0.0);
    for (int id = 0; id < scn.tree.num_nodes(); ++id)
      for (auto [pos, pc] : leaf_mix[id])
        for (int i = 0; i < width; ++i)
          ps.z.at(id, i) += pc * x[var(pos, i)];
    return ps;
  }

  std::vector<double> objective_from(const NodeFunctional& f) const {
    if (f.a.dim() != width || f.a.num_nodes() != scn.tree.num_nodes())
      throw std::invalid_argument("cps: functional has wrong shape");
    // Path prefix sums push node coefficients down to the leaves:
    // sum_n P(n) <a_n, Z_n> = sum_leaf P(leaf) <sum_{n on path} a_n, Z_leaf>.
    AdaptedProcess acc(scn.tree.num_nodes(), width, 0.0);
    for (int k = 0; k <= scn.tree.num_periods(); ++k) {
      for (int id : scn.tree.nodes_at(k)) {
        const TreeNode& n = scn.tree.node(id);
        for (int i = 0; i < width; ++i)
          acc.at(id, i) =
              (n.parent >= 0 ? acc.at(n.parent, i) : 0.0) + f.a.at(id, i);
      }
    }
    std::vector<double> obj(num_vars(), 0.0);
    for (size_t pos = 0; pos < leaves.size(); ++pos)
      for (int i = 0; i < width; ++i)
        obj[var(static_cast<int>(pos), i)] =
            leaf_prob[pos] * acc.at(leaves[pos], i);
    return obj;
  }
};

void finalize_flags(PriceSystem& ps, const Scenario& scn, double eps) {
  double worst = kLpInfinity;
  double minz0 = kLpInfinity;
  for (int id = 0; id < scn.tree.num_nodes(); ++id) {
    std::vector<double> w(ps.z.dim());
    for (int i = 0; i < ps.z.dim(); ++i) w[i] = ps.z.at(id, i);
    worst = std::min(worst, polar_margin(scn.cone_at(id), w));
    minz0 = std::min(minz0, ps.z.at(id, 0));
  }
  ps.margin = worst;
  ps.strict = (worst >= eps - 1e-12) && (minz0 > 0.0);
}

}  // namespace

ScpsSearch find_scps(const Scenario& scenario, double eps) {
  scenario.validate();
  if (eps < 0.0) throw std::invalid_argument("find_scps: eps must be >= 0");
  PolytopeLp poly(scenario, eps);
  LpProblem lp = poly.base(1, 1.0);
  const int slack = poly.num_vars();
  // The normalization row bounds the system, which in turn bounds the
  // uniform margin slack; no explicit upper bound needed.
  lp.objective[slack] = 1.0;
  lp.sense = LpSense::maximize;

  ScpsSearch out;
  LpResult res = solve_lp(lp);
  out.status = res.status;
  if (res.status != LpStatus::optimal) return out;
  out.slack = res.x[slack];
  out.system = poly.reconstruct(res.x);

  double minz0 = kLpInfinity;
  for (int id = 0; id < scenario.tree.num_nodes(); ++id)
    minz0 = std::min(minz0, out.system.z.at(id, 0));
  if (minz0 < 1e-12) {
    // Degenerate vertex; blend with the largest-mass system to move off
    // the boundary while staying in the polytope.
    LpProblem lp2 = poly.base();
    for (size_t pos = 0; pos < poly.leaves.size(); ++pos)
      lp2.objective[poly.var(static_cast<int>(pos), 0)] = 1.0;
    lp2.sense = LpSense::maximize;
    LpResult res2 = solve_lp(lp2);
    if (res2.status == LpStatus::optimal) {
      PriceSystem other = poly.reconstruct(res2.x);
      for (int id = 0; id < scenario.tree.num_nodes(); ++id)
        for (int i = 0; i <= scenario.d; ++i)
          out.system.z.at(id, i) =
              0.5 * (out.system.z.at(id, i) + other.z.at(id, i));
    }
  }
  finalize_flags(out.system, scenario, eps);
  return out;
}

PriceSystemReport verify_price_system(const PriceSystem& ps,
                                      const Scenario& scenario, double eps,
                                      double tol) {
  PriceSystemReport r;
  const EventTree& tree = scenario.tree;
  if (ps.z.num_nodes() != tree.num_nodes() || ps.z.dim() != scenario.d + 1)
    throw std::invalid_argument("verify_price_system: shape mismatch");

  r.martingale_residual = martingale_residual(tree, ps.z);
  r.martingale_ok = r.martingale_residual <= tol;

  double worst = kLpInfinity, minz0 = kLpInfinity;
  for (int id = 0; id < tree.num_nodes(); ++id) {
    std::vector<double> w(ps.z.dim());
    for (int i = 0; i < ps.z.dim(); ++i) w[i] = ps.z.at(id, i);
    worst = std::min(worst, polar_margin(scenario.cone_at(id), w));
    minz0 = std::min(minz0, ps.z.at(id, 0));
  }
  r.worst_margin = worst;
  r.min_z0 = minz0;
  r.polar_ok = worst >= eps - tol;
  r.positive_ok = minz0 > 0.0;
  r.normalization_residual = std::abs(ps.z.at(tree.root(), 0) - 1.0);
  r.normalization_ok = r.normalization_residual <= tol;
  return r;
}

MeasureShadowPair to_measure_shadow_pair(const EventTree& tree,
                                         const PriceSystem& ps) {
  const int d = ps.z.dim() - 1;
  MeasureShadowPair out;
  out.shadow = AdaptedProcess(tree.num_nodes(), d);
  for (int id = 0; id < tree.num_nodes(); ++id) {
    const double z0 = ps.z.at(id, 0);
    if (!(z0 > 0.0))
      throw std::invalid_argument("to_measure_shadow_pair: Z0 must be > 0");
    for (int i = 0; i < d; ++i) out.shadow.at(id, i) = ps.z.at(id, i + 1) / z0;
  }
  for (int leaf : tree.leaves())
    out.leaf_weights.push_back(ps.z.at(leaf, 0) * tree.node_probability(leaf));
  return out;
}

PriceSystem from_measure_shadow_pair(const EventTree& tree,
                                     const MeasureShadowPair& pair) {
  const auto& leaves = tree.leaves();
  if (pair.leaf_weights.size() != leaves.size())
    throw std::invalid_argument("from_measure_shadow_pair: weight count");
  const int d = pair.shadow.dim();
  PriceSystem ps;
  ps.z = AdaptedProcess(tree.num_nodes(), d + 1, 0.0);
  // Z0 at a node is the conditional expectation of the terminal density.
  AdaptedProcess mass(tree.num_nodes(), 1, 0.0);
  for (size_t pos = 0; pos < leaves.size(); ++pos) {
    int id = leaves[pos];
    while (true) {
      mass.at(id) += pair.leaf_weights[pos];
      const TreeNode& n = tree.node(id);
      if (n.parent < 0) break;
      id = n.parent;
    }
  }
  for (int id = 0; id < tree.num_nodes(); ++id) {
    ps.z.at(id, 0) = mass.at(id) / tree.node_probability(id);
    for (int i = 0; i < d; ++i)
      ps.z.at(id, i + 1) = pair.shadow.at(id, i) * ps.z.at(id, 0);
  }
  return ps;
}

CpsOptimum optimize_over_cps(const Scenario& scenario,
                             const NodeFunctional& objective, double eps,
                             LpSense sense) {
  scenario.validate();
  PolytopeLp poly(scenario, eps);
  LpProblem lp = poly.base();
  lp.objective = poly.objective_from(objective);
  lp.sense = sense;
  CpsOptimum out;
  LpResult res = solve_lp(lp);
  out.status = res.status;
  if (res.status != LpStatus::optimal) return out;
  out.value = res.objective;
  out.system = poly.reconstruct(res.x);
  finalize_flags(out.system, scenario, eps);
  return out;
}

std::vector<CpsOptimum> optimize_over_cps_ladder(
    const Scenario& scenario, const NodeFunctional& objective,
    const std::vector<double>& eps_values, LpSense sense) {
  std::vector<CpsOptimum> out;
  for (double e : eps_values)
    out.push_back(optimize_over_cps(scenario, objective, e, sense));
  return out;
}

DomainReport effective_domain_check(const Scenario& scenario, double eps,
                                    double band) {
  scenario.validate();
  const EventTree& tree = scenario.tree;
  NodeFunctional f = NodeFunctional::zero(tree, scenario.d);
  const AdaptedProcess w = growth_weight_path(tree, scenario.habit);
  for (int k = 0; k < tree.num_periods(); ++k)
    for (int id : tree.nodes_at(k))
      f.a.at(id, 0) -= scenario.habit.z * tree.dt(k) * w.at(id);
  for (int leaf : tree.leaves()) f.a.at(leaf, 0) += scenario.endowment_cash(leaf);

  CpsOptimum opt = optimize_over_cps(scenario, f, eps, LpSense::minimize);
  DomainReport rep;
  rep.status = opt.status;
  if (opt.status != LpStatus::optimal) return rep;
  rep.min_value = scenario.x + opt.value;
  rep.certificate = opt.system;
  if (rep.min_value > band)
    rep.cls = DomainClass::interior;
  else if (rep.min_value >= -band)
    rep.cls = DomainClass::boundary;
  else
    rep.cls = DomainClass::outside;
  return rep;
}

std::string to_string(DomainClass cls) {
  switch (cls) {
    case DomainClass::interior: return "interior";
    case DomainClass::boundary: return "boundary";
    case DomainClass::outside: return "outside";
  }
  return "?";
}

}  // namespace conetree
