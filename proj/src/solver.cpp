#include "conetree/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace conetree {

namespace {

struct Workspace {
  const Scenario& scn;
  Utility util;
  std::vector<int> cons_nodes;   // time index < M
  std::vector<double> rho;       // P(n) dt_k per consumption node
  std::vector<int> node_level;   // time index per node
  AdaptedProcess w;               // growth weights

  explicit Workspace(const Scenario& s)
      : scn(s), util(s.utility, s.tree.num_periods() + 1),
        w(growth_weight_path(s.tree, s.habit)) {
    const EventTree& tree = s.tree;
    node_level.resize(tree.num_nodes());
    for (int id = 0; id < tree.num_nodes(); ++id)
      node_level[id] = tree.node(id).time_index;
    for (int k = 0; k < tree.num_periods(); ++k)
      for (int id : tree.nodes_at(k)) {
        cons_nodes.push_back(id);
        rho.push_back(tree.node_probability(id) * tree.dt(k));
      }
  }
};

Cut make_cut(const Workspace& ws, const PriceSystem& system) {
  const Scenario& scn = ws.scn;
  const EventTree& tree = scn.tree;
  Cut cut;
  cut.system = system;
  AdaptedProcess z0(tree.num_nodes(), 1);
  for (int id = 0; id < tree.num_nodes(); ++id) z0.at(id) = system.z.at(id, 0);
  cut.gamma = gamma_process(tree, z0, scn.habit);
  double p0 = 0.0;
  for (size_t i = 0; i < ws.cons_nodes.size(); ++i)
    p0 += ws.rho[i] * ws.w.at(ws.cons_nodes[i]) * z0.at(ws.cons_nodes[i]);
  cut.p0 = p0;
  cut.p.assign(scn.num_endowments(), 0.0);
  const auto& leaves = tree.leaves();
  for (size_t pos = 0; pos < leaves.size(); ++pos) {
    const double pw = tree.node_probability(leaves[pos]) * z0.at(leaves[pos]);
    for (int i = 0; i < scn.num_endowments(); ++i)
      cut.p[i] += pw * scn.endowment_payoffs[pos][i];
  }
  cut.bound = scn.x - scn.habit.z * cut.p0;
  for (int i = 0; i < scn.num_endowments(); ++i)
    cut.bound += scn.q[i] * cut.p[i];
  return cut;
}

struct InnerResult {
  std::vector<double> lambda;
  std::vector<double> big_lambda;  // per consumption node
  double phi = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Smooth dual of the cut-restricted problem:
//   Phi(l) = sum_n rho_n V(t_n, sum_j l_j Gamma^j_n) + sum_j l_j b_j,  l >= 0.
// Projected gradient with Barzilai-Borwein steps and a nonmonotone
// backtracking line search; the dimension equals the number of cuts.
class InnerProblem {
 public:
  InnerProblem(const Workspace& ws, const std::vector<Cut>& cuts)
      : ws_(ws), cuts_(cuts) {}

  double phi(const std::vector<double>& lam, std::vector<double>& big) const {
    mix(lam, big);
    double val = 0.0;
    for (size_t i = 0; i < ws_.cons_nodes.size(); ++i) {
      if (!(big[i] > 0.0)) return kLpInfinity;
      val += ws_.rho[i] *
             ws_.util.conjugate(ws_.node_level[ws_.cons_nodes[i]], big[i]);
    }
    for (size_t j = 0; j < cuts_.size(); ++j) val += lam[j] * cuts_[j].bound;
    return val;
  }

  void grad(const std::vector<double>& big, std::vector<double>& g) const {
    g.assign(cuts_.size(), 0.0);
    std::vector<double> vprime(ws_.cons_nodes.size());
    for (size_t i = 0; i < ws_.cons_nodes.size(); ++i)
      vprime[i] = -ws_.util.inverse_marginal(
          ws_.node_level[ws_.cons_nodes[i]], big[i]);
    for (size_t j = 0; j < cuts_.size(); ++j) {
      double s = cuts_[j].bound;
      for (size_t i = 0; i < ws_.cons_nodes.size(); ++i)
        s += ws_.rho[i] * vprime[i] * cuts_[j].gamma.at(ws_.cons_nodes[i]);
      g[j] = s;
    }
  }

  InnerResult minimize(std::vector<double> lam, double target) const {
    InnerResult res;
    const size_t m = cuts_.size();
    std::vector<double> big, g(m), g_old(m), lam_old(m), trial, big_trial;
    double f = phi(lam, big);
    if (!std::isfinite(f)) {
      // fall back to a uniform positive start
      lam.assign(m, 1.0);
      f = phi(lam, big);
    }
    grad(big, g);
    double step = 1.0 / (1.0 + std::abs(f));
    std::vector<double> recent{f};

    const int max_iter = 100000;
    int it = 0;
    for (; it < max_iter; ++it) {
      // KKT residual: projected gradient plus pairing defect.
      double kkt = 0.0, pairing = 0.0, scale = 0.0;
      for (size_t j = 0; j < m; ++j) {
        const double pg = lam[j] - std::max(0.0, lam[j] - g[j]);
        kkt = std::max(kkt, std::abs(pg));
        pairing += lam[j] * g[j];
        scale = std::max(scale, std::abs(lam[j] * cuts_[j].bound));
      }
      if (kkt <= target * (1.0 + scale) &&
          std::abs(pairing) <= target * (1.0 + scale)) {
        res.converged = true;
        break;
      }

      lam_old = lam;
      g_old = g;
      double t = step;
      double fnew = kLpInfinity;
      for (int bt = 0; bt < 60; ++bt) {
        trial = lam;
        for (size_t j = 0; j < m; ++j)
          trial[j] = std::max(0.0, lam[j] - t * g[j]);
        fnew = phi(trial, big_trial);
        double descent = 0.0;
        for (size_t j = 0; j < m; ++j)
          descent += g[j] * (trial[j] - lam[j]);
        const double fref = *std::max_element(recent.begin(), recent.end());
        if (std::isfinite(fnew) && fnew <= fref + 1e-4 * descent) break;
        t *= 0.5;
      }
      if (!std::isfinite(fnew)) break;
      lam = trial;
      big = big_trial;
      f = fnew;
      recent.push_back(f);
      if (recent.size() > 8) recent.erase(recent.begin());
      grad(big, g);

      double sy = 0.0, ss = 0.0;
      for (size_t j = 0; j < m; ++j) {
        const double dl = lam[j] - lam_old[j];
        sy += dl * (g[j] - g_old[j]);
        ss += dl * dl;
      }
      step = (sy > 1e-300) ? std::clamp(ss / sy, 1e-12, 1e12)
                           : std::min(step * 2.0, 1e12);
    }
    res.lambda = std::move(lam);
    res.big_lambda = std::move(big);
    res.phi = f;
    res.iterations = it;
    return res;
  }

 private:
  void mix(const std::vector<double>& lam, std::vector<double>& big) const {
    big.assign(ws_.cons_nodes.size(), 0.0);
    for (size_t j = 0; j < cuts_.size(); ++j) {
      const double l = lam[j];
      if (l == 0.0) continue;
      for (size_t i = 0; i < ws_.cons_nodes.size(); ++i)
        big[i] += l * cuts_[j].gamma.at(ws_.cons_nodes[i]);
    }
  }

  const Workspace& ws_;
  const std::vector<Cut>& cuts_;
};

// Closed-form single-cut initializer: solve sum rho I(t, l Gamma) Gamma = b.
double initial_multiplier(const Workspace& ws, const Cut& cut) {
  const double b = std::max(cut.bound, 1e-300);
  if (ws.scn.utility.kind == UtilityKind::log_utility) {
    double t_total = 0.0;
    for (size_t i = 0; i < ws.cons_nodes.size(); ++i)
      t_total += ws.rho[i] * ws.util.weight(ws.node_level[ws.cons_nodes[i]]);
    return t_total / b;
  }
  const double p = ws.scn.utility.p;
  const double q = p / (p - 1.0);
  double s = 0.0;
  for (size_t i = 0; i < ws.cons_nodes.size(); ++i) {
    const int k = ws.node_level[ws.cons_nodes[i]];
    const double wgt = ws.util.weight(k);
    s += ws.rho[i] * std::pow(wgt, -1.0 / (p - 1.0)) *
         std::pow(cut.gamma.at(ws.cons_nodes[i]), q);
  }
  return std::pow(b / s, p - 1.0);
}

// Node coefficients of Z |-> E[int (ctilde + z w) Gamma(Z) dt] - E[q.E Z0_T]
// pushed onto Z0 through the adjoint of the Gamma recursion.
NodeFunctional violation_functional(const Workspace& ws,
                                    const std::vector<double>& ctilde_cons) {
  const Scenario& scn = ws.scn;
  const EventTree& tree = scn.tree;
  NodeFunctional f = NodeFunctional::zero(tree, scn.d);

  // Direct Z0 terms: (ctilde + z w) dt at consumption nodes, endowment at
  // the leaves. Only net consumption is priced by the full dual weight, so
  // the adjoint sweep below carries ctilde alone.
  std::vector<double> weight(tree.num_nodes(), 0.0);  // rho_n ctilde_n delta_n
  for (size_t i = 0; i < ws.cons_nodes.size(); ++i) {
    const int id = ws.cons_nodes[i];
    const int k = ws.node_level[id];
    f.a.at(id, 0) += tree.dt(k) * (ctilde_cons[i] + scn.habit.z * ws.w.at(id));
    weight[id] = ws.rho[i] * ctilde_cons[i] * scn.habit.delta.at(id);
  }
  for (int leaf : tree.leaves())
    f.a.at(leaf, 0) -= scn.endowment_cash(leaf);

  // Adjoint sweep of H_n = dt Z0_n + e^{beta dt} E[H_child | n]: weights u
  // flow down the tree and deposit dt coefficients on Z0.
  std::vector<double> u(tree.num_nodes(), 0.0);
  for (int k = 0; k < tree.num_periods(); ++k) {
    const double dt = tree.dt(k);
    for (int id : tree.nodes_at(k)) {
      u[id] += weight[id];
      if (u[id] == 0.0) continue;
      f.a.at(id, 0) += u[id] * dt / tree.node_probability(id);
      const double beta = scn.habit.delta.at(id) - scn.habit.alpha.at(id);
      const double carry = u[id] * std::exp(beta * dt);
      for (int c : tree.node(id).children) u[c] += carry * tree.node(c).prob;
    }
  }
  return f;
}

double cosine(const AdaptedProcess& a, const AdaptedProcess& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (int id = 0; id < a.num_nodes(); ++id) {
    ab += a.at(id) * b.at(id);
    aa += a.at(id) * a.at(id);
    bb += b.at(id) * b.at(id);
  }
  return ab / std::sqrt(aa * bb);
}

}  // namespace

double Solution::pairing_bound(const Scenario& scn) const {
  double v = scn.x * y;
  if (!r.empty()) {
    v -= scn.habit.z * r[0];
    for (int i = 0; i < scn.num_endowments(); ++i) v += scn.q[i] * r[i + 1];
  }
  return v;
}

Solution solve_primal(const Scenario& scenario) {
  scenario.validate();
  Workspace ws(scenario);
  const EventTree& tree = scenario.tree;
  const double eps = scenario.tolerances.eps;
  const double tol = scenario.tolerances.tol;

  Solution sol;
  sol.domain = effective_domain_check(scenario, eps);
  if (sol.domain.status != LpStatus::optimal) {
    sol.status = SolveStatus::no_price_system;
    return sol;
  }
  if (sol.domain.cls == DomainClass::outside) {
    sol.status = SolveStatus::domain_outside;
    return sol;
  }
  if (sol.domain.cls == DomainClass::boundary) {
    sol.status = SolveStatus::domain_boundary;
    return sol;
  }

  if (scenario.num_endowments() > 0) {
    bool nonzero = false;
    for (double qi : scenario.q) nonzero = nonzero || qi != 0.0;
    if (nonzero) {
      std::vector<double> claim;
      for (int leaf : tree.leaves())
        claim.push_back(scenario.endowment_cash(leaf));
      sol.endowment_replicable_warning =
          replicability_check(scenario, claim, eps).replicable;
    }
  }

  ScpsSearch seed = find_scps(scenario, eps);
  if (seed.status != LpStatus::optimal) {
    sol.status = SolveStatus::no_price_system;
    return sol;
  }

  std::vector<Cut> cuts{make_cut(ws, seed.system)};
  std::vector<double> lambda{initial_multiplier(ws, cuts[0])};
  const double inner_target = std::min(1e-11, 0.01 * tol);

  InnerResult inner;
  for (int round = 1; round <= scenario.tolerances.max_cuts; ++round) {
    sol.cut_rounds = round;
    InnerProblem ip(ws, cuts);
    inner = ip.minimize(lambda, inner_target);
    sol.inner_iterations += inner.iterations;
    if (!inner.converged) {
      sol.status = SolveStatus::inner_failure;
      return sol;
    }
    lambda = inner.lambda;

    std::vector<double> ctilde_cons(ws.cons_nodes.size());
    for (size_t i = 0; i < ws.cons_nodes.size(); ++i)
      ctilde_cons[i] = ws.util.inverse_marginal(
          ws.node_level[ws.cons_nodes[i]], inner.big_lambda[i]);

    NodeFunctional f = violation_functional(ws, ctilde_cons);
    CpsOptimum opt = optimize_over_cps(scenario, f, eps, LpSense::maximize);
    if (opt.status != LpStatus::optimal) {
      sol.status = SolveStatus::no_price_system;
      return sol;
    }
    sol.max_violation = opt.value - scenario.x;
    if (sol.max_violation <= tol * (1.0 + std::abs(scenario.x))) {
      sol.status = SolveStatus::ok;
      break;
    }
    if (round == scenario.tolerances.max_cuts) {
      sol.status = SolveStatus::max_cuts_exceeded;
      break;
    }

    // Keep cut systems strictly positive so the dual weights stay in the
    // utility domain; a tiny blend with the seed system preserves polytope
    // membership and barely moves the cut.
    PriceSystem zs = opt.system;
    double minz0 = kLpInfinity;
    for (int id = 0; id < tree.num_nodes(); ++id)
      minz0 = std::min(minz0, zs.z.at(id, 0));
    if (minz0 < 1e-12) {
      const double theta = 1e-8;
      for (int id = 0; id < tree.num_nodes(); ++id)
        for (int i = 0; i <= scenario.d; ++i)
          zs.z.at(id, i) = (1.0 - theta) * zs.z.at(id, i) +
                           theta * seed.system.z.at(id, i);
    }
    Cut fresh = make_cut(ws, zs);
    bool dup = false;
    for (const Cut& c : cuts)
      dup = dup || cosine(c.gamma, fresh.gamma) >= 1.0 - 1e-10;
    if (dup) {
      sol.status = SolveStatus::stalled;
      break;
    }
    cuts.push_back(std::move(fresh));
    lambda.push_back(0.0);
  }

  // Assemble the solution processes on every node (terminal rate included).
  sol.cuts = cuts;
  sol.lambda = lambda;
  sol.gamma_star = AdaptedProcess(tree.num_nodes(), 1, 0.0);
  for (size_t j = 0; j < cuts.size(); ++j)
    for (int id = 0; id < tree.num_nodes(); ++id)
      sol.gamma_star.at(id) += lambda[j] * cuts[j].gamma.at(id);

  // Terminal rates carry no time measure, so the dual weight at a leaf is
  // only pinned up to the equivalence class; extreme cut systems can leave
  // it degenerate there. Floor it against the interior scale and report the
  // corresponding representative.
  {
    double interior_max = 0.0;
    for (size_t i = 0; i < ws.cons_nodes.size(); ++i)
      interior_max =
          std::max(interior_max, sol.gamma_star.at(ws.cons_nodes[i]));
    const double floor = 1e-5 * interior_max;
    for (int leaf : tree.leaves())
      sol.gamma_star.at(leaf) = std::max(sol.gamma_star.at(leaf), floor);
  }

  sol.ctilde = AdaptedProcess(tree.num_nodes(), 1, 0.0);
  for (int id = 0; id < tree.num_nodes(); ++id) {
    const double g = sol.gamma_star.at(id);
    sol.ctilde.at(id) =
        g > 0.0 ? ws.util.inverse_marginal(ws.node_level[id], g) : 0.0;
  }
  RecoverResult rec = recover(tree, sol.ctilde, scenario.habit);
  sol.c = rec.c;
  sol.habit = rec.habit;

  sol.u_primal = 0.0;
  for (size_t i = 0; i < ws.cons_nodes.size(); ++i)
    sol.u_primal += ws.rho[i] * ws.util.value(ws.node_level[ws.cons_nodes[i]],
                                              sol.ctilde.at(ws.cons_nodes[i]));
  sol.v_dual = 0.0;
  for (size_t i = 0; i < ws.cons_nodes.size(); ++i)
    sol.v_dual += ws.rho[i] * ws.util.conjugate(
                                  ws.node_level[ws.cons_nodes[i]],
                                  sol.gamma_star.at(ws.cons_nodes[i]));
  sol.y = 0.0;
  for (double l : lambda) sol.y += l;
  sol.r.assign(1 + scenario.num_endowments(), 0.0);
  for (size_t j = 0; j < cuts.size(); ++j) {
    sol.r[0] += lambda[j] * cuts[j].p0;
    for (int i = 0; i < scenario.num_endowments(); ++i)
      sol.r[i + 1] += lambda[j] * cuts[j].p[i];
  }
  sol.gap = sol.v_dual + sol.pairing_bound(scenario) - sol.u_primal;
  return sol;
}

double evaluate_dual(const Solution& sol, const Scenario& scenario) {
  Workspace ws(scenario);
  double v = 0.0;
  for (size_t i = 0; i < ws.cons_nodes.size(); ++i)
    v += ws.rho[i] * ws.util.conjugate(ws.node_level[ws.cons_nodes[i]],
                                       sol.gamma_star.at(ws.cons_nodes[i]));
  return v;
}

DualityReport verify_first_order(const Solution& sol, const Scenario& scenario,
                                 double tol) {
  Workspace ws(scenario);
  DualityReport rep;
  rep.cut_count = static_cast<int>(sol.cuts.size());
  rep.iterations = sol.inner_iterations;

  const double bound = sol.pairing_bound(scenario);
  rep.gap = std::abs(sol.u_primal - (sol.v_dual + bound));

  double foc = 0.0;
  for (int id = 0; id < scenario.tree.num_nodes(); ++id) {
    const double g = sol.gamma_star.at(id);
    if (!(g > 0.0)) continue;
    foc = std::max(foc, std::abs(g - ws.util.marginal(ws.node_level[id],
                                                      sol.ctilde.at(id))));
  }
  rep.foc_sup_norm = foc;

  double pairing = 0.0;
  for (size_t i = 0; i < ws.cons_nodes.size(); ++i)
    pairing += ws.rho[i] * sol.ctilde.at(ws.cons_nodes[i]) *
               sol.gamma_star.at(ws.cons_nodes[i]);
  rep.pairing_residual = std::abs(pairing - bound);

  double worst_violation = -kLpInfinity, cs = 0.0;
  for (size_t j = 0; j < sol.cuts.size(); ++j) {
    double lhs = 0.0;
    for (size_t i = 0; i < ws.cons_nodes.size(); ++i)
      lhs += ws.rho[i] * sol.ctilde.at(ws.cons_nodes[i]) *
             sol.cuts[j].gamma.at(ws.cons_nodes[i]);
    const double slack = sol.cuts[j].bound - lhs;
    rep.cut_slacks.push_back(slack);
    rep.cut_cs.push_back(std::abs(sol.lambda[j] * slack));
    worst_violation = std::max(worst_violation, -slack);
    cs = std::max(cs, rep.cut_cs.back());
    if (sol.lambda[j] > 1e-12 * std::max(1.0, sol.y)) ++rep.active_cuts;
  }
  rep.worst_cut_violation = std::max(0.0, worst_violation);
  rep.complementary_slackness = cs;
  rep.single_cut_representation = rep.active_cuts == 1;

  rep.pass = rep.gap <= tol * (1.0 + std::abs(sol.u_primal)) &&
             rep.foc_sup_norm <= tol && rep.pairing_residual <= tol;
  return rep;
}

ReplicabilityReport replicability_check(const Scenario& scenario,
                                        const std::vector<double>& leaf_claim,
                                        double eps, double tol) {
  const auto& leaves = scenario.tree.leaves();
  if (leaf_claim.size() != leaves.size())
    throw std::invalid_argument("replicability_check: one value per leaf");
  NodeFunctional f = NodeFunctional::zero(scenario.tree, scenario.d);
  for (size_t i = 0; i < leaves.size(); ++i)
    f.a.at(leaves[i], 0) = leaf_claim[i];
  CpsOptimum hi = optimize_over_cps(scenario, f, eps, LpSense::maximize);
  CpsOptimum lo = optimize_over_cps(scenario, f, eps, LpSense::minimize);
  ReplicabilityReport rep;
  rep.status = hi.status;
  if (hi.status != LpStatus::optimal || lo.status != LpStatus::optimal) {
    rep.status = hi.status == LpStatus::optimal ? lo.status : hi.status;
    return rep;
  }
  rep.lower = lo.value;
  rep.upper = hi.value;
  rep.width = hi.value - lo.value;
  rep.replicable =
      rep.width <= tol * (1.0 + std::abs(hi.value) + std::abs(lo.value));
  return rep;
}

double integrability_diagnostic(const Scenario& scenario, double xbar) {
  if (!(xbar > 0.0))
    throw std::invalid_argument("integrability_diagnostic: xbar must be > 0");
  scenario.validate();
  Workspace ws(scenario);
  const AdaptedProcess decay = decay_weight_path(scenario.tree, scenario.habit);
  double mass = 0.0;
  for (size_t i = 0; i < ws.cons_nodes.size(); ++i) {
    const int id = ws.cons_nodes[i];
    const double u = ws.util.value(ws.node_level[id], xbar * decay.at(id));
    mass += ws.rho[i] * std::max(0.0, -u);
  }
  return mass;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::ok: return "ok";
    case SolveStatus::domain_boundary: return "domain_boundary";
    case SolveStatus::domain_outside: return "domain_outside";
    case SolveStatus::no_price_system: return "no_price_system";
    case SolveStatus::max_cuts_exceeded: return "max_cuts_exceeded";
    case SolveStatus::stalled: return "stalled";
    case SolveStatus::inner_failure: return "inner_failure";
  }
  return "?";
}

}  // namespace conetree
