#include "conetree/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace conetree {

namespace {

void require_constant_rates(const Scenario& scn, double* alpha, double* delta) {
  const AdaptedProcess& a = scn.habit.alpha;
  const AdaptedProcess& d = scn.habit.delta;
  const double a0 = a.at(0), d0 = d.at(0);
  for (int id = 0; id < scn.tree.num_nodes(); ++id)
    if (std::abs(a.at(id) - a0) > 1e-12 || std::abs(d.at(id) - d0) > 1e-12)
      throw std::invalid_argument("closed_form: habit rates must be constant");
  *alpha = a0;
  *delta = d0;
}

}  // namespace

LogPolicy log_policy(const Scenario& scn, const LogPolicyInputs& in) {
  if (scn.utility.kind != UtilityKind::log_utility ||
      !scn.utility.discount.empty())
    throw std::invalid_argument("log_policy: plain log utility required");
  double alpha = 0.0, delta = 0.0;
  require_constant_rates(scn, &alpha, &delta);

  const EventTree& tree = scn.tree;
  if (in.ystar.dim() != 1 || in.ystar.num_nodes() != tree.num_nodes())
    throw std::invalid_argument("log_policy: Y must be scalar per node");
  if (std::abs(in.ystar.at(tree.root()) - 1.0) > 1e-10)
    throw std::invalid_argument("log_policy: Y_0 must equal 1");
  if (!is_martingale(tree, in.ystar, 1e-9))
    throw std::invalid_argument("log_policy: Y must be a martingale");
  for (int id = 0; id < tree.num_nodes(); ++id)
    if (!(in.ystar.at(id) > 0.0))
      throw std::invalid_argument("log_policy: Y must be strictly positive");
  if (!in.r.empty()) {
    double pairing = scn.x * in.y - scn.habit.z * in.r[0];
    for (int i = 0; i < scn.num_endowments(); ++i)
      pairing += scn.q[i] * in.r[i + 1];
    if (std::abs(pairing - tree.horizon()) > 1e-8)
      throw std::invalid_argument(
          "log_policy: normalization x y + (-z,q).r = T violated");
  }

  LogPolicy out;
  out.numeraire = numeraire_path(tree, scn.habit);
  out.ctilde = AdaptedProcess(tree.num_nodes(), 1);
  for (int id = 0; id < tree.num_nodes(); ++id)
    out.ctilde.at(id) =
        1.0 / (in.y * in.ystar.at(id) * out.numeraire.at(id));
  RecoverResult rec = recover(tree, out.ctilde, scn.habit);
  out.c = rec.c;
  out.habit = rec.habit;
  return out;
}

double initial_consumption(double delta, double alpha, double z, double T) {
  if (std::abs(delta - alpha) <= 1e-12) return z + 1.0 / (1.0 + delta * T);
  const double b = delta - alpha;
  return z + b / (delta * std::exp(b * T) - alpha);
}

PolicyPropertyReport check_policy_properties(const Scenario& scn,
                                             const LogPolicy& policy,
                                             const AdaptedProcess& ystar) {
  const EventTree& tree = scn.tree;
  PolicyPropertyReport rep;

  for (int id = 0; id < tree.num_nodes(); ++id) {
    const TreeNode& n = tree.node(id);
    for (int c : n.children)
      rep.habit_monotone_violation = std::max(
          rep.habit_monotone_violation, policy.habit.at(id) - policy.habit.at(c));
  }

  double min_res = kLpInfinity, max_abs = 0.0;
  for (int id = 0; id < tree.num_nodes(); ++id) {
    const TreeNode& n = tree.node(id);
    if (n.children.empty()) continue;
    double next = 0.0;
    for (int c : n.children)
      next += tree.node(c).prob * policy.c.at(c) * ystar.at(c);
    const double res = next - policy.c.at(id) * ystar.at(id);
    min_res = std::min(min_res, res);
    max_abs = std::max(max_abs, std::abs(res));
  }
  rep.submartingale_min_residual = min_res;
  rep.martingale_abs_residual = max_abs;

  const double z = scn.habit.z;
  const double delta = scn.habit.delta.at(0);
  if (z > 0.0) {
    double worst = 0.0;
    for (int id = 0; id < tree.num_nodes(); ++id) {
      const double ref = z * std::exp(delta * tree.time_at(tree.node(id).time_index));
      worst = std::max(worst, std::abs(policy.c.at(id) - ref) / ref);
    }
    rep.ratcheting_ratio = worst;
  }
  return rep;
}

IsomorphicScenario build_isomorphic_scenario(const Scenario& scn) {
  scn.validate();
  if (!scn.habit.drift_is_deterministic(scn.tree))
    throw std::invalid_argument(
        "isomorphism: delta - alpha must be deterministic");
  const EventTree& tree = scn.tree;

  IsomorphicScenario out;
  out.numeraire = numeraire_path(tree, scn.habit);

  const bool unit_numeraire = [&] {
    for (int id = 0; id < tree.num_nodes(); ++id)
      if (std::abs(out.numeraire.at(id) - 1.0) > 1e-12) return false;
    return true;
  }();
  if (unit_numeraire)
    out.branch = IsomorphismBranch::vanishing_numeraire;
  else if (scn.utility.kind == UtilityKind::log_utility)
    out.branch = IsomorphismBranch::log_offset;
  else
    out.branch = IsomorphismBranch::weighted_power;

  // Endowment of the transformed problem: q.E_T minus the subsistence cost
  // along each path, shifted into the nonnegative orthant with the shift
  // absorbed by the initial cash.
  const AdaptedProcess w = growth_weight_path(tree, scn.habit);
  const auto& leaves = tree.leaves();
  std::vector<double> residual(leaves.size(), 0.0);
  for (size_t pos = 0; pos < leaves.size(); ++pos) {
    double pathsum = 0.0;
    int id = leaves[pos];
    while (true) {
      const TreeNode& n = tree.node(id);
      if (n.time_index < tree.num_periods())
        pathsum += tree.dt(n.time_index) * w.at(id);
      if (n.parent < 0) break;
      id = n.parent;
    }
    residual[pos] = scn.endowment_cash(leaves[pos]) - scn.habit.z * pathsum;
  }
  double shift = 0.0;
  for (double v : residual) shift = std::max(shift, -v);
  out.endowment_shift = shift;

  Scenario t = scn;
  t.habit = HabitParams::constants(tree, 0.0, 0.0, 0.0);
  t.x = scn.x - shift;
  const bool trivial_endowment =
      shift == 0.0 &&
      std::all_of(residual.begin(), residual.end(),
                  [](double v) { return v == 0.0; });
  if (trivial_endowment) {
    t.q.clear();
    t.endowment_payoffs.clear();
  } else {
    t.q = {1.0};
    t.endowment_payoffs.assign(leaves.size(), {0.0});
    for (size_t pos = 0; pos < leaves.size(); ++pos)
      t.endowment_payoffs[pos][0] = residual[pos] + shift;
  }

  if (out.branch == IsomorphismBranch::log_offset) {
    AdaptedProcess logg(tree.num_nodes(), 1);
    for (int id = 0; id < tree.num_nodes(); ++id)
      logg.at(id) = std::log(out.numeraire.at(id));
    out.log_offset = time_integral_expectation(tree, logg);
  } else if (out.branch == IsomorphismBranch::weighted_power) {
    if (!scn.habit.delta_is_deterministic(tree))
      throw std::invalid_argument(
          "isomorphism: power branch needs deterministic delta");
    const int m = tree.num_periods();
    std::vector<double> disc(m + 1, 1.0);
    if (!scn.utility.discount.empty()) disc = scn.utility.discount;
    for (int k = 0; k <= m; ++k) {
      const int ref = tree.nodes_at(k).front();
      disc[k] *= std::pow(out.numeraire.at(ref), -scn.utility.p);
    }
    t.utility.discount = disc;
  }

  out.transformed = std::move(t);
  out.transformed.validate();
  return out;
}

IsomorphismReport verify_isomorphism(const Scenario& scn, double tol) {
  IsomorphicScenario iso = build_isomorphic_scenario(scn);
  IsomorphismReport rep;
  rep.branch = iso.branch;
  rep.log_offset = iso.log_offset;

  Solution original = solve_primal(scn);
  Solution transformed = solve_primal(iso.transformed);
  if (original.status != SolveStatus::ok ||
      transformed.status != SolveStatus::ok) {
    rep.pass = false;
    return rep;
  }
  rep.original_value = original.u_primal;
  rep.transformed_value = transformed.u_primal;

  // Back-map: transformed consumption is measured in numeraire units.
  const EventTree& tree = scn.tree;
  AdaptedProcess ctilde(tree.num_nodes(), 1);
  for (int id = 0; id < tree.num_nodes(); ++id)
    ctilde.at(id) = transformed.ctilde.at(id) / iso.numeraire.at(id);
  RecoverResult rec = recover(tree, ctilde, scn.habit);

  for (int id = 0; id < tree.num_nodes(); ++id)
    rep.max_consumption_diff = std::max(
        rep.max_consumption_diff, std::abs(rec.c.at(id) - original.c.at(id)));

  double expected = transformed.u_primal;
  if (iso.branch == IsomorphismBranch::log_offset) expected -= iso.log_offset;
  rep.value_residual = std::abs(original.u_primal - expected);

  rep.pass = rep.max_consumption_diff <= tol &&
             rep.value_residual <= tol * (1.0 + std::abs(original.u_primal));
  return rep;
}

std::string to_string(IsomorphismBranch b) {
  switch (b) {
    case IsomorphismBranch::vanishing_numeraire: return "vanishing_numeraire";
    case IsomorphismBranch::log_offset: return "log_offset";
    case IsomorphismBranch::weighted_power: return "weighted_power";
  }
  return "?";
}

}  // namespace conetree
