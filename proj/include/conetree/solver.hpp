#pragma once

#include <string>
#include <vector>

#include "conetree/cps.hpp"
#include "conetree/habit.hpp"
#include "conetree/scenario.hpp"

namespace conetree {

/// One budget constraint discovered by the cutting-plane loop: a price
/// system, its induced dual weight process Gamma, the subsistence and
/// endowment prices under it, and the resulting bound
///   E[int ctilde Gamma dt] <= b = x - z p0 + q . p.
struct Cut {
  PriceSystem system;
  AdaptedProcess gamma;   // scalar per node
  double p0 = 0.0;        // E[int w Z0 dt]
  std::vector<double> p;  // E[E^i_T Z0_T]
  double bound = 0.0;
};

enum class SolveStatus {
  ok,
  domain_boundary,
  domain_outside,
  no_price_system,
  max_cuts_exceeded,
  stalled,
  inner_failure,
};

/// Terminal rates carry no time measure; at leaves where every active cut
/// system degenerates, the reported dual weight is floored against the
/// interior scale and the rate is the matching representative.
struct Solution {
  SolveStatus status = SolveStatus::inner_failure;
  AdaptedProcess ctilde;      // net consumption, strictly positive
  AdaptedProcess c;           // recovered gross consumption
  AdaptedProcess habit;       // accumulator consistent with c - ctilde
  AdaptedProcess gamma_star;  // dual optimizer sum lambda_j Gamma^j
  double u_primal = 0.0;
  double v_dual = 0.0;
  double y = 0.0;             // sum of multipliers
  std::vector<double> r;      // (sum l p0, sum l p^1, ..., sum l p^N)
  std::vector<double> lambda;
  std::vector<Cut> cuts;
  double gap = 0.0;
  double max_violation = 0.0;
  int cut_rounds = 0;
  int inner_iterations = 0;
  DomainReport domain;
  bool endowment_replicable_warning = false;

  /// x y + (-z, q) . r, the budget pairing value.
  double pairing_bound(const Scenario& scn) const;
};

struct DualityReport {
  double gap = 0.0;
  double foc_sup_norm = 0.0;       // sup |Gamma* - U'(t, ctilde*)|
  double pairing_residual = 0.0;   // |E[int ctilde Gamma dt] - (xy+(-z,q).r)|
  double worst_cut_violation = 0.0;
  double complementary_slackness = 0.0;
  std::vector<double> cut_slacks;  // b_j - E[int ctilde Gamma^j dt]
  std::vector<double> cut_cs;      // |lambda_j * slack_j|
  int cut_count = 0;
  int active_cuts = 0;
  bool single_cut_representation = false;
  int iterations = 0;
  bool pass = false;
};

/// Cutting-plane maximization of E[int U(t, ctilde_t) dt] over net
/// consumption plans satisfying every price-system budget constraint.
/// Alternates an inner smooth dual minimization over the discovered cuts
/// with a worst-case budget search over the eps polytope, and stops when no
/// constraint is violated beyond the scenario tolerance.
Solution solve_primal(const Scenario& scenario);

/// Dual objective E[int V(t, Gamma*_t) dt] of a solution's dual optimizer.
double evaluate_dual(const Solution& sol, const Scenario& scenario);

DualityReport verify_first_order(const Solution& sol, const Scenario& scenario,
                                 double tol);

struct ReplicabilityReport {
  LpStatus status = LpStatus::infeasible;
  bool replicable = false;
  double lower = 0.0;
  double upper = 0.0;
  double width = 0.0;
};

/// A terminal cash claim is replicable when its price interval over the eps
/// polytope is degenerate.
ReplicabilityReport replicability_check(const Scenario& scenario,
                                        const std::vector<double>& leaf_claim,
                                        double eps, double tol = 1e-7);

/// E[int U^-(t, xbar exp(-int alpha)) dt]: the negative-part utility mass
/// along the decayed floor xbar. Always finite on a finite tree; exposed as
/// a diagnostic for preference well-posedness at a given floor level.
double integrability_diagnostic(const Scenario& scenario, double xbar);

std::string to_string(SolveStatus s);

}  // namespace conetree
