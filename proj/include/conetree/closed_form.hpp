#pragma once

#include <string>
#include <vector>

#include "conetree/scenario.hpp"
#include "conetree/solver.hpp"

namespace conetree {

/// Inputs of the explicit log-utility policy: a strictly positive unit-mass
/// martingale Y (Y_0 = 1) together with the normalization pair (y, r)
/// satisfying x y + (-z, q) . r = T. Habit rates must be constant.
struct LogPolicyInputs {
  AdaptedProcess ystar;   // scalar martingale, Y_0 = 1
  double y = 1.0;
  std::vector<double> r;  // (r0, r1..rN), may be empty when y alone scales
};

struct LogPolicy {
  AdaptedProcess ctilde;  // 1 / (y Y G)
  AdaptedProcess c;
  AdaptedProcess habit;
  AdaptedProcess numeraire;  // G
};

/// Explicit optimal consumption for log utility with constant habit rates:
/// net consumption 1/(y Y_t G_t), gross consumption through the inverse
/// habit transform. Both rate branches (delta == alpha and not) flow
/// through the same numeraire quadrature.
LogPolicy log_policy(const Scenario& scn, const LogPolicyInputs& in);

/// Explicit initial consumption level when Y_0 = 1:
///   z + (d-a)/(d e^{(d-a)T} - a), or z + 1/(1 + d T) when d == a.
double initial_consumption(double delta, double alpha, double z, double T);

struct PolicyPropertyReport {
  double habit_monotone_violation = 0.0;  // max decrease of F along an edge
  double submartingale_min_residual = 0.0;
  double martingale_abs_residual = 0.0;
  double ratcheting_ratio = 0.0;  // max |c - z e^{dt}| / (z e^{dt}), alpha=0
};

/// Path diagnostics of a policy: monotone standard of living when
/// delta >= alpha, submartingale property of c Y, exact martingale when
/// delta = alpha = 0, and the ratcheting ratio for alpha = 0.
PolicyPropertyReport check_policy_properties(const Scenario& scn,
                                             const LogPolicy& policy,
                                             const AdaptedProcess& ystar);

enum class IsomorphismBranch {
  vanishing_numeraire,  // G is the unit martingale; plain transform
  log_offset,           // log utility; additive constant removed
  weighted_power,       // power utility; G folded into discount weights
};

struct IsomorphicScenario {
  Scenario transformed;
  IsomorphismBranch branch = IsomorphismBranch::vanishing_numeraire;
  AdaptedProcess numeraire;  // G on the original tree
  double log_offset = 0.0;   // E[int log G dt] for the log branch
  double endowment_shift = 0.0;
};

/// Rewrites the habit problem as a habit-free consumption problem in the
/// same market: consumption is measured in units of the numeraire G, the
/// initial habit becomes a terminal endowment adjustment, and the utility
/// absorbs G through discount weights (power) or an additive offset (log).
/// Requires delta - alpha deterministic.
IsomorphicScenario build_isomorphic_scenario(const Scenario& scn);

struct IsomorphismReport {
  IsomorphismBranch branch = IsomorphismBranch::vanishing_numeraire;
  double max_consumption_diff = 0.0;
  double value_residual = 0.0;
  double original_value = 0.0;
  double transformed_value = 0.0;
  double log_offset = 0.0;
  bool pass = false;
};

/// Solves the original and the transformed problem, maps the transformed
/// optimum back and compares plans nodewise and values.
IsomorphismReport verify_isomorphism(const Scenario& scn, double tol);

std::string to_string(IsomorphismBranch b);

}  // namespace conetree
