#pragma once

#include <vector>

#include "conetree/scenario.hpp"

namespace conetree {

/// Adapted pricing process Z in R_+^{1+d}, one vector per node, normalized
/// to Z^0 = 1 at the root. `strict` records whether the interior margin was
/// met at every node when the system was produced or last verified.
struct PriceSystem {
  AdaptedProcess z;  // dim 1+d
  bool strict = false;
  double margin = 0.0;  // worst normalized polar margin over nodes
};

struct PriceSystemReport {
  double martingale_residual = 0.0;
  double worst_margin = 0.0;
  double min_z0 = 0.0;
  double normalization_residual = 0.0;
  bool martingale_ok = false;
  bool polar_ok = false;
  bool positive_ok = false;
  bool normalization_ok = false;
  bool all_ok() const {
    return martingale_ok && polar_ok && positive_ok && normalization_ok;
  }
};

/// Linear functional of a price system, phi(Z) = sum_n P(n) <a_n, Z_n>.
/// Expectations of terminal pairings and of time integrals of Z components
/// are all of this shape.
struct NodeFunctional {
  AdaptedProcess a;  // dim 1+d per node

  static NodeFunctional zero(const EventTree& tree, int d) {
    NodeFunctional f;
    f.a = AdaptedProcess(tree.num_nodes(), d + 1, 0.0);
    return f;
  }
};

struct ScpsSearch {
  LpStatus status = LpStatus::infeasible;
  PriceSystem system;
  double slack = 0.0;  // best uniform extra margin found
};

/// Searches for a price system meeting the interior margin eps at every
/// node by maximizing a uniform extra slack on all polar constraints.
/// An infeasible status certifies that no such system exists on this tree.
/// eps may be zero; frictionless markets only admit boundary systems.
ScpsSearch find_scps(const Scenario& scenario, double eps);

PriceSystemReport verify_price_system(const PriceSystem& ps,
                                      const Scenario& scenario, double eps,
                                      double tol = 1e-9);

struct MeasureShadowPair {
  std::vector<double> leaf_weights;  // Q per leaf, ordered as tree.leaves()
  AdaptedProcess shadow;             // S~ = Z^i / Z^0, dim d
};

/// (Q, S~) representation: Q(leaf) = Z0_leaf P(leaf), S~ = Z^i/Z^0.
/// Requires Z0 > 0 everywhere.
MeasureShadowPair to_measure_shadow_pair(const EventTree& tree,
                                         const PriceSystem& ps);

PriceSystem from_measure_shadow_pair(const EventTree& tree,
                                     const MeasureShadowPair& pair);

struct CpsOptimum {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;
  PriceSystem system;
};

/// Optimizes a linear functional over the closed eps-margin polytope of
/// price systems (normalized, componentwise martingales, polar margin eps
/// at every node). Values over the closed set coincide with suprema over
/// its strictly positive elements whenever one exists; certificates may sit
/// on the boundary.
CpsOptimum optimize_over_cps(const Scenario& scenario,
                             const NodeFunctional& objective, double eps,
                             LpSense sense);

/// Same optimum at a ladder of shrinking margins, for limit reporting.
std::vector<CpsOptimum> optimize_over_cps_ladder(
    const Scenario& scenario, const NodeFunctional& objective,
    const std::vector<double>& eps_values, LpSense sense);

enum class DomainClass { interior, boundary, outside };

struct DomainReport {
  DomainClass cls = DomainClass::outside;
  double min_value = 0.0;  // worst-case budget slack over the polytope
  LpStatus status = LpStatus::infeasible;
  PriceSystem certificate;
};

/// Classifies (x, q, z) by minimizing
///   x + E[q.E_T Z0_T] - z E[int w Z0 dt],  w = exp(int (delta-alpha)),
/// over the eps polytope. Interior means every price system leaves strictly
/// positive budget room after funding the subsistence plan.
DomainReport effective_domain_check(const Scenario& scenario, double eps,
                                    double band = 1e-9);

std::string to_string(DomainClass cls);

}  // namespace conetree
