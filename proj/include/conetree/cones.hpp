#pragma once

#include <vector>

#include "conetree/linprog.hpp"

namespace conetree {

/// Bid-ask exchange matrix pi with pi[i][j] = (1+lambda[i][j]) S_j / S_i,
/// unit diagonal, over assets 0..d with asset 0 the cash account (S_0 = 1).
struct BidAskMatrix {
  int d = 0;
  std::vector<double> pi;  // (1+d)x(1+d) row-major

  double at(int i, int j) const { return pi[static_cast<size_t>(i) * (d + 1) + j]; }

  /// Builds the matrix from risky prices S (size d) and cost factors
  /// lambda (size (1+d)^2, zero diagonal). Validates positivity and the
  /// triangle property (1+l^ij) <= (1+l^ik)(1+l^kj).
  static BidAskMatrix from_costs(const std::vector<double>& prices,
                                 const std::vector<double>& lambda);
};

/// Solvency cone spanned by the unit vectors e^i and the exchange vectors
/// pi^{ij} e^i - e^j for every ordered pair i != j. Generators are kept
/// unnormalized; membership and margin tests normalize on the fly.
struct SolvencyCone {
  int dim = 0;  // 1+d
  std::vector<std::vector<double>> generators;
};

SolvencyCone solvency_generators(const BidAskMatrix& pi);

/// Nonnegative-combination feasibility: exists a >= 0 with sum a_g g = v.
bool cone_contains(const SolvencyCone& cone, const std::vector<double>& v,
                   double tol = 1e-9);

/// Polar membership with a relative interior margin:
///   <g, w> >= eps * |g|_2 * |w|_1  for every generator g.
/// eps = 0 tests the closed polar cone; eps > 0 certifies interior
/// membership. The 1-norm on w keeps the same test linear when w ranges
/// over nonnegative price systems.
bool polar_contains(const SolvencyCone& cone, const std::vector<double>& w,
                    double margin_eps);

/// Worst normalized margin min_g <g,w> / (|g|_2 |w|_1), for diagnostics.
double polar_margin(const SolvencyCone& cone, const std::vector<double>& w);

/// Pointedness: no convex combination of generators vanishes.
bool is_efficient_friction(const SolvencyCone& cone);

}  // namespace conetree
