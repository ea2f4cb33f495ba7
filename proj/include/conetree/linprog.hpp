#pragma once

#include <limits>
#include <vector>

namespace conetree {

enum class LpSense { minimize, maximize };
enum class RowSense { le, eq, ge };
enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

inline constexpr double kLpInfinity = std::numeric_limits<double>::infinity();

/// Centralized solver tolerances.
struct LpTolerances {
  double feasibility = 1e-9;
  double optimality = 1e-9;
};

/// Dense linear program
///   min/max c.x  subject to  A x {<=,=,>=} b,  lower <= x <= upper.
/// Bounds may be +-infinity. Missing bound vectors default to x >= 0.
struct LpProblem {
  LpSense sense = LpSense::minimize;
  std::vector<double> objective;
  std::vector<double> matrix;  // row-major, num_rows x num_vars
  std::vector<RowSense> row_sense;
  std::vector<double> rhs;
  std::vector<double> lower;
  std::vector<double> upper;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rhs.size()); }

  void reserve_rows(int rows) {
    matrix.reserve(static_cast<size_t>(rows) * num_vars());
    row_sense.reserve(rows);
    rhs.reserve(rows);
  }
  /// Appends a dense row; `coeffs` must have num_vars entries.
  void add_row(const std::vector<double>& coeffs, RowSense s, double b);
  /// Appends a sparse row given (index, coefficient) pairs.
  void add_sparse_row(const std::vector<std::pair<int, double>>& entries,
                      RowSense s, double b);
};

struct LpResult {
  LpStatus status = LpStatus::iteration_limit;
  std::vector<double> x;
  double objective = 0.0;
  std::vector<double> row_duals;
  double feasibility_residual = 0.0;
  double complementary_slackness = 0.0;
  int iterations = 0;
};

/// Two-phase dense simplex. Deterministic: Dantzig pricing with lowest-index
/// tie breaking and a Bland fallback once the objective stalls. Row duals are
/// reported for the original row order and sense; for a maximization program
/// with <= rows the duals of binding rows are nonnegative.
LpResult solve_lp(const LpProblem& problem, const LpTolerances& tol = {});

}  // namespace conetree
