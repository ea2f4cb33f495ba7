#include "conetree/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace conetree {

void LpProblem::add_row(const std::vector<double>& coeffs, RowSense s,
                        double b) {
  if (static_cast<int>(coeffs.size()) != num_vars())
    throw std::invalid_argument("linprog: row width mismatch");
  matrix.insert(matrix.end(), coeffs.begin(), coeffs.end());
  row_sense.push_back(s);
  rhs.push_back(b);
}

void LpProblem::add_sparse_row(
    const std::vector<std::pair<int, double>>& entries, RowSense s, double b) {
  std::vector<double> row(num_vars(), 0.0);
  for (auto [j, v] : entries) row.at(j) += v;
  matrix.insert(matrix.end(), row.begin(), row.end());
  row_sense.push_back(s);
  rhs.push_back(b);
}

namespace {

constexpr double kPivotTol = 1e-8;

// How each original variable maps into the nonnegative standard form.
struct VarMap {
  int col = -1;        // first standard column
  int neg_col = -1;    // second column when split (free variable)
  double shift = 0.0;  // x = shift + sign * y
  double sign = 1.0;
};

struct Standard {
  int n = 0;  // structural columns
  std::vector<double> cost;             // length n
  std::vector<std::vector<double>> a;   // m rows, length n each
  std::vector<RowSense> sense;
  std::vector<double> b;
  std::vector<VarMap> vmap;
  std::vector<int> orig_row;  // -1 for bound rows
};

Standard to_standard(const LpProblem& p) {
  Standard s;
  const int n = p.num_vars();
  const int m = p.num_rows();
  std::vector<double> lower = p.lower, upper = p.upper;
  if (lower.empty()) lower.assign(n, 0.0);
  if (upper.empty()) upper.assign(n, kLpInfinity);
  if (static_cast<int>(lower.size()) != n ||
      static_cast<int>(upper.size()) != n)
    throw std::invalid_argument("linprog: bound vector size mismatch");

  s.vmap.resize(n);
  for (int j = 0; j < n; ++j) {
    VarMap& vm = s.vmap[j];
    const double lo = lower[j], up = upper[j];
    if (lo > up) throw std::invalid_argument("linprog: empty variable bound");
    if (std::isfinite(lo)) {
      vm.col = s.n++;
      vm.shift = lo;
      vm.sign = 1.0;
    } else if (std::isfinite(up)) {
      vm.col = s.n++;
      vm.shift = up;
      vm.sign = -1.0;
    } else {
      vm.col = s.n++;
      vm.neg_col = s.n++;
      vm.shift = 0.0;
      vm.sign = 1.0;
    }
  }

  const double flip = (p.sense == LpSense::maximize) ? -1.0 : 1.0;
  s.cost.assign(s.n, 0.0);
  for (int j = 0; j < n; ++j) {
    const VarMap& vm = s.vmap[j];
    s.cost[vm.col] += flip * p.objective[j] * vm.sign;
    if (vm.neg_col >= 0) s.cost[vm.neg_col] -= flip * p.objective[j];
  }

  auto push_row = [&](const std::vector<double>& row, RowSense rs, double b,
                      int orig) {
    s.a.push_back(row);
    s.sense.push_back(rs);
    s.b.push_back(b);
    s.orig_row.push_back(orig);
  };

  for (int i = 0; i < m; ++i) {
    std::vector<double> row(s.n, 0.0);
    double b = p.rhs[i];
    for (int j = 0; j < n; ++j) {
      const double aij = p.matrix[static_cast<size_t>(i) * n + j];
      if (aij == 0.0) continue;
      const VarMap& vm = s.vmap[j];
      row[vm.col] += aij * vm.sign;
      if (vm.neg_col >= 0) row[vm.neg_col] -= aij;
      b -= aij * vm.shift;
    }
    push_row(row, p.row_sense[i], b, i);
  }

  // Two-sided bounds become explicit rows in the shifted variable.
  for (int j = 0; j < n; ++j) {
    const double lo = lower[j], up = upper[j];
    if (std::isfinite(lo) && std::isfinite(up)) {
      std::vector<double> row(s.n, 0.0);
      row[s.vmap[j].col] = 1.0;
      push_row(row, RowSense::le, up - lo, -1);
    }
  }
  return s;
}

}  // namespace

LpResult solve_lp(const LpProblem& problem, const LpTolerances& tol) {
  Standard sf = to_standard(problem);
  const int m = static_cast<int>(sf.b.size());
  const int nstruct = sf.n;

  int nslack = 0;
  for (RowSense rs : sf.sense)
    if (rs != RowSense::eq) ++nslack;

  const int slack0 = nstruct;
  const int art0 = nstruct + nslack;
  const int ncols = art0 + m;
  const int rhs_col = ncols;
  const int width = ncols + 1;

  std::vector<double> tab(static_cast<size_t>(m) * width, 0.0);
  auto T = [&](int r, int c) -> double& {
    return tab[static_cast<size_t>(r) * width + c];
  };

  // Row equilibration keeps the phase-1 feasibility threshold meaningful
  // when row magnitudes differ wildly; row_scale carries sign and scale so
  // duals can be mapped back.
  std::vector<double> row_scale(m, 1.0);
  {
    int sl = slack0;
    for (int i = 0; i < m; ++i) {
      double mag = std::abs(sf.b[i]);
      for (int j = 0; j < nstruct; ++j) mag = std::max(mag, std::abs(sf.a[i][j]));
      if (mag < 1e-12) mag = 1.0;
      const double sgn = (sf.b[i] < 0.0) ? -1.0 : 1.0;
      row_scale[i] = sgn / mag;
      for (int j = 0; j < nstruct; ++j) T(i, j) = row_scale[i] * sf.a[i][j];
      if (sf.sense[i] != RowSense::eq) {
        T(i, sl) = sgn * (sf.sense[i] == RowSense::le ? 1.0 : -1.0);
        ++sl;
      }
      T(i, art0 + i) = 1.0;
      T(i, rhs_col) = row_scale[i] * sf.b[i];
    }
  }

  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = art0 + i;

  // Reduced-cost rows for both phases, updated jointly by every pivot.
  std::vector<double> z1(width, 0.0), z2(width, 0.0);
  for (int j = 0; j < ncols; ++j) {
    double colsum = 0.0;
    for (int i = 0; i < m; ++i) colsum += T(i, j);
    z1[j] = (j >= art0 ? 1.0 : 0.0) - colsum;
  }
  {
    double bsum = 0.0;
    for (int i = 0; i < m; ++i) bsum += T(i, rhs_col);
    z1[rhs_col] = -bsum;
  }
  for (int j = 0; j < nstruct; ++j) z2[j] = sf.cost[j];

  LpResult result;
  const int max_iters = 200 * (m + ncols) + 20000;
  int iters = 0;

  auto pivot = [&](int pr, int pc) {
    const double pv = T(pr, pc);
    const double inv = 1.0 / pv;
    for (int c = 0; c <= ncols; ++c) T(pr, c) *= inv;
    T(pr, pc) = 1.0;
    for (int r = 0; r < m; ++r) {
      if (r == pr) continue;
      const double f = T(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c <= ncols; ++c) T(r, c) -= f * T(pr, c);
      T(r, pc) = 0.0;
    }
    for (auto* z : {&z1, &z2}) {
      double f = (*z)[pc];
      if (f != 0.0) {
        for (int c = 0; c <= ncols; ++c) (*z)[c] -= f * T(pr, c);
        (*z)[pc] = 0.0;
      }
    }
    basis[pr] = pc;
    ++iters;
  };

  // Ratio test. Ties normally prefer kicking artificials out, then larger
  // pivot magnitudes for stability; under Bland's rule the leaving variable
  // must be the smallest basis index among the exact minimizers or the
  // anti-cycling argument breaks down.
  auto leaving_row = [&](int pc, bool bland) -> int {
    int best = -1;
    double best_ratio = 0.0;
    for (int r = 0; r < m; ++r) {
      const double a = T(r, pc);
      if (a <= kPivotTol) continue;
      const double ratio = std::max(T(r, rhs_col), 0.0) / a;
      const double window =
          bland ? 1e-12 : 1e-10 * (1.0 + std::abs(best_ratio));
      if (best < 0 || ratio < best_ratio - window) {
        best = r;
        best_ratio = ratio;
      } else if (ratio <= best_ratio + window) {
        if (bland) {
          if (basis[r] < basis[best]) best = r;
          continue;
        }
        const bool cand_art = basis[r] >= art0;
        const bool best_art = basis[best] >= art0;
        if (cand_art != best_art) {
          if (cand_art) best = r;
        } else if (std::abs(a) > 4.0 * std::abs(T(best, pc))) {
          best = r;
        } else if (std::abs(T(best, pc)) <= 4.0 * std::abs(a) &&
                   basis[r] < basis[best]) {
          best = r;
        }
      }
    }
    return best;
  };

  enum class StepOutcome { moved, optimal, unbounded, limit };

  auto run_phase = [&](std::vector<double>& z, bool allow_art) -> StepOutcome {
    bool bland = false;
    int stall = 0;
    double last_obj = -z[rhs_col];
    while (true) {
      if (iters >= max_iters) return StepOutcome::limit;
      int pc = -1;
      if (!bland) {
        // Steepest-edge flavored pricing: reduced cost scaled by the length
        // of the updated column. Plain most-negative-cost pricing zigzags
        // badly on the degenerate polytopes this solver sees.
        double best = -tol.optimality;
        for (int j = 0; j < ncols; ++j) {
          if (!allow_art && j >= art0) continue;
          if (z[j] >= -tol.optimality) continue;
          double norm2 = 1.0;
          for (int r = 0; r < m; ++r) norm2 += T(r, j) * T(r, j);
          const double score = z[j] / std::sqrt(norm2);
          if (score < best) {
            best = score;
            pc = j;
          }
        }
      } else {
        for (int j = 0; j < ncols; ++j) {
          if (!allow_art && j >= art0) continue;
          if (z[j] < -tol.optimality) {
            pc = j;
            break;
          }
        }
      }
      if (pc < 0) return StepOutcome::optimal;
      const int pr = leaving_row(pc, bland);
      if (pr < 0) return StepOutcome::unbounded;
      pivot(pr, pc);
      const double obj = -z[rhs_col];
      if (obj < last_obj - 1e-13 * (1.0 + std::abs(last_obj))) {
        stall = 0;
      } else if (++stall > 2 * (m + 2)) {
        bland = true;  // anti-cycling fallback
      }
      last_obj = obj;
    }
  };

  StepOutcome ph1 = run_phase(z1, true);
  result.iterations = iters;
  if (ph1 == StepOutcome::limit) {
    result.status = LpStatus::iteration_limit;
    return result;
  }
  if (ph1 == StepOutcome::unbounded) {
    // Phase-1 objective is bounded below by zero; treat as a solver failure.
    result.status = LpStatus::iteration_limit;
    return result;
  }
  if (-z1[rhs_col] > tol.feasibility * m) {
    result.status = LpStatus::infeasible;
    result.iterations = iters;
    return result;
  }

  // Drive leftover artificials out of the basis where possible.
  for (int r = 0; r < m; ++r) {
    if (basis[r] < art0) continue;
    int pc = -1;
    for (int j = 0; j < art0; ++j) {
      if (std::abs(T(r, j)) > 1e-9) {
        pc = j;
        break;
      }
    }
    if (pc >= 0) pivot(r, pc);
    // else the row is redundant; its artificial stays basic at zero.
  }

  StepOutcome ph2 = run_phase(z2, false);
  result.iterations = iters;
  if (ph2 == StepOutcome::limit) {
    result.status = LpStatus::iteration_limit;
    return result;
  }
  if (ph2 == StepOutcome::unbounded) {
    result.status = LpStatus::unbounded;
    return result;
  }

  // Recover the original-variable solution.
  std::vector<double> xstd(ncols, 0.0);
  for (int r = 0; r < m; ++r) xstd[basis[r]] = T(r, rhs_col);
  const int n = problem.num_vars();
  result.x.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const VarMap& vm = sf.vmap[j];
    double y = xstd[vm.col];
    if (vm.neg_col >= 0) y -= xstd[vm.neg_col];
    result.x[j] = vm.shift + vm.sign * y;
  }
  double obj = 0.0;
  for (int j = 0; j < n; ++j) obj += problem.objective[j] * result.x[j];
  result.objective = obj;

  // Row duals: y_i = -z2[artificial_i], undone for row negation and sense.
  const double flip = (problem.sense == LpSense::maximize) ? -1.0 : 1.0;
  result.row_duals.assign(problem.num_rows(), 0.0);
  for (int r = 0; r < m; ++r) {
    const int orig = sf.orig_row[r];
    if (orig < 0) continue;
    result.row_duals[orig] = flip * row_scale[r] * (-z2[art0 + r]);
  }

  // Residual report against the original data, bounds included.
  double feas = 0.0, cs = 0.0;
  {
    std::vector<double> lower = problem.lower, upper = problem.upper;
    if (lower.empty()) lower.assign(n, 0.0);
    if (upper.empty()) upper.assign(n, kLpInfinity);
    for (int j = 0; j < n; ++j) {
      if (std::isfinite(lower[j]))
        feas = std::max(feas, lower[j] - result.x[j]);
      if (std::isfinite(upper[j]))
        feas = std::max(feas, result.x[j] - upper[j]);
    }
  }
  for (int i = 0; i < problem.num_rows(); ++i) {
    double ax = 0.0;
    for (int j = 0; j < n; ++j)
      ax += problem.matrix[static_cast<size_t>(i) * n + j] * result.x[j];
    const double slack = problem.rhs[i] - ax;
    double viol = 0.0;
    switch (problem.row_sense[i]) {
      case RowSense::le: viol = std::max(0.0, -slack); break;
      case RowSense::ge: viol = std::max(0.0, slack); break;
      case RowSense::eq: viol = std::abs(slack); break;
    }
    feas = std::max(feas, viol);
    cs = std::max(cs, std::abs(result.row_duals[i] * slack));
  }
  result.feasibility_residual = feas;
  result.complementary_slackness = cs;
  result.status = LpStatus::optimal;
  return result;
}

}  // namespace conetree
