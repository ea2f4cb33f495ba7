#include "conetree/cones.hpp"

#include <cmath>
#include <stdexcept>

namespace conetree {

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double norm1(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace

BidAskMatrix BidAskMatrix::from_costs(const std::vector<double>& prices,
                                      const std::vector<double>& lambda) {
  const int d = static_cast<int>(prices.size());
  const int n = d + 1;
  if (static_cast<int>(lambda.size()) != n * n)
    throw std::invalid_argument("bid_ask: lambda must be (1+d)^2");
  std::vector<double> s(n);
  s[0] = 1.0;
  for (int i = 0; i < d; ++i) {
    if (!(prices[i] > 0.0))
      throw std::invalid_argument("bid_ask: prices must be strictly positive");
    s[i + 1] = prices[i];
  }
  BidAskMatrix m;
  m.d = d;
  m.pi.assign(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double l = lambda[static_cast<size_t>(i) * n + j];
      if (l < 0.0)
        throw std::invalid_argument("bid_ask: cost factors must be >= 0");
      if (i == j && l != 0.0)
        throw std::invalid_argument("bid_ask: diagonal cost must be 0");
      m.pi[static_cast<size_t>(i) * n + j] = (1.0 + l) * s[j] / s[i];
    }
  }
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        if (m.at(i, j) > m.at(i, k) * m.at(k, j) * (1.0 + 1e-12))
          throw std::invalid_argument(
              "bid_ask: triangle condition pi^ij <= pi^ik pi^kj violated");
  return m;
}

SolvencyCone solvency_generators(const BidAskMatrix& pi) {
  const int n = pi.d + 1;
  SolvencyCone cone;
  cone.dim = n;
  for (int i = 0; i < n; ++i) {
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    cone.generators.push_back(std::move(e));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      std::vector<double> g(n, 0.0);
      g[i] = pi.at(i, j);
      g[j] -= 1.0;
      cone.generators.push_back(std::move(g));
    }
  }
  return cone;
}

bool cone_contains(const SolvencyCone& cone, const std::vector<double>& v,
                   double tol) {
  if (static_cast<int>(v.size()) != cone.dim)
    throw std::invalid_argument("cone_contains: dimension mismatch");
  const int ng = static_cast<int>(cone.generators.size());
  LpProblem lp;
  lp.objective.assign(ng, 0.0);
  for (int r = 0; r < cone.dim; ++r) {
    std::vector<double> row(ng);
    for (int g = 0; g < ng; ++g) row[g] = cone.generators[g][r];
    lp.add_row(row, RowSense::eq, v[r]);
  }
  LpTolerances t;
  t.feasibility = tol;
  return solve_lp(lp, t).status == LpStatus::optimal;
}

double polar_margin(const SolvencyCone& cone, const std::vector<double>& w) {
  const double nw = norm1(w);
  if (nw == 0.0) return 0.0;
  double worst = kLpInfinity;
  for (const auto& g : cone.generators) {
    double dot = 0.0;
    for (int i = 0; i < cone.dim; ++i) dot += g[i] * w[i];
    worst = std::min(worst, dot / (norm2(g) * nw));
  }
  return worst;
}

bool polar_contains(const SolvencyCone& cone, const std::vector<double>& w,
                    double margin_eps) {
  if (static_cast<int>(w.size()) != cone.dim)
    throw std::invalid_argument("polar_contains: dimension mismatch");
  const double nw = norm1(w);
  for (const auto& g : cone.generators) {
    double dot = 0.0;
    for (int i = 0; i < cone.dim; ++i) dot += g[i] * w[i];
    if (dot < margin_eps * norm2(g) * nw - 1e-14 * (1.0 + nw)) return false;
  }
  return true;
}

bool is_efficient_friction(const SolvencyCone& cone) {
  const int ng = static_cast<int>(cone.generators.size());
  LpProblem lp;
  lp.objective.assign(ng, 0.0);
  for (int r = 0; r < cone.dim; ++r) {
    std::vector<double> row(ng);
    for (int g = 0; g < ng; ++g) row[g] = cone.generators[g][r];
    lp.add_row(row, RowSense::eq, 0.0);
  }
  lp.add_row(std::vector<double>(ng, 1.0), RowSense::eq, 1.0);
  return solve_lp(lp).status == LpStatus::infeasible;
}

}  // namespace conetree
