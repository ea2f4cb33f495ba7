#pragma once

// Independent reference implementations used only by tests. These stay on
// brute-force paths (path enumeration, subset enumeration, facet geometry)
// so they do not share code with the solvers they check.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "conetree/cones.hpp"
#include "conetree/scenario.hpp"

namespace conetree::testing {

/// E[X_{t_k} | node] by explicit path enumeration.
inline double path_expectation(const EventTree& tree, const AdaptedProcess& x,
                               int node, int level) {
  struct Item {
    int id;
    double w;
  };
  std::vector<Item> stack{{node, 1.0}};
  double acc = 0.0;
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    const TreeNode& n = tree.node(it.id);
    if (n.time_index == level) {
      acc += it.w * x.at(it.id);
      continue;
    }
    for (int c : n.children) stack.push_back({c, it.w * tree.node(c).prob});
  }
  return acc;
}

/// Facet-representation membership oracle for cones of dimension 2 or 3.
struct FacetCone {
  std::vector<std::vector<double>> normals;  // oriented inward

  static FacetCone from(const SolvencyCone& cone) {
    FacetCone f;
    const auto& g = cone.generators;
    const int dim = cone.dim;
    auto keep = [&](std::vector<double> n) {
      bool pos = false, neg = false;
      for (const auto& gen : g) {
        double dot = 0.0;
        for (int i = 0; i < dim; ++i) dot += n[i] * gen[i];
        pos = pos || dot > 1e-10;
        neg = neg || dot < -1e-10;
      }
      if (pos && neg) return;  // not a supporting hyperplane
      if (neg)
        for (double& v : n) v = -v;
      f.normals.push_back(std::move(n));
    };
    if (dim == 2) {
      for (const auto& gen : g) keep({-gen[1], gen[0]});
    } else if (dim == 3) {
      for (size_t i = 0; i < g.size(); ++i)
        for (size_t j = i + 1; j < g.size(); ++j) {
          std::vector<double> n = {
              g[i][1] * g[j][2] - g[i][2] * g[j][1],
              g[i][2] * g[j][0] - g[i][0] * g[j][2],
              g[i][0] * g[j][1] - g[i][1] * g[j][0]};
          double nn = std::abs(n[0]) + std::abs(n[1]) + std::abs(n[2]);
          if (nn < 1e-12) continue;
          keep(std::move(n));
        }
    }
    return f;
  }

  bool contains(const std::vector<double>& v, double tol = 1e-9) const {
    for (const auto& n : normals) {
      double dot = 0.0, nn = 0.0, vv = 0.0;
      for (size_t i = 0; i < n.size(); ++i) {
        dot += n[i] * v[i];
        nn += n[i] * n[i];
        vv += v[i] * v[i];
      }
      if (dot < -tol * std::sqrt(std::max(nn * vv, 1e-300))) return false;
    }
    return true;
  }
};

/// Vertices of { x >= 0, rows } found by enumerating active sets with a
/// depth-first search over row subsets. Suitable for dimension <= 8.
struct VertexEnumerator {
  int n = 0;
  std::vector<std::vector<double>> eq_rows;  // a.x = b as (a, b)
  std::vector<std::vector<double>> ge_rows;  // a.x >= b as (a, b)

  void add_eq(std::vector<double> a, double b) {
    a.push_back(b);
    eq_rows.push_back(std::move(a));
  }
  void add_ge(std::vector<double> a, double b) {
    a.push_back(b);
    ge_rows.push_back(std::move(a));
  }

  std::vector<std::vector<double>> run() const {
    // Bounds x_i >= 0 join the inequality pool.
    std::vector<std::vector<double>> pool = ge_rows;
    for (int i = 0; i < n; ++i) {
      std::vector<double> a(n + 1, 0.0);
      a[i] = 1.0;
      pool.push_back(std::move(a));
    }
    std::vector<std::vector<double>> verts;
    std::set<std::vector<long long>> seen;
    std::vector<int> chosen;
    const int need = n - static_cast<int>(eq_rows.size());
    if (need < 0) return verts;

    std::vector<std::vector<double>> system = eq_rows;
    dfs(pool, 0, need, chosen, system, verts, seen);
    return verts;
  }

 private:
  void dfs(const std::vector<std::vector<double>>& pool, int start, int need,
           std::vector<int>& chosen, std::vector<std::vector<double>>& system,
           std::vector<std::vector<double>>& verts,
           std::set<std::vector<long long>>& seen) const {
    if (need == 0) {
      std::vector<double> x;
      if (!solve_square(system, x)) return;
      if (!feasible(pool, x)) return;
      std::vector<long long> key(n);
      for (int i = 0; i < n; ++i)
        key[i] = static_cast<long long>(std::llround(x[i] * 1e7));
      if (seen.insert(key).second) verts.push_back(x);
      return;
    }
    for (int i = start; i + need <= static_cast<int>(pool.size()); ++i) {
      system.push_back(pool[i]);
      if (!rank_deficient(system)) {
        chosen.push_back(i);
        dfs(pool, i + 1, need - 1, chosen, system, verts, seen);
        chosen.pop_back();
      }
      system.pop_back();
    }
  }

  bool rank_deficient(const std::vector<std::vector<double>>& rows) const {
    std::vector<std::vector<double>> a = rows;
    const int m = static_cast<int>(a.size());
    int rank = 0;
    for (int c = 0; c < n && rank < m; ++c) {
      int p = -1;
      double best = 1e-9;
      for (int r = rank; r < m; ++r)
        if (std::abs(a[r][c]) > best) {
          best = std::abs(a[r][c]);
          p = r;
        }
      if (p < 0) continue;
      std::swap(a[rank], a[p]);
      for (int r = 0; r < m; ++r) {
        if (r == rank) continue;
        const double f = a[r][c] / a[rank][c];
        if (f == 0.0) continue;
        for (int cc = c; cc <= n; ++cc) a[r][cc] -= f * a[rank][cc];
      }
      ++rank;
    }
    return rank < m;
  }

  bool solve_square(const std::vector<std::vector<double>>& rows,
                    std::vector<double>& x) const {
    if (static_cast<int>(rows.size()) != n) return false;
    std::vector<std::vector<double>> a = rows;
    std::vector<int> perm(n);
    for (int c = 0; c < n; ++c) {
      int p = -1;
      double best = 1e-10;
      for (int r = c; r < n; ++r)
        if (std::abs(a[r][c]) > best) {
          best = std::abs(a[r][c]);
          p = r;
        }
      if (p < 0) return false;
      std::swap(a[c], a[p]);
      for (int r = 0; r < n; ++r) {
        if (r == c) continue;
        const double f = a[r][c] / a[c][c];
        if (f == 0.0) continue;
        for (int cc = c; cc <= n; ++cc) a[r][cc] -= f * a[c][cc];
      }
    }
    x.assign(n, 0.0);
    for (int i = 0; i < n; ++i) x[i] = a[i][n] / a[i][i];
    return true;
  }

  bool feasible(const std::vector<std::vector<double>>& pool,
                const std::vector<double>& x) const {
    auto ok_eq = [&](const std::vector<double>& row) {
      double v = -row[n];
      for (int i = 0; i < n; ++i) v += row[i] * x[i];
      return std::abs(v) <= 1e-7;
    };
    auto ok_ge = [&](const std::vector<double>& row) {
      double v = -row[n];
      for (int i = 0; i < n; ++i) v += row[i] * x[i];
      return v >= -1e-7;
    };
    for (const auto& r : eq_rows)
      if (!ok_eq(r)) return false;
    for (const auto& r : pool)
      if (!ok_ge(r)) return false;
    return true;
  }
};

/// All extreme price systems of the eps polytope, as leaf-value vectors
/// reassembled into full systems. Independent of the LP solver.
inline std::vector<AdaptedProcess> enumerate_price_system_vertices(
    const Scenario& scn, double eps) {
  const EventTree& tree = scn.tree;
  const auto& leaves = tree.leaves();
  const int width = scn.d + 1;
  const int nv = static_cast<int>(leaves.size()) * width;

  VertexEnumerator ve;
  ve.n = nv;
  auto leaf_pos = [&](int id) {
    for (size_t i = 0; i < leaves.size(); ++i)
      if (leaves[i] == id) return static_cast<int>(i);
    return -1;
  };
  for (int id = 0; id < tree.num_nodes(); ++id) {
    const SolvencyCone cone = scn.cone_at(id);
    // Leaves under this node with conditional probabilities.
    std::vector<std::pair<int, double>> mix;
    std::vector<std::pair<int, double>> stack{{id, 1.0}};
    while (!stack.empty()) {
      auto [cur, w] = stack.back();
      stack.pop_back();
      if (tree.is_leaf(cur)) {
        mix.emplace_back(leaf_pos(cur), w);
        continue;
      }
      for (int c : tree.node(cur).children)
        stack.emplace_back(c, w * tree.node(c).prob);
    }
    for (const auto& g : cone.generators) {
      double gn = 0.0;
      for (double v : g) gn += v * v;
      gn = std::sqrt(gn);
      std::vector<double> row(nv, 0.0);
      for (auto [pos, w] : mix)
        for (int i = 0; i < width; ++i)
          row[pos * width + i] += w * (g[i] - eps * gn);
      ve.add_ge(std::move(row), 0.0);
    }
  }
  {
    std::vector<double> row(nv, 0.0);
    for (size_t i = 0; i < leaves.size(); ++i)
      row[i * width] = tree.node_probability(leaves[i]);
    ve.add_eq(std::move(row), 1.0);
  }

  std::vector<AdaptedProcess> out;
  for (const auto& x : ve.run()) {
    // Interior values are conditional expectations of the leaf values.
    AdaptedProcess z(tree.num_nodes(), width, 0.0);
    for (size_t pos = 0; pos < leaves.size(); ++pos) {
      int id = leaves[pos];
      double w = 1.0;
      while (true) {
        for (int i = 0; i < width; ++i)
          z.at(id, i) += w * x[pos * width + i];
        const TreeNode& node = tree.node(id);
        if (node.parent < 0) break;
        w *= node.prob;
        id = node.parent;
      }
    }
    out.push_back(std::move(z));
  }
  return out;
}

/// Dual weight process by the explicit kernel sum (no recursion):
///   Gamma_j = Z0_j + delta_j / P(j) * sum over descendants n at level k>=j
///             of P(n) dt_k exp(sum_{j<=l<k} beta dt) Z0_n.
inline AdaptedProcess gamma_by_kernel(const EventTree& tree,
                                      const AdaptedProcess& z0,
                                      const HabitParams& h) {
  AdaptedProcess gamma(tree.num_nodes(), 1);
  const int m = tree.num_periods();
  for (int id = 0; id < tree.num_nodes(); ++id) {
    const int kj = tree.node(id).time_index;
    if (kj == m) {
      gamma.at(id) = z0.at(id);
      continue;
    }
    struct Item {
      int node;
      double prob;
      double kernel;
    };
    double acc = 0.0;
    std::vector<Item> stack{{id, 1.0, 1.0}};
    while (!stack.empty()) {
      Item it = stack.back();
      stack.pop_back();
      const TreeNode& n = tree.node(it.node);
      if (n.time_index < m) {
        acc += it.prob * tree.dt(n.time_index) * it.kernel * z0.at(it.node);
        const double beta = h.delta.at(it.node) - h.alpha.at(it.node);
        const double next_kernel =
            it.kernel * std::exp(beta * tree.dt(n.time_index));
        for (int c : n.children)
          stack.push_back({c, it.prob * tree.node(c).prob, next_kernel});
      }
    }
    gamma.at(id) = z0.at(id) + h.delta.at(id) * acc;
  }
  return gamma;
}


// Reference optimum: enumerate every extreme price system, turn each into
// an explicit budget constraint with independently computed weights, and
// minimize the finite dual with a plain projected-gradient loop. Everything
// here is test-local except the tree container.
struct ReferenceOptimum {
  bool ok = false;
  double value = 0.0;
};

inline ReferenceOptimum reference_optimum(const Scenario& scn) {
  const EventTree& tree = scn.tree;
  const double eps = scn.tolerances.eps;
  auto vertices = enumerate_price_system_vertices(scn, eps);
  ReferenceOptimum out;
  if (vertices.empty()) return out;

  std::vector<int> cons;
  std::vector<double> rho;
  for (int k = 0; k < tree.num_periods(); ++k)
    for (int id : tree.nodes_at(k)) {
      cons.push_back(id);
      rho.push_back(tree.node_probability(id) * tree.dt(k));
    }

  // Pathwise growth weights, recomputed locally.
  std::vector<double> w(tree.num_nodes(), 1.0);
  for (int k = 1; k <= tree.num_periods(); ++k)
    for (int id : tree.nodes_at(k)) {
      const TreeNode& n = tree.node(id);
      const double beta =
          scn.habit.delta.at(n.parent) - scn.habit.alpha.at(n.parent);
      w[id] = w[n.parent] * std::exp(beta * tree.dt(k - 1));
    }

  const size_t nv = vertices.size();
  std::vector<std::vector<double>> gam(nv);
  std::vector<double> b(nv);
  for (size_t v = 0; v < nv; ++v) {
    AdaptedProcess z0(tree.num_nodes(), 1);
    for (int id = 0; id < tree.num_nodes(); ++id)
      z0.at(id) = vertices[v].at(id, 0);
    AdaptedProcess g = gamma_by_kernel(tree, z0, scn.habit);
    gam[v].resize(cons.size());
    for (size_t i = 0; i < cons.size(); ++i) gam[v][i] = g.at(cons[i]);
    double p0 = 0.0;
    for (size_t i = 0; i < cons.size(); ++i)
      p0 += rho[i] * w[cons[i]] * z0.at(cons[i]);
    double qp = 0.0;
    for (int leaf : tree.leaves())
      qp += tree.node_probability(leaf) * scn.endowment_cash(leaf) *
            z0.at(leaf);
    b[v] = scn.x - scn.habit.z * p0 + qp;
  }

  const bool is_log = scn.utility.kind == UtilityKind::log_utility;
  const double p = scn.utility.p;
  auto conj = [&](double y) {
    return is_log ? -std::log(y) - 1.0
                  : (1.0 - p) / p * std::pow(y, p / (p - 1.0));
  };
  auto inv = [&](double y) {
    return is_log ? 1.0 / y : std::pow(y, 1.0 / (p - 1.0));
  };
  auto phi = [&](const std::vector<double>& mu, std::vector<double>& lam) {
    lam.assign(cons.size(), 0.0);
    for (size_t v = 0; v < nv; ++v)
      for (size_t i = 0; i < cons.size(); ++i) lam[i] += mu[v] * gam[v][i];
    double val = 0.0;
    for (size_t i = 0; i < cons.size(); ++i) {
      if (!(lam[i] > 0.0)) return 1e300;
      val += rho[i] * conj(lam[i]);
    }
    for (size_t v = 0; v < nv; ++v) val += mu[v] * b[v];
    return val;
  };

  std::vector<double> mu(nv, 0.1), lam, lam_trial, grad(nv), trial(nv);
  double f = phi(mu, lam);
  if (f >= 1e300) return out;
  double step = 1.0;
  for (int it = 0; it < 200000; ++it) {
    for (size_t v = 0; v < nv; ++v) {
      double s = b[v];
      for (size_t i = 0; i < cons.size(); ++i)
        s -= rho[i] * inv(lam[i]) * gam[v][i];
      grad[v] = s;
    }
    double kkt = 0.0;
    for (size_t v = 0; v < nv; ++v)
      kkt = std::max(kkt,
                     std::abs(mu[v] - std::max(0.0, mu[v] - grad[v])));
    if (kkt < 1e-11 * (1.0 + std::abs(f))) break;
    bool moved = false;
    for (int bt = 0; bt < 70; ++bt) {
      for (size_t v = 0; v < nv; ++v)
        trial[v] = std::max(0.0, mu[v] - step * grad[v]);
      const double ft = phi(trial, lam_trial);
      double descent = 0.0;
      for (size_t v = 0; v < nv; ++v)
        descent += grad[v] * (trial[v] - mu[v]);
      if (ft <= f + 1e-4 * descent && ft < 1e300) {
        mu = trial;
        lam = lam_trial;
        f = ft;
        step *= 1.6;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  out.ok = true;
  out.value = f;
  return out;
}

// Two-branch fork that collapses back to single branches: M = 2 with two
// leaves, so the reference enumeration stays tiny.
inline EventTree fork_chain_tree(double t1, double p_up) {
  std::vector<TreeNode> nodes(5);
  nodes[0] = {0, -1, 0, 1.0, {1, 2}};
  nodes[1] = {1, 0, 1, p_up, {3}};
  nodes[2] = {2, 0, 1, 1.0 - p_up, {4}};
  nodes[3] = {3, 1, 2, 1.0, {}};
  nodes[4] = {4, 2, 2, 1.0, {}};
  return EventTree({0.0, t1, 1.0}, nodes);
}

inline Scenario fork_scenario(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Scenario scn;
  scn.tree = fork_chain_tree(0.3 + 0.4 * u(rng), 0.3 + 0.4 * u(rng));
  scn.d = 1;
  scn.prices = AdaptedProcess(scn.tree.num_nodes(), 1, 1.0);
  const double up = 1.1 + 0.2 * u(rng), down = 0.8 + 0.15 * u(rng);
  scn.prices.at(1, 0) = up;
  scn.prices.at(3, 0) = up;
  scn.prices.at(2, 0) = down;
  scn.prices.at(4, 0) = down;
  const double lam = 0.02 + 0.1 * u(rng);
  scn.lambda = {0.0, lam, lam, 0.0};
  scn.habit = HabitParams::constants(scn.tree, u(rng), u(rng), 0.3 * u(rng));
  scn.utility.kind =
      u(rng) < 0.5 ? UtilityKind::log_utility : UtilityKind::power;
  scn.utility.p = 0.5;
  scn.x = 1.2 + u(rng);
  if (u(rng) < 0.5) {
    scn.q = {0.2 * u(rng) - 0.05};
    scn.endowment_payoffs = {{0.4 * u(rng)}, {0.4 * u(rng)}};
  }
  scn.tolerances.eps = 1e-5;
  scn.tolerances.tol = 1e-9;
  return scn;
}


}  // namespace conetree::testing

