#include "conetree/habit.hpp"

#include <cmath>
#include <stdexcept>

namespace conetree {

namespace {

void check_scalar(const EventTree& tree, const AdaptedProcess& p,
                  const char* what) {
  if (p.dim() != 1 || p.num_nodes() != tree.num_nodes())
    throw std::invalid_argument(std::string("habit: ") + what +
                                " must be scalar with one value per node");
}

// (1 - e^{-a dt}) / a with its a -> 0 limit.
double decay_increment(double a, double dt) {
  if (a == 0.0) return dt;
  return -std::expm1(-a * dt) / a;
}

}  // namespace

HabitParams HabitParams::constants(const EventTree& tree, double alpha,
                                   double delta, double z) {
  HabitParams h;
  h.alpha = AdaptedProcess::constant(tree, alpha);
  h.delta = AdaptedProcess::constant(tree, delta);
  h.z = z;
  h.validate(tree);
  return h;
}

HabitParams HabitParams::from_grid(const EventTree& tree,
                                   const std::vector<double>& alpha,
                                   const std::vector<double>& delta,
                                   double z) {
  const size_t m = static_cast<size_t>(tree.num_periods());
  auto expand = [&](const std::vector<double>& grid) {
    if (grid.size() != m && grid.size() != m + 1)
      throw std::invalid_argument("habit: grid vector must have M or M+1 entries");
    AdaptedProcess p(tree.num_nodes(), 1);
    for (int id = 0; id < tree.num_nodes(); ++id) {
      const size_t k = static_cast<size_t>(tree.node(id).time_index);
      p.at(id) = grid[std::min(k, grid.size() - 1)];
    }
    return p;
  };
  HabitParams h;
  h.alpha = expand(alpha);
  h.delta = expand(delta);
  h.z = z;
  h.validate(tree);
  return h;
}

void HabitParams::validate(const EventTree& tree) const {
  check_scalar(tree, alpha, "alpha");
  check_scalar(tree, delta, "delta");
  for (int id = 0; id < tree.num_nodes(); ++id) {
    if (alpha.at(id) < 0.0 || delta.at(id) < 0.0)
      throw std::invalid_argument("habit: alpha and delta must be >= 0");
  }
  if (z < 0.0) throw std::invalid_argument("habit: initial habit must be >= 0");
}

bool HabitParams::drift_is_deterministic(const EventTree& tree,
                                         double tol) const {
  for (int k = 0; k <= tree.num_periods(); ++k) {
    const auto& level = tree.nodes_at(k);
    const double ref = delta.at(level[0]) - alpha.at(level[0]);
    for (int id : level)
      if (std::abs(delta.at(id) - alpha.at(id) - ref) > tol) return false;
  }
  return true;
}

bool HabitParams::delta_is_deterministic(const EventTree& tree,
                                         double tol) const {
  for (int k = 0; k <= tree.num_periods(); ++k) {
    const auto& level = tree.nodes_at(k);
    for (int id : level)
      if (std::abs(delta.at(id) - delta.at(level[0])) > tol) return false;
  }
  return true;
}

AdaptedProcess growth_weight_path(const EventTree& tree,
                                  const HabitParams& h) {
  AdaptedProcess w(tree.num_nodes(), 1);
  for (int k = 0; k <= tree.num_periods(); ++k) {
    for (int id : tree.nodes_at(k)) {
      const TreeNode& n = tree.node(id);
      if (n.parent < 0) {
        w.at(id) = 1.0;
      } else {
        const int par = n.parent;
        const double beta = h.delta.at(par) - h.alpha.at(par);
        w.at(id) = w.at(par) * std::exp(beta * tree.dt(k - 1));
      }
    }
  }
  return w;
}

AdaptedProcess decay_weight_path(const EventTree& tree, const HabitParams& h) {
  AdaptedProcess w(tree.num_nodes(), 1);
  for (int k = 0; k <= tree.num_periods(); ++k) {
    for (int id : tree.nodes_at(k)) {
      const TreeNode& n = tree.node(id);
      if (n.parent < 0)
        w.at(id) = 1.0;
      else
        w.at(id) = w.at(n.parent) * std::exp(-h.alpha.at(n.parent) * tree.dt(k - 1));
    }
  }
  return w;
}

AdaptedProcess subsistence_path(const EventTree& tree, const HabitParams& h) {
  AdaptedProcess w = growth_weight_path(tree, h);
  AdaptedProcess out(tree.num_nodes(), 1);
  for (int id = 0; id < tree.num_nodes(); ++id) out.at(id) = h.z * w.at(id);
  return out;
}

AdaptedProcess habit_process(const EventTree& tree, const AdaptedProcess& c,
                             const HabitParams& h) {
  check_scalar(tree, c, "consumption");
  h.validate(tree);
  for (int id = 0; id < tree.num_nodes(); ++id)
    if (c.at(id) < 0.0)
      throw std::invalid_argument("habit_process: consumption must be >= 0");

  AdaptedProcess f(tree.num_nodes(), 1);
  f.at(tree.root()) = h.z;
  for (int k = 0; k < tree.num_periods(); ++k) {
    const double dt = tree.dt(k);
    for (int id : tree.nodes_at(k)) {
      const double a = h.alpha.at(id);
      const double step = std::exp(-a * dt) * f.at(id) +
                          h.delta.at(id) * c.at(id) * decay_increment(a, dt);
      for (int child : tree.node(id).children) f.at(child) = step;
    }
  }
  return f;
}

ReduceResult reduce(const EventTree& tree, const AdaptedProcess& c,
                    const HabitParams& h) {
  check_scalar(tree, c, "consumption");
  h.validate(tree);
  const AdaptedProcess w = growth_weight_path(tree, h);

  ReduceResult out;
  out.ctilde = AdaptedProcess(tree.num_nodes(), 1);
  out.habit = AdaptedProcess(tree.num_nodes(), 1);
  AdaptedProcess phi(tree.num_nodes(), 1);

  const int m = tree.num_periods();
  for (int k = 0; k <= m; ++k) {
    const double dt = (k < m) ? tree.dt(k) : 0.0;
    for (int id : tree.nodes_at(k)) {
      const TreeNode& n = tree.node(id);
      double carried = 0.0;
      if (n.parent >= 0) {
        const double beta = h.delta.at(n.parent) - h.alpha.at(n.parent);
        carried = phi.at(n.parent) * std::exp(beta * tree.dt(k - 1));
      }
      const double dd = h.delta.at(id) * dt;
      const double ct = (c.at(id) - h.z * w.at(id) - carried) / (1.0 + dd);
      out.ctilde.at(id) = ct;
      phi.at(id) = carried + dd * ct;
      out.habit.at(id) = h.z * w.at(id) + phi.at(id);
      if (ct < -1e-12) out.violations.push_back(id);
    }
  }
  return out;
}

RecoverResult recover(const EventTree& tree, const AdaptedProcess& ctilde,
                      const HabitParams& h) {
  check_scalar(tree, ctilde, "net consumption");
  h.validate(tree);
  for (int id = 0; id < tree.num_nodes(); ++id)
    if (ctilde.at(id) < 0.0)
      throw std::invalid_argument("recover: net consumption must be >= 0");
  const AdaptedProcess w = growth_weight_path(tree, h);

  RecoverResult out;
  out.c = AdaptedProcess(tree.num_nodes(), 1);
  out.habit = AdaptedProcess(tree.num_nodes(), 1);
  AdaptedProcess phi(tree.num_nodes(), 1);

  const int m = tree.num_periods();
  for (int k = 0; k <= m; ++k) {
    const double dt = (k < m) ? tree.dt(k) : 0.0;
    for (int id : tree.nodes_at(k)) {
      const TreeNode& n = tree.node(id);
      double carried = 0.0;
      if (n.parent >= 0) {
        const double beta = h.delta.at(n.parent) - h.alpha.at(n.parent);
        carried = phi.at(n.parent) * std::exp(beta * tree.dt(k - 1));
      }
      phi.at(id) = carried + h.delta.at(id) * dt * ctilde.at(id);
      out.habit.at(id) = h.z * w.at(id) + phi.at(id);
      out.c.at(id) = ctilde.at(id) + out.habit.at(id);
    }
  }
  return out;
}

AdaptedProcess gamma_process(const EventTree& tree, const AdaptedProcess& z0,
                             const HabitParams& h) {
  check_scalar(tree, z0, "price density");
  h.validate(tree);
  const int m = tree.num_periods();
  AdaptedProcess hh(tree.num_nodes(), 1, 0.0);
  AdaptedProcess gamma(tree.num_nodes(), 1);
  for (int id : tree.leaves()) gamma.at(id) = z0.at(id);
  for (int k = m - 1; k >= 0; --k) {
    const double dt = tree.dt(k);
    for (int id : tree.nodes_at(k)) {
      const double beta = h.delta.at(id) - h.alpha.at(id);
      double tail = 0.0;
      for (int c : tree.node(id).children) tail += tree.node(c).prob * hh.at(c);
      hh.at(id) = dt * z0.at(id) + std::exp(beta * dt) * tail;
      gamma.at(id) = z0.at(id) + h.delta.at(id) * hh.at(id);
    }
  }
  return gamma;
}

AdaptedProcess numeraire_path(const EventTree& tree, const HabitParams& h) {
  if (!h.drift_is_deterministic(tree))
    throw std::invalid_argument(
        "numeraire_path: delta - alpha must be deterministic");
  const int m = tree.num_periods();
  // Deterministic tail integral S_k = dt_k + exp(beta_k dt_k) S_{k+1}.
  std::vector<double> tail(m + 1, 0.0);
  for (int k = m - 1; k >= 0; --k) {
    const int ref = tree.nodes_at(k).front();
    const double beta = h.delta.at(ref) - h.alpha.at(ref);
    tail[k] = tree.dt(k) + std::exp(beta * tree.dt(k)) * tail[k + 1];
  }
  AdaptedProcess g(tree.num_nodes(), 1);
  for (int id = 0; id < tree.num_nodes(); ++id) {
    const int k = tree.node(id).time_index;
    g.at(id) = 1.0 + h.delta.at(id) * tail[k];
  }
  return g;
}

}  // namespace conetree
