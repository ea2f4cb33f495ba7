#include "conetree/event_tree.hpp"

#include <cmath>
#include <stdexcept>

namespace conetree {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("event_tree: " + msg);
}

}  // namespace

EventTree::EventTree(std::vector<double> times, std::vector<TreeNode> nodes)
    : times_(std::move(times)), nodes_(std::move(nodes)) {
  if (times_.size() < 2) fail("time grid needs at least two points");
  if (times_.front() != 0.0) fail("time grid must start at 0");
  for (size_t k = 0; k + 1 < times_.size(); ++k) {
    if (!(times_[k] < times_[k + 1])) fail("time grid must be increasing");
  }

  const int m = num_periods();
  levels_.assign(m + 1, {});
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const TreeNode& n = nodes_[i];
    if (n.id != static_cast<int>(i)) fail("node ids must be dense 0..n-1");
    if (n.time_index < 0 || n.time_index > m)
      fail("node " + std::to_string(n.id) + ": time index out of range");
    levels_[n.time_index].push_back(n.id);
    if (n.parent < 0) {
      if (root_ >= 0) fail("more than one root");
      root_ = n.id;
      if (n.time_index != 0)
        fail("root node " + std::to_string(n.id) + " must sit at index 0");
    }
  }
  if (root_ < 0) fail("no root node");
  validate();
}

void EventTree::validate() const {
  const int m = num_periods();
  for (const TreeNode& n : nodes_) {
    if (n.parent >= 0) {
      const TreeNode& p = node(n.parent);
      if (p.time_index + 1 != n.time_index)
        fail("node " + std::to_string(n.id) +
             ": time index must be parent's plus one");
      if (!(n.prob > 0.0) || n.prob > 1.0)
        fail("node " + std::to_string(n.id) +
             ": transition probability must lie in (0,1]");
    }
    if (n.children.empty()) {
      if (n.time_index != m)
        fail("leaf node " + std::to_string(n.id) +
             " must sit at the final time index");
    } else {
      double total = 0.0;
      for (int c : n.children) {
        if (node(c).parent != n.id)
          fail("child of node " + std::to_string(n.id) +
               " does not point back to it");
        total += node(c).prob;
      }
      if (std::abs(total - 1.0) > 1e-12)
        fail("node " + std::to_string(n.id) +
             ": child transition probabilities must sum to 1");
    }
  }
}

const TreeNode& EventTree::node(int id) const {
  if (id < 0 || id >= num_nodes())
    fail("unknown node id " + std::to_string(id));
  return nodes_[id];
}

double EventTree::node_probability(int id) const {
  double p = 1.0;
  for (int n = id; nodes_[n].parent >= 0; n = nodes_[n].parent)
    p *= nodes_[n].prob;
  (void)node(id);
  return p;
}

double EventTree::conditional_probability(int ancestor, int descendant) const {
  double p = 1.0;
  int n = descendant;
  while (n != ancestor) {
    if (nodes_[n].parent < 0)
      fail("node " + std::to_string(descendant) + " does not descend from " +
           std::to_string(ancestor));
    p *= nodes_[n].prob;
    n = nodes_[n].parent;
  }
  return p;
}

double cond_expectation(const EventTree& tree, const AdaptedProcess& x,
                        int node, int horizon_index) {
  if (x.dim() != 1)
    throw std::invalid_argument("cond_expectation: scalar process expected");
  const TreeNode& n = tree.node(node);
  if (horizon_index > tree.num_periods())
    throw std::invalid_argument("cond_expectation: horizon index out of range");
  if (horizon_index < n.time_index)
    throw std::invalid_argument(
        "cond_expectation: horizon index before node's time index");

  double acc = 0.0;
  // Depth-first walk down to the requested level, accumulating path weights.
  std::vector<std::pair<int, double>> stack{{node, 1.0}};
  while (!stack.empty()) {
    auto [id, w] = stack.back();
    stack.pop_back();
    const TreeNode& cur = tree.node(id);
    if (cur.time_index == horizon_index) {
      acc += w * x.at(id);
      continue;
    }
    for (int c : cur.children) stack.emplace_back(c, w * tree.node(c).prob);
  }
  return acc;
}

double time_integral_expectation(const EventTree& tree,
                                 const AdaptedProcess& x) {
  if (x.dim() != 1)
    throw std::invalid_argument(
        "time_integral_expectation: scalar process expected");
  double acc = 0.0;
  for (int k = 0; k < tree.num_periods(); ++k) {
    double level = 0.0;
    for (int id : tree.nodes_at(k)) level += tree.node_probability(id) * x.at(id);
    acc += tree.dt(k) * level;
  }
  return acc;
}

double martingale_residual(const EventTree& tree, const AdaptedProcess& x) {
  double worst = 0.0;
  for (int id = 0; id < tree.num_nodes(); ++id) {
    const TreeNode& n = tree.node(id);
    if (n.children.empty()) continue;
    for (int i = 0; i < x.dim(); ++i) {
      double mean = 0.0;
      for (int c : n.children) mean += tree.node(c).prob * x.at(c, i);
      worst = std::max(worst, std::abs(x.at(id, i) - mean));
    }
  }
  return worst;
}

bool is_martingale(const EventTree& tree, const AdaptedProcess& x,
                   double tol) {
  return martingale_residual(tree, x) <= tol;
}

}  // namespace conetree
