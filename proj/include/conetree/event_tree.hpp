#pragma once

#include <string>
#include <vector>

namespace conetree {

/// One node of a finite event tree. The root has parent == -1 and prob == 1.
/// `prob` is the transition probability from the parent, strictly positive.
struct TreeNode {
  int id = -1;
  int parent = -1;
  int time_index = 0;
  double prob = 1.0;
  std::vector<int> children;
};

/// Finite filtered probability space on a time grid t_0 = 0 < ... < t_M = T.
/// All nodes at time index k live in the same information level; every leaf
/// sits at index M. Unconditional node probabilities are recomputed as exact
/// products of transition probabilities rather than cached.
class EventTree {
 public:
  /// Empty placeholder; assign a real tree before use.
  EventTree() = default;
  EventTree(std::vector<double> times, std::vector<TreeNode> nodes);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_periods() const { return static_cast<int>(times_.size()) - 1; }
  double horizon() const { return times_.back(); }
  double time_at(int k) const { return times_.at(k); }
  double dt(int k) const { return times_.at(k + 1) - times_.at(k); }
  const std::vector<double>& times() const { return times_; }

  const TreeNode& node(int id) const;
  int root() const { return root_; }
  bool is_leaf(int id) const { return node(id).children.empty(); }
  const std::vector<int>& nodes_at(int k) const { return levels_.at(k); }
  const std::vector<int>& leaves() const { return levels_.back(); }

  /// Product of transition probabilities along the root path.
  double node_probability(int id) const;

  /// Conditional path probability of `descendant` given `ancestor`.
  double conditional_probability(int ancestor, int descendant) const;

 private:
  void validate() const;

  std::vector<double> times_;
  std::vector<TreeNode> nodes_;
  std::vector<std::vector<int>> levels_;
  int root_ = -1;
};

/// Vector-valued process with one value per node; adaptedness is structural.
class AdaptedProcess {
 public:
  AdaptedProcess() = default;
  AdaptedProcess(int num_nodes, int dim, double fill = 0.0)
      : dim_(dim), values_(static_cast<size_t>(num_nodes) * dim, fill) {}

  static AdaptedProcess constant(const EventTree& tree, double value) {
    return AdaptedProcess(tree.num_nodes(), 1, value);
  }

  int dim() const { return dim_; }
  int num_nodes() const {
    return dim_ == 0 ? 0 : static_cast<int>(values_.size()) / dim_;
  }

  double at(int node, int i = 0) const {
    return values_.at(static_cast<size_t>(node) * dim_ + i);
  }
  double& at(int node, int i = 0) {
    return values_.at(static_cast<size_t>(node) * dim_ + i);
  }

  const std::vector<double>& raw() const { return values_; }

 private:
  int dim_ = 0;
  std::vector<double> values_;
};

/// E[X_{t_k} | node] for a scalar process, k at or after the node's level.
double cond_expectation(const EventTree& tree, const AdaptedProcess& x,
                        int node, int horizon_index);

/// Left endpoint rule for E[ integral_0^T X_t dt ]:
///   sum over k < M of dt_k * sum over level-k nodes of p_node * X_node.
double time_integral_expectation(const EventTree& tree,
                                 const AdaptedProcess& x);

/// True iff every non-leaf node value equals the probability-weighted
/// average of its children, componentwise within tol.
bool is_martingale(const EventTree& tree, const AdaptedProcess& x, double tol);

/// Largest componentwise one-step martingale defect, for diagnostics.
double martingale_residual(const EventTree& tree, const AdaptedProcess& x);

}  // namespace conetree
