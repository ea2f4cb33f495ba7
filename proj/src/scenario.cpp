#include "conetree/scenario.hpp"

#include <cmath>
#include <stdexcept>

namespace conetree {

void Scenario::validate() const {
  if (d < 1) throw std::invalid_argument("scenario: need at least one asset");
  if (prices.dim() != d || prices.num_nodes() != tree.num_nodes())
    throw std::invalid_argument("scenario: prices must be d per node");
  for (int id = 0; id < tree.num_nodes(); ++id)
    for (int i = 0; i < d; ++i)
      if (!(prices.at(id, i) > 0.0))
        throw std::invalid_argument("scenario: prices must be positive");
  if (static_cast<int>(lambda.size()) != (d + 1) * (d + 1))
    throw std::invalid_argument("scenario: lambda must be (1+d)^2");
  habit.validate(tree);
  utility.validate(tree.num_periods() + 1);
  const auto& leaves = tree.leaves();
  if (!q.empty()) {
    if (endowment_payoffs.size() != leaves.size())
      throw std::invalid_argument("scenario: one payoff row per leaf required");
    for (const auto& row : endowment_payoffs) {
      if (row.size() != q.size())
        throw std::invalid_argument("scenario: payoff row width != N");
      for (double v : row)
        if (v < 0.0 || !std::isfinite(v))
          throw std::invalid_argument(
              "scenario: endowment payoffs must be finite and >= 0");
    }
  }
  if (!(tolerances.eps >= 0.0) || !(tolerances.tol > 0.0) ||
      tolerances.max_cuts < 1)
    throw std::invalid_argument("scenario: bad tolerances");
}

BidAskMatrix Scenario::bid_ask_at(int node) const {
  std::vector<double> s(d);
  for (int i = 0; i < d; ++i) s[i] = prices.at(node, i);
  return BidAskMatrix::from_costs(s, lambda);
}

SolvencyCone Scenario::cone_at(int node) const {
  return solvency_generators(bid_ask_at(node));
}

int Scenario::leaf_index(int node) const {
  const auto& leaves = tree.leaves();
  for (size_t i = 0; i < leaves.size(); ++i)
    if (leaves[i] == node) return static_cast<int>(i);
  return -1;
}

double Scenario::endowment_cash(int leaf) const {
  if (q.empty()) return 0.0;
  const int idx = leaf_index(leaf);
  if (idx < 0) throw std::invalid_argument("scenario: not a leaf node");
  double v = 0.0;
  for (size_t i = 0; i < q.size(); ++i) v += q[i] * endowment_payoffs[idx][i];
  return v;
}

std::vector<double> uniform_grid(double horizon, int steps) {
  std::vector<double> t(steps + 1);
  for (int k = 0; k <= steps; ++k) t[k] = horizon * k / steps;
  t[steps] = horizon;
  return t;
}

EventTree make_chain_tree(const std::vector<double>& times) {
  const int m = static_cast<int>(times.size()) - 1;
  std::vector<TreeNode> nodes(m + 1);
  for (int k = 0; k <= m; ++k) {
    nodes[k].id = k;
    nodes[k].parent = k - 1;
    nodes[k].time_index = k;
    nodes[k].prob = 1.0;
    if (k < m) nodes[k].children = {k + 1};
  }
  return EventTree(times, std::move(nodes));
}

EventTree make_binary_tree(const std::vector<double>& times, double up_prob) {
  const int m = static_cast<int>(times.size()) - 1;
  std::vector<TreeNode> nodes;
  int next_id = 0;
  // Level k holds nodes [2^k - 1, 2^{k+1} - 1).
  for (int k = 0; k <= m; ++k) {
    const int count = 1 << k;
    for (int i = 0; i < count; ++i) {
      TreeNode n;
      n.id = next_id++;
      n.time_index = k;
      n.parent = (k == 0) ? -1 : ((n.id - 1) / 2);
      n.prob = (k == 0) ? 1.0 : ((n.id % 2 == 1) ? up_prob : 1.0 - up_prob);
      if (k < m) n.children = {2 * n.id + 1, 2 * n.id + 2};
      nodes.push_back(std::move(n));
    }
  }
  return EventTree(times, std::move(nodes));
}

}  // namespace conetree
