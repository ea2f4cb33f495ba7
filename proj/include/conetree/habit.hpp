#pragma once

#include <vector>

#include "conetree/event_tree.hpp"

namespace conetree {

/// Habit discounting data: accumulation rate delta, decay rate alpha (both
/// nonnegative, possibly node dependent) and the initial habit level z.
struct HabitParams {
  AdaptedProcess alpha;  // scalar per node
  AdaptedProcess delta;  // scalar per node
  double z = 0.0;

  static HabitParams constants(const EventTree& tree, double alpha,
                               double delta, double z);
  /// Deterministic per-grid-index rates; vectors of size M or M+1.
  static HabitParams from_grid(const EventTree& tree,
                               const std::vector<double>& alpha,
                               const std::vector<double>& delta, double z);
  void validate(const EventTree& tree) const;

  /// True when delta - alpha takes one value per time level (within tol).
  bool drift_is_deterministic(const EventTree& tree, double tol = 1e-12) const;
  bool delta_is_deterministic(const EventTree& tree, double tol = 1e-12) const;
};

/// Pathwise growth factor w with w_0 = 1 and one exact exponential factor
/// exp((delta-alpha) dt) per traversed interval. The subsistence plan is z*w.
AdaptedProcess growth_weight_path(const EventTree& tree, const HabitParams& h);

/// Pathwise decay factor exp(-integral alpha), same convention.
AdaptedProcess decay_weight_path(const EventTree& tree, const HabitParams& h);

/// Minimal feasible consumption plan z * w.
AdaptedProcess subsistence_path(const EventTree& tree, const HabitParams& h);

/// Standard-of-living path F(c) for a consumption rate held constant on each
/// interval: F_{k+1} = e^{-a dt} F_k + delta c (1 - e^{-a dt})/a, F_0 = z.
/// This is the exact one-interval integrator of dF = (delta c - alpha F) dt
/// and is the reporting convention for habit paths.
AdaptedProcess habit_process(const EventTree& tree, const AdaptedProcess& c,
                             const HabitParams& h);

struct ReduceResult {
  AdaptedProcess ctilde;
  AdaptedProcess habit;         // accumulator consistent with recover
  std::vector<int> violations;  // nodes where ctilde < -1e-12
};

/// Net consumption c - (habit accumulator). The accumulator used here is the
/// discrete convolution kernel that also defines gamma_process, so that
/// reduce and recover are exact mutual inverses and the pairing identities
/// between consumption and price systems hold to round-off. It agrees with
/// habit_process to first order in the step size.
ReduceResult reduce(const EventTree& tree, const AdaptedProcess& c,
                    const HabitParams& h);

struct RecoverResult {
  AdaptedProcess c;
  AdaptedProcess habit;
};

/// Inverse transform: c_k = z w_k + ctilde_k +
///   sum_{j<=k} delta_j dt_j exp(int_{t_j}^{t_k} (delta-alpha)) ctilde_j,
/// evaluated by a forward one-pass recursion. recover(reduce(c)) == c and
/// reduce(recover(ct)) == ct to machine precision.
RecoverResult recover(const EventTree& tree, const AdaptedProcess& ctilde,
                      const HabitParams& h);

/// Forward price of net consumption:
///   Gamma_t = Z0_t + delta_t E[ int_t^T exp(int_t^s (delta-alpha)) Z0_s ds | F_t ]
/// discretized with the same kernel as recover (left endpoints, the cell
/// containing t included). At the final level Gamma equals Z0 exactly.
AdaptedProcess gamma_process(const EventTree& tree, const AdaptedProcess& z0,
                             const HabitParams& h);

/// Deterministic numeraire G_t = 1 + delta_t int_t^T exp(int (delta-alpha)),
/// same quadrature as gamma_process, so gamma_process(Y) == Y * G for any
/// martingale Y when the drift is deterministic. G_T = 1 always.
AdaptedProcess numeraire_path(const EventTree& tree, const HabitParams& h);

}  // namespace conetree
