#pragma once

#include <functional>
#include <string>
#include <vector>

namespace conetree {

enum class UtilityKind { log_utility, power };

/// Utility family selector. Power requires p < 1, p != 0. Optional
/// deterministic discount weights multiply U per grid point.
struct UtilitySpec {
  UtilityKind kind = UtilityKind::log_utility;
  double p = 0.5;
  std::vector<double> discount;  // empty, or one weight per grid index

  void validate(int num_grid_points) const;
};

/// Evaluation bundle: U, its marginal U', the inverse marginal I and the
/// convex conjugate V(y) = sup_x (U(x) - xy), all indexed by grid point so
/// that discount weights apply consistently (they multiply U and V and
/// divide into the argument of I).
class Utility {
 public:
  Utility(UtilitySpec spec, int num_grid_points);

  double value(int k, double x) const;
  double marginal(int k, double x) const;
  double inverse_marginal(int k, double y) const;
  double conjugate(int k, double y) const;
  double weight(int k) const;

  const UtilitySpec& spec() const { return spec_; }

 private:
  UtilitySpec spec_;
  int grid_points_;
};

/// Numerical asymptotic-elasticity diagnostic. Samples x U'(x) / U(x) at the
/// extremes of a log-spaced grid and evaluates the sign conditions on the
/// affine transform a + b U. Not a proof, a smoke check.
struct RaeReport {
  double ae_infinity = 0.0;
  double ae_zero = 0.0;
  bool ae_infinity_ok = false;
  bool ae_zero_ok = false;
  bool upper_sign_ok = false;  // U(x) eventually positive as x -> infinity
  bool lower_sign_ok = false;  // U(x) eventually negative as x -> 0
};

RaeReport rae_smoke_check(const std::function<double(double)>& u,
                          const std::function<double(double)>& uprime,
                          double x_min = 1e-6, double x_max = 1e6,
                          double affine_a = 0.0, double affine_b = 1.0);

RaeReport rae_smoke_check(const UtilitySpec& spec, double affine_a = 0.0,
                          double affine_b = 1.0);

std::string to_string(UtilityKind kind);

}  // namespace conetree
