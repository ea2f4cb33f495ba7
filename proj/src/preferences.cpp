#include "conetree/preferences.hpp"

#include <cmath>
#include <stdexcept>

namespace conetree {

void UtilitySpec::validate(int num_grid_points) const {
  if (kind == UtilityKind::power) {
    if (!(p < 1.0) || p == 0.0)
      throw std::invalid_argument("utility: power exponent needs p < 1, p != 0");
  }
  if (!discount.empty()) {
    if (static_cast<int>(discount.size()) != num_grid_points)
      throw std::invalid_argument("utility: discount vector size mismatch");
    for (double w : discount)
      if (!(w > 0.0))
        throw std::invalid_argument("utility: discount weights must be > 0");
  }
}

Utility::Utility(UtilitySpec spec, int num_grid_points)
    : spec_(std::move(spec)), grid_points_(num_grid_points) {
  spec_.validate(num_grid_points);
}

double Utility::weight(int k) const {
  if (spec_.discount.empty()) return 1.0;
  if (k < 0 || k >= grid_points_)
    throw std::invalid_argument("utility: grid index out of range");
  return spec_.discount[k];
}

double Utility::value(int k, double x) const {
  if (!(x > 0.0)) throw std::domain_error("utility: U needs x > 0");
  const double w = weight(k);
  if (spec_.kind == UtilityKind::log_utility) return w * std::log(x);
  return w * std::pow(x, spec_.p) / spec_.p;
}

double Utility::marginal(int k, double x) const {
  if (!(x > 0.0)) throw std::domain_error("utility: U' needs x > 0");
  const double w = weight(k);
  if (spec_.kind == UtilityKind::log_utility) return w / x;
  return w * std::pow(x, spec_.p - 1.0);
}

double Utility::inverse_marginal(int k, double y) const {
  if (!(y > 0.0)) throw std::domain_error("utility: I needs y > 0");
  const double w = weight(k);
  if (spec_.kind == UtilityKind::log_utility) return w / y;
  return std::pow(y / w, 1.0 / (spec_.p - 1.0));
}

double Utility::conjugate(int k, double y) const {
  if (!(y > 0.0)) throw std::domain_error("utility: V needs y > 0");
  const double w = weight(k);
  if (spec_.kind == UtilityKind::log_utility)
    return -w * std::log(y / w) - w;
  const double q = spec_.p / (spec_.p - 1.0);
  return w * (1.0 - spec_.p) / spec_.p * std::pow(y / w, q);
}

RaeReport rae_smoke_check(const std::function<double(double)>& u,
                          const std::function<double(double)>& uprime,
                          double x_min, double x_max, double affine_a,
                          double affine_b) {
  RaeReport r;
  auto elast = [&](double x) {
    const double uu = affine_a + affine_b * u(x);
    return x * affine_b * uprime(x) / std::abs(uu);
  };
  // Elasticities of the standard families behave like a - b / log x near
  // the endpoints; a two-point fit in 1/log x recovers the limit, which a
  // raw sample at any finite grid point would understate.
  auto extrapolate = [&](double x_near, double x_far) {
    const double e1 = elast(x_near), e2 = elast(x_far);
    const double u1 = 1.0 / std::abs(std::log(x_near));
    const double u2 = 1.0 / std::abs(std::log(x_far));
    if (std::abs(u1 - u2) < 1e-14) return e2;
    return (e1 * u2 - e2 * u1) / (u2 - u1);
  };
  r.ae_infinity = extrapolate(std::sqrt(x_max), x_max);
  r.ae_zero = extrapolate(std::sqrt(x_min), x_min);
  r.ae_infinity_ok = std::isfinite(r.ae_infinity) && r.ae_infinity < 1.0 - 1e-6;
  r.ae_zero_ok = std::isfinite(r.ae_zero) && std::abs(r.ae_zero) < 1e6;
  r.upper_sign_ok = affine_a + affine_b * u(x_max) > 0.0;
  r.lower_sign_ok = affine_a + affine_b * u(x_min) < 0.0;
  return r;
}

RaeReport rae_smoke_check(const UtilitySpec& spec, double affine_a,
                          double affine_b) {
  UtilitySpec plain = spec;
  plain.discount.clear();
  Utility u(plain, 1);
  return rae_smoke_check([&](double x) { return u.value(0, x); },
                         [&](double x) { return u.marginal(0, x); }, 1e-6, 1e6,
                         affine_a, affine_b);
}

std::string to_string(UtilityKind kind) {
  return kind == UtilityKind::log_utility ? "log" : "power";
}

}  // namespace conetree
