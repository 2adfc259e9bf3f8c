#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "mimick/tape.hpp"
#include "mimick/tensor.hpp"

namespace mimick {

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates_checked = 0;
  bool passed = true;
};

// Relative error used by gradient_check: |a - n| / max(|a|, |n|, floor).
// The floor keeps coordinates whose true gradient is ~0 from being judged on
// finite-difference round-off alone.
inline constexpr double kGradientCheckFloor = 1e-4;
double gradient_relative_error(double analytic, double numeric);

// Compares backpropagated gradients of `loss` with central differences
// (f(p+eps) - f(p-eps)) / 2eps, one coordinate at a time. The closure must be
// deterministic (dropout off). `max_coordinates` > 0 checks an evenly spaced
// subset of each parameter instead of every coordinate.
GradientCheckReport gradient_check(const std::function<Var(Tape&)>& loss,
                                   const ParameterList& params,
                                   double eps = 1e-5, double tol = 1e-4,
                                   std::size_t max_coordinates = 0);

}  // namespace mimick
