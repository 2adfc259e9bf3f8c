#include "mimick/gradient_check.hpp"

#include <algorithm>
#include <cmath>

namespace mimick {

double gradient_relative_error(double analytic, double numeric) {
  const double scale =
      std::max({std::abs(analytic), std::abs(numeric), kGradientCheckFloor});
  return std::abs(analytic - numeric) / scale;
}

GradientCheckReport gradient_check(const std::function<Var(Tape&)>& loss,
                                   const ParameterList& params, double eps,
                                   double tol, std::size_t max_coordinates) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape(false);
    tape.backward(loss(tape));
  }
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) {
    analytic.push_back(p->grad());
    p->zero_grad();
  }

  auto evaluate = [&] {
    Tape tape(false);
    return tape.scalar(loss(tape));
  };

  GradientCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    auto values = p.value().values();
    const std::size_t n = values.size();
    const std::size_t stride =
        (max_coordinates == 0 || n <= max_coordinates)
            ? 1
            : (n + max_coordinates - 1) / max_coordinates;
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = evaluate();
      values[i] = saved - eps;
      const double down = evaluate();
      values[i] = saved;
      const double numeric = (up - down) / (2 * eps);
      const double a = analytic[k][i];
      const double err = gradient_relative_error(a, numeric);
      ++report.coordinates_checked;
      if (report.coordinates_checked == 1 || err > report.max_relative_error) {
        report.max_relative_error = err;
        report.worst_parameter = p.name();
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_relative_error <= tol;
  return report;
}

}  // namespace mimick
