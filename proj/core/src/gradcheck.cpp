#include "convcaps/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "convcaps/errors.hpp"

namespace convcaps::numerics {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport finite_difference_check(const ScalarFunction& f, std::span<const double> point,
                                        std::span<const double> analytic, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("finite_difference_check: epsilon must be positive");
  if (point.size() != analytic.size()) throw ShapeError("finite_difference_check: gradient length mismatch");

  std::vector<double> x(point.begin(), point.end());
  GradCheckReport report;
  report.coordinates = x.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + epsilon;
    const double up = f(x);
    x[i] = saved - epsilon;
    const double down = f(x);
    x[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericalError("non-finite function value at perturbed coordinate " + std::to_string(i));
    }
    const double numeric = (up - down) / (2.0 * epsilon);
    const double err = relative_error(analytic[i], numeric);
    if (i == 0 || err > report.max_relative_error) {
      report.max_relative_error = err;
      report.worst_index = i;
      report.analytic = analytic[i];
      report.numeric = numeric;
    }
  }
  return report;
}

}  // namespace convcaps::numerics
