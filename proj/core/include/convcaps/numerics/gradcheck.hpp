#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace convcaps::numerics {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Relative error with the denominator floored at 1e-12.
double relative_error(double analytic, double numeric);

/// Compares `analytic` against central differences of `f` around `point`,
/// one coordinate at a time. Throws NumericalError if `f` is non-finite at a
/// perturbed point.
GradCheckReport finite_difference_check(const ScalarFunction& f, std::span<const double> point,
                                        std::span<const double> analytic, double epsilon);

}  // namespace convcaps::numerics
