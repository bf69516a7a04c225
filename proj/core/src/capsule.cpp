#include "convcaps/caps/capsule.hpp"

#include <cmath>

#include "convcaps/errors.hpp"

namespace convcaps::caps {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

void squash(std::span<const double> s, std::span<double> out) {
  if (s.size() != out.size()) throw ShapeError("squash: size mismatch");
  const double n = norm(s);
  // |s|^2/(1+|s|^2)/|s| written as 1/(|s| + 1/|s|) so large inputs do not overflow.
  const double scale = n > 0.0 ? 1.0 / (n + 1.0 / n) : 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = scale * s[i];
}

std::vector<double> squash(std::span<const double> s) {
  std::vector<double> out(s.size());
  squash(s, out);
  return out;
}

void squash_backward(std::span<const double> s, std::span<const double> grad_out, std::span<double> grad_in) {
  const double n2 = dot(s, s);
  if (n2 == 0.0) return;
  const double n = std::sqrt(n2);
  const double g = 1.0 / (n + 1.0 / n);
  // d/dn [n / (1 + n^2)] / n
  const double dg_over_n = (1.0 - n2) / ((1.0 + n2) * (1.0 + n2) * n);
  const double sg = dot(s, grad_out);
  for (std::size_t i = 0; i < s.size(); ++i) grad_in[i] += g * grad_out[i] + dg_over_n * sg * s[i];
}

}  // namespace convcaps::caps
