#include "convcaps/metrics/margin_loss.hpp"

#include <algorithm>
#include <cmath>

#include "convcaps/errors.hpp"

namespace convcaps::metrics {

void MarginConfig::validate() const {
  if (!(r_plus > 0.0 && r_plus < 1.0) || !(r_minus > 0.0 && r_minus < 1.0)) {
    throw ConfigError("margins must lie in (0, 1)");
  }
  if (!(r_minus < r_plus)) throw ConfigError("r_minus must be below r_plus");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
}

double margin_loss(const numerics::Tensor& activations, std::size_t true_class, const MarginConfig& cfg,
                   numerics::Tensor* grad) {
  if (activations.rank() != 2) throw ShapeError("margin loss expects [n x d] activations");
  const std::size_t n = activations.dim(0), d = activations.dim(1);
  if (true_class < 1 || true_class > n) {
    throw std::out_of_range("true class " + std::to_string(true_class) + " outside [1, " + std::to_string(n) + "]");
  }
  if (grad) *grad = numerics::Tensor(activations.shape());

  double loss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double* u = activations.data() + k * d;
    double sq = 0.0;
    for (std::size_t e = 0; e < d; ++e) sq += u[e] * u[e];
    const double len = std::sqrt(sq);
    double dlen = 0.0;  // dL/d|u_k|
    if (k + 1 == true_class) {
      const double gap = std::max(0.0, cfg.r_plus - len);
      loss += gap * gap;
      dlen = -2.0 * gap;
    } else {
      const double gap = std::max(0.0, len - cfg.r_minus);
      loss += cfg.lambda * gap * gap;
      dlen = 2.0 * cfg.lambda * gap;
    }
    if (grad && len > 0.0 && dlen != 0.0) {
      for (std::size_t e = 0; e < d; ++e) (*grad)[k * d + e] = dlen * u[e] / len;
    }
  }
  return loss;
}

}  // namespace convcaps::metrics
