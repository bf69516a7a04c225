#pragma once

#include <cstddef>

#include "convcaps/numerics/tensor.hpp"

namespace convcaps::metrics {

struct MarginConfig {
  double r_plus = 0.9;
  double r_minus = 0.1;
  double lambda = 0.5;

  void validate() const;

  friend bool operator==(const MarginConfig&, const MarginConfig&) = default;
};

/// sum_k T_k max(0, r+ - |u_k|)^2 + lambda (1 - T_k) max(0, |u_k| - r-)^2
/// for 1-based `true_class`. If `grad` is non-null it is overwritten with
/// dL/d(activations).
double margin_loss(const numerics::Tensor& activations, std::size_t true_class, const MarginConfig& cfg,
                   numerics::Tensor* grad = nullptr);

}  // namespace convcaps::metrics
