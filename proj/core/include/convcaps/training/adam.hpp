#pragma once

#include <cstdint>
#include <span>

#include "convcaps/caps/params.hpp"

namespace convcaps::training {

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

struct AdamState {
  caps::ModelParams first_moment;
  caps::ModelParams second_moment;
  std::uint64_t step = 0;

  static AdamState for_params(const caps::ModelParams& params);
};

/// One bias-corrected Adam update of a flat block; `step` is the 1-based
/// count including this update.
void adam_update(std::span<double> theta, std::span<const double> grad, std::span<double> m, std::span<double> v,
                 std::uint64_t step, const AdamConfig& cfg);

/// Advances `state.step` and updates every parameter tensor. Throws
/// NumericalError if any updated parameter is non-finite.
void adam_step(caps::ModelParams& params, const caps::ModelParams& grads, AdamState& state, const AdamConfig& cfg);

}  // namespace convcaps::training
