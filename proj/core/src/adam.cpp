#include "convcaps/training/adam.hpp"

#include <cmath>

#include "convcaps/errors.hpp"

namespace convcaps::training {

void AdamConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
}

AdamState AdamState::for_params(const caps::ModelParams& params) {
  AdamState s{params, params, 0};
  s.first_moment.set_zero();
  s.second_moment.set_zero();
  return s;
}

void adam_update(std::span<double> theta, std::span<const double> grad, std::span<double> m, std::span<double> v,
                 std::uint64_t step, const AdamConfig& cfg) {
  if (grad.size() != theta.size() || m.size() != theta.size() || v.size() != theta.size()) {
    throw ShapeError("adam_update: buffer sizes differ");
  }
  const double t = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    theta[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

void adam_step(caps::ModelParams& params, const caps::ModelParams& grads, AdamState& state, const AdamConfig& cfg) {
  ++state.step;
  auto p = params.tensors();
  auto g = grads.tensors();
  auto m = state.first_moment.tensors();
  auto v = state.second_moment.tensors();
  for (std::size_t i = 0; i < caps::kParamTensorCount; ++i) {
    adam_update(p[i]->values(), g[i]->values(), m[i]->values(), v[i]->values(), state.step, cfg);
    if (!p[i]->all_finite()) {
      throw NumericalError(std::string("non-finite Adam update in ") + std::string(caps::kParamTensorNames[i]));
    }
  }
}

}  // namespace convcaps::training
