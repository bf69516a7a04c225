#include "convcaps/caps/network.hpp"

#include "convcaps/caps/layers.hpp"
#include "convcaps/errors.hpp"

namespace convcaps::caps {

void check_params(const Architecture& arch, const ModelParams& params) {
  const ModelParams expected = ModelParams::zeros(arch);
  const auto want = expected.tensors();
  const auto have = params.tensors();
  for (std::size_t i = 0; i < kParamTensorCount; ++i) {
    if (want[i]->shape() != have[i]->shape()) {
      throw ShapeError(std::string(kParamTensorNames[i]) + " has shape " + numerics::shape_string(have[i]->shape()) +
                       ", architecture expects " + numerics::shape_string(want[i]->shape()));
    }
  }
  if (params.primary.arrays != arch.primary_arrays || params.primary.dim != arch.primary_dim) {
    throw ShapeError("primary capsule grouping does not match architecture");
  }
}

Tensor model_forward(const Tensor& patch, const Architecture& arch, const ModelParams& params,
                     std::size_t routing_iterations, ForwardCache* cache) {
  if (patch.shape() != numerics::Shape{arch.patch_size, arch.patch_size, arch.channels}) {
    throw ShapeError("patch " + numerics::shape_string(patch.shape()) + " does not match architecture " +
                     arch.describe());
  }
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.spatial = spatial_conv_forward(patch, params.spatial);
  c.primary = primary_caps_forward(c.spatial, params.primary, arch.primary_stride);
  c.window = conv_caps_forward(c.primary, params.window, arch.window_stride, &c.window_raw);
  c.predictions = class_predictions(c.window, params.classcaps);
  c.activations = route(c.predictions, routing_iterations, cache ? &c.routing : nullptr);
  return c.activations;
}

void model_backward(const Tensor& patch, const Architecture& arch, const ModelParams& params,
                    const ForwardCache& cache, const Tensor& activations_grad, ModelParams& grad) {
  const Tensor grad_predictions = route_backward(cache.predictions, cache.routing, activations_grad);

  CapsuleTensor grad_window(cache.window.positions, cache.window.arrays, cache.window.dim);
  class_predictions_backward(cache.window, params.classcaps, grad_predictions, grad.classcaps, &grad_window);

  CapsuleTensor grad_primary(cache.primary.positions, cache.primary.arrays, cache.primary.dim);
  conv_caps_backward(cache.primary, params.window, arch.window_stride, cache.window_raw, grad_window, grad.window,
                     &grad_primary);

  Tensor grad_spatial(cache.spatial.shape());
  primary_caps_backward(cache.spatial, params.primary, arch.primary_stride, cache.primary, grad_primary,
                        grad.primary, &grad_spatial);

  spatial_conv_backward(patch, cache.spatial, grad_spatial, grad.spatial);

  if (!grad.all_finite()) throw NumericalError("non-finite parameter gradient");
}

std::vector<double> class_lengths(const Tensor& activations) {
  const std::size_t n = activations.dim(0), d = activations.dim(1);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = norm(activations.values().subspan(k * d, d));
  return out;
}

std::size_t predict_class(const Tensor& activations) {
  const auto lengths = class_lengths(activations);
  std::size_t best = 0;
  for (std::size_t k = 1; k < lengths.size(); ++k) {
    if (lengths[k] > lengths[best]) best = k;
  }
  return best + 1;
}

}  // namespace convcaps::caps
