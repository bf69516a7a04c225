#pragma once

#include <cstddef>

#include "convcaps/caps/architecture.hpp"
#include "convcaps/caps/capsule.hpp"
#include "convcaps/caps/params.hpp"
#include "convcaps/caps/routing.hpp"

namespace convcaps::caps {

inline constexpr std::size_t kDefaultRoutingIterations = 3;

/// Intermediate activations of one forward pass.
struct ForwardCache {
  Tensor spatial;            // [C x K1]
  CapsuleTensor primary;     // [c2 x a2 x d2]
  CapsuleTensor window_raw;  // pre-squash parents
  CapsuleTensor window;      // [c3 x K3 x d3]
  Tensor predictions;        // [a3 x c3 x n x d4]
  RoutingTrace routing;
  Tensor activations;        // [n x d4]
};

/// Checks that the parameter tensors have the shapes `arch` implies.
void check_params(const Architecture& arch, const ModelParams& params);

/// spatial conv -> primary caps -> 1D conv caps -> class caps with routing.
/// Returns the n x d4 class capsules.
Tensor model_forward(const Tensor& patch, const Architecture& arch, const ModelParams& params,
                     std::size_t routing_iterations, ForwardCache* cache = nullptr);

/// Adds the parameter gradient of a scalar loss to `grad`, given dL/d(activations)
/// and the cache of the matching forward pass. Throws NumericalError if a
/// non-finite gradient appears.
void model_backward(const Tensor& patch, const Architecture& arch, const ModelParams& params,
                    const ForwardCache& cache, const Tensor& activations_grad, ModelParams& grad);

/// Capsule lengths of the class layer.
std::vector<double> class_lengths(const Tensor& activations);

/// 1-based class id with the longest capsule (ties to the lower id).
std::size_t predict_class(const Tensor& activations);

}  // namespace convcaps::caps
