#pragma once

#include <cstddef>
#include <vector>

#include "convcaps/caps/capsule.hpp"
#include "convcaps/caps/params.hpp"

namespace convcaps::caps {

/// Routing logits and couplings, one row of `classes` entries per child.
/// Children are ordered (array i, position j).
struct RoutingState {
  Tensor logits;    // [a3*c3 x n], the logits behind the final coupling
  Tensor coupling;  // [a3*c3 x n]
  std::size_t iterations = 0;
};

/// Every intermediate of the unrolled routing loop, kept for backprop.
struct RoutingTrace {
  std::vector<Tensor> coupling;  // per iteration, [children x n]
  std::vector<Tensor> logits;    // per iteration, logits fed to the softmax
  std::vector<Tensor> parents;   // per iteration, s_k [n x d4]
  std::vector<Tensor> outputs;   // per iteration, v_k = squash(s_k) [n x d4]
};

struct RoutingResult {
  Tensor activations;  // [n x d4]
  RoutingState state;
};

/// Softmax over the class axis of a [children x n] logit table.
Tensor routing_softmax(const Tensor& logits);

/// u_hat[i, j, k] = W[i, j, k] * u[j, i]  -> [a3 x c3 x n x d4]
Tensor class_predictions(const CapsuleTensor& children, const ClassCapsParams& p);
void class_predictions_backward(const CapsuleTensor& children, const ClassCapsParams& p,
                                const Tensor& predictions_grad, ClassCapsParams& grad,
                                CapsuleTensor* children_grad);

/// Routing by agreement over precomputed predictions. The last iteration
/// produces activations but does not update the logits.
Tensor route(const Tensor& predictions, std::size_t iterations, RoutingTrace* trace = nullptr,
             RoutingState* state = nullptr);

/// Gradient of the routed activations w.r.t. the predictions, differentiating
/// through couplings, logit updates and squashing of every iteration.
Tensor route_backward(const Tensor& predictions, const RoutingTrace& trace, const Tensor& activations_grad);

/// class_predictions followed by route.
RoutingResult dynamic_routing(const CapsuleTensor& children, const ClassCapsParams& p, std::size_t iterations);

}  // namespace convcaps::caps
