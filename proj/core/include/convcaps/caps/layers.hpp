#pragma once

#include <cstddef>

#include "convcaps/caps/capsule.hpp"
#include "convcaps/caps/params.hpp"

namespace convcaps::caps {

// SpatialConv: every spectral channel of the D x D x C patch is reduced to
// K1 values by the shared D x D filters, followed by ReLU.
Tensor spatial_conv_forward(const Tensor& patch, const SpatialConvParams& p);  // -> [C x K1]
void spatial_conv_backward(const Tensor& patch, const Tensor& output, const Tensor& output_grad,
                           SpatialConvParams& grad);

// PrimaryCaps: K2 strided 1D filters along the spectral axis, ReLU, then the
// K2 maps are grouped into `arrays` capsules of `dim` consecutive maps.
CapsuleTensor primary_caps_forward(const Tensor& features, const PrimaryCapsParams& p, std::size_t stride);
void primary_caps_backward(const Tensor& features, const PrimaryCapsParams& p, std::size_t stride,
                           const CapsuleTensor& output, const CapsuleTensor& output_grad, PrimaryCapsParams& grad,
                           Tensor* features_grad);

// 1D-ConvCaps: window q at position k sums W[q,i,j] * u[k*s + j, i] over child
// arrays i and window offsets j, adds b[q], then squashes. `raw` (optional)
// receives the pre-squash parents.
CapsuleTensor conv_caps_forward(const CapsuleTensor& children, const ConvCapsParams& p, std::size_t stride,
                                CapsuleTensor* raw = nullptr);
void conv_caps_backward(const CapsuleTensor& children, const ConvCapsParams& p, std::size_t stride,
                        const CapsuleTensor& raw, const CapsuleTensor& output_grad, ConvCapsParams& grad,
                        CapsuleTensor* children_grad);

}  // namespace convcaps::caps
