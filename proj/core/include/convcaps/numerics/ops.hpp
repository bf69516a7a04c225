#pragma once

#include <cstddef>

#include "convcaps/numerics/tensor.hpp"

namespace convcaps::numerics {

/// max(0, x) elementwise.
Tensor relu(const Tensor& x);

/// Zeroes `grad` wherever the pre-activation was not strictly positive.
void relu_backward(const Tensor& pre_activation, Tensor& grad);

/// Number of valid (unpadded) positions of a length-`kernel` window moved by
/// `stride` over a signal of length `length`. Throws ShapeError if the signal
/// is shorter than the kernel.
std::size_t valid_output_length(std::size_t length, std::size_t kernel, std::size_t stride);

/// Strided 1D convolution with valid padding.
///   signal  [L x Cin], kernels [Cout x Cin x f], bias [Cout] -> [Lout x Cout]
Tensor conv1d_valid(const Tensor& signal, const Tensor& kernels, const Tensor& bias, std::size_t stride);

struct Conv1dGrads {
  Tensor kernels;
  Tensor bias;
  Tensor signal;
};

/// Accumulates parameter gradients of conv1d_valid into `kernel_grad` and
/// `bias_grad`. If `signal_grad` is non-null it receives dL/dsignal (added).
void conv1d_valid_backward(const Tensor& signal, const Tensor& kernels, std::size_t stride,
                           const Tensor& output_grad, Tensor& kernel_grad, Tensor& bias_grad,
                           Tensor* signal_grad = nullptr);

/// Single-channel 2D filter that covers the whole patch: sum(patch * kernel) + bias.
double conv2d_single_channel(const Tensor& patch, const Tensor& kernel, double bias);

}  // namespace convcaps::numerics
