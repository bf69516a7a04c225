#include "convcaps/numerics/ops.hpp"

#include <algorithm>

#include "convcaps/errors.hpp"

namespace convcaps::numerics {

Tensor relu(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.values()) v = std::max(0.0, v);
  return out;
}

void relu_backward(const Tensor& pre_activation, Tensor& grad) {
  if (pre_activation.size() != grad.size()) throw ShapeError("relu_backward: size mismatch");
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(pre_activation[i] > 0.0)) grad[i] = 0.0;
  }
}

std::size_t valid_output_length(std::size_t length, std::size_t kernel, std::size_t stride) {
  if (stride == 0) throw ShapeError("stride must be positive");
  if (kernel == 0) throw ShapeError("kernel size must be positive");
  if (length < kernel) {
    throw ShapeError("signal length " + std::to_string(length) + " is shorter than kernel " +
                     std::to_string(kernel));
  }
  return (length - kernel) / stride + 1;
}

namespace {

void check_conv1d_shapes(const Tensor& signal, const Tensor& kernels, std::size_t stride) {
  if (signal.rank() != 2) throw ShapeError("conv1d: signal must be [L x Cin]");
  if (kernels.rank() != 3) throw ShapeError("conv1d: kernels must be [Cout x Cin x f]");
  if (kernels.dim(1) != signal.dim(1)) {
    throw ShapeError("conv1d: kernel input channels " + std::to_string(kernels.dim(1)) +
                     " != signal channels " + std::to_string(signal.dim(1)));
  }
  valid_output_length(signal.dim(0), kernels.dim(2), stride);
}

}  // namespace

Tensor conv1d_valid(const Tensor& signal, const Tensor& kernels, const Tensor& bias, std::size_t stride) {
  check_conv1d_shapes(signal, kernels, stride);
  const std::size_t cin = signal.dim(1);
  const std::size_t cout = kernels.dim(0);
  const std::size_t f = kernels.dim(2);
  if (bias.size() != cout) throw ShapeError("conv1d: bias length must equal output channels");
  const std::size_t lout = valid_output_length(signal.dim(0), f, stride);

  Tensor out({lout, cout});
  const double* x = signal.data();
  const double* w = kernels.data();
  for (std::size_t p = 0; p < lout; ++p) {
    const double* window = x + p * stride * cin;
    for (std::size_t o = 0; o < cout; ++o) {
      const double* wo = w + o * cin * f;
      double acc = bias[o];
      for (std::size_t t = 0; t < f; ++t) {
        const double* xt = window + t * cin;
        for (std::size_t c = 0; c < cin; ++c) acc += wo[c * f + t] * xt[c];
      }
      out[p * cout + o] = acc;
    }
  }
  return out;
}

void conv1d_valid_backward(const Tensor& signal, const Tensor& kernels, std::size_t stride,
                           const Tensor& output_grad, Tensor& kernel_grad, Tensor& bias_grad,
                           Tensor* signal_grad) {
  check_conv1d_shapes(signal, kernels, stride);
  const std::size_t cin = signal.dim(1);
  const std::size_t cout = kernels.dim(0);
  const std::size_t f = kernels.dim(2);
  const std::size_t lout = valid_output_length(signal.dim(0), f, stride);
  if (output_grad.size() != lout * cout) throw ShapeError("conv1d_backward: output gradient shape");
  if (kernel_grad.size() != kernels.size() || bias_grad.size() != cout) {
    throw ShapeError("conv1d_backward: gradient accumulator shape");
  }
  if (signal_grad && signal_grad->size() != signal.size()) {
    throw ShapeError("conv1d_backward: signal gradient shape");
  }

  const double* x = signal.data();
  const double* w = kernels.data();
  double* gw = kernel_grad.data();
  for (std::size_t p = 0; p < lout; ++p) {
    const std::size_t base = p * stride * cin;
    for (std::size_t o = 0; o < cout; ++o) {
      const double g = output_grad[p * cout + o];
      if (g == 0.0) continue;
      bias_grad[o] += g;
      double* gwo = gw + o * cin * f;
      const double* wo = w + o * cin * f;
      for (std::size_t t = 0; t < f; ++t) {
        const std::size_t row = base + t * cin;
        for (std::size_t c = 0; c < cin; ++c) {
          gwo[c * f + t] += g * x[row + c];
          if (signal_grad) (*signal_grad)[row + c] += g * wo[c * f + t];
        }
      }
    }
  }
}

double conv2d_single_channel(const Tensor& patch, const Tensor& kernel, double bias) {
  if (patch.shape() != kernel.shape()) {
    throw ShapeError("conv2d: patch " + shape_string(patch.shape()) + " vs kernel " +
                     shape_string(kernel.shape()));
  }
  double acc = bias;
  for (std::size_t i = 0; i < patch.size(); ++i) acc += patch[i] * kernel[i];
  return acc;
}

}  // namespace convcaps::numerics
