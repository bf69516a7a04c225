#include "convcaps/caps/layers.hpp"

#include "convcaps/errors.hpp"
#include "convcaps/numerics/ops.hpp"

namespace convcaps::caps {

using numerics::Shape;

namespace {

void check_spatial(const Tensor& patch, const SpatialConvParams& p) {
  if (patch.rank() != 3 || p.kernels.rank() != 3 || patch.dim(0) != p.kernels.dim(1) ||
      patch.dim(1) != p.kernels.dim(2)) {
    throw ShapeError("spatial conv: patch " + numerics::shape_string(patch.shape()) + " does not match filters " +
                     numerics::shape_string(p.kernels.shape()));
  }
  if (p.bias.size() != p.kernels.dim(0)) throw ShapeError("spatial conv: bias length");
}

std::size_t check_window(const CapsuleTensor& children, const ConvCapsParams& p, std::size_t stride) {
  const auto& w = p.weights.shape();
  if (w.size() != 5 || w[3] != children.arrays || w[4] != children.dim) {
    throw ShapeError("conv caps: viewpoint tensors " + numerics::shape_string(w) + " do not match children " +
                     std::to_string(children.arrays) + "x" + std::to_string(children.dim));
  }
  if (p.bias.shape() != Shape{w[0], w[1]}) throw ShapeError("conv caps: bias shape");
  return numerics::valid_output_length(children.positions, w[2], stride);
}

}  // namespace

Tensor spatial_conv_forward(const Tensor& patch, const SpatialConvParams& p) {
  check_spatial(patch, p);
  const std::size_t pixels = patch.dim(0) * patch.dim(1);
  const std::size_t c = patch.dim(2);
  const std::size_t k1 = p.kernels.dim(0);

  Tensor out({c, k1});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t k = 0; k < k1; ++k) out[ch * k1 + k] = p.bias[k];
  }
  const double* x = patch.data();
  const double* w = p.kernels.data();
  for (std::size_t px = 0; px < pixels; ++px) {
    const double* spectrum = x + px * c;
    for (std::size_t ch = 0; ch < c; ++ch) {
      double* row = out.data() + ch * k1;
      for (std::size_t k = 0; k < k1; ++k) row[k] += w[k * pixels + px] * spectrum[ch];
    }
  }
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

void spatial_conv_backward(const Tensor& patch, const Tensor& output, const Tensor& output_grad,
                           SpatialConvParams& grad) {
  check_spatial(patch, grad);
  const std::size_t pixels = patch.dim(0) * patch.dim(1);
  const std::size_t c = patch.dim(2);
  const std::size_t k1 = grad.kernels.dim(0);

  Tensor pre_grad = output_grad;
  numerics::relu_backward(output, pre_grad);  // output > 0 exactly where the pre-activation was
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t k = 0; k < k1; ++k) grad.bias[k] += pre_grad[ch * k1 + k];
  }
  const double* x = patch.data();
  double* gw = grad.kernels.data();
  for (std::size_t px = 0; px < pixels; ++px) {
    const double* spectrum = x + px * c;
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* g = pre_grad.data() + ch * k1;
      for (std::size_t k = 0; k < k1; ++k) gw[k * pixels + px] += g[k] * spectrum[ch];
    }
  }
}

CapsuleTensor primary_caps_forward(const Tensor& features, const PrimaryCapsParams& p, std::size_t stride) {
  if (p.arrays * p.dim != p.kernels.dim(0)) throw ShapeError("primary caps: arrays*dim must equal K2");
  Tensor maps = numerics::relu(numerics::conv1d_valid(features, p.kernels, p.bias, stride));
  CapsuleTensor out(maps.dim(0), p.arrays, p.dim);
  // [c2 x K2] with map index i*dim + e is already [c2 x arrays x dim] row-major.
  out.data.assign(maps.values().begin(), maps.values().end());
  return out;
}

void primary_caps_backward(const Tensor& features, const PrimaryCapsParams& p, std::size_t stride,
                           const CapsuleTensor& output, const CapsuleTensor& output_grad, PrimaryCapsParams& grad,
                           Tensor* features_grad) {
  const std::size_t k2 = p.kernels.dim(0);
  Tensor pre_grad({output.positions, k2}, output_grad.data);
  Tensor out({output.positions, k2}, output.data);
  numerics::relu_backward(out, pre_grad);
  numerics::conv1d_valid_backward(features, p.kernels, stride, pre_grad, grad.kernels, grad.bias, features_grad);
}

CapsuleTensor conv_caps_forward(const CapsuleTensor& children, const ConvCapsParams& p, std::size_t stride,
                                CapsuleTensor* raw) {
  const std::size_t c3 = check_window(children, p, stride);
  const auto& w = p.weights.shape();
  const std::size_t k3 = w[0], d3 = w[1], f3 = w[2];
  const std::size_t block = f3 * children.arrays * children.dim;  // one viewpoint row

  CapsuleTensor pre(c3, k3, d3);
  for (std::size_t k = 0; k < c3; ++k) {
    // Children at positions k*s .. k*s+f3-1 are contiguous in (j, i, e) order,
    // the same order as each row of T_q.
    const double* window = children.data.data() + k * stride * children.arrays * children.dim;
    for (std::size_t q = 0; q < k3; ++q) {
      auto parent = pre.capsule(k, q);
      for (std::size_t o = 0; o < d3; ++o) {
        const double* row = p.weights.data() + (q * d3 + o) * block;
        double acc = p.bias[q * d3 + o];
        for (std::size_t t = 0; t < block; ++t) acc += row[t] * window[t];
        parent[o] = acc;
      }
    }
  }
  CapsuleTensor out(c3, k3, d3);
  for (std::size_t k = 0; k < c3; ++k) {
    for (std::size_t q = 0; q < k3; ++q) squash(pre.capsule(k, q), out.capsule(k, q));
  }
  if (raw) *raw = std::move(pre);
  return out;
}

void conv_caps_backward(const CapsuleTensor& children, const ConvCapsParams& p, std::size_t stride,
                        const CapsuleTensor& raw, const CapsuleTensor& output_grad, ConvCapsParams& grad,
                        CapsuleTensor* children_grad) {
  const std::size_t c3 = check_window(children, p, stride);
  const auto& w = p.weights.shape();
  const std::size_t k3 = w[0], d3 = w[1], f3 = w[2];
  const std::size_t block = f3 * children.arrays * children.dim;
  if (raw.positions != c3 || output_grad.positions != c3) throw ShapeError("conv caps backward: cached shapes");

  std::vector<double> pre_grad(d3);
  for (std::size_t k = 0; k < c3; ++k) {
    const std::size_t base = k * stride * children.arrays * children.dim;
    const double* window = children.data.data() + base;
    for (std::size_t q = 0; q < k3; ++q) {
      std::fill(pre_grad.begin(), pre_grad.end(), 0.0);
      squash_backward(raw.capsule(k, q), output_grad.capsule(k, q), pre_grad);
      for (std::size_t o = 0; o < d3; ++o) {
        const double g = pre_grad[o];
        if (g == 0.0) continue;
        grad.bias[q * d3 + o] += g;
        double* grow = grad.weights.data() + (q * d3 + o) * block;
        for (std::size_t t = 0; t < block; ++t) grow[t] += g * window[t];
        if (children_grad) {
          const double* row = p.weights.data() + (q * d3 + o) * block;
          double* cg = children_grad->data.data() + base;
          for (std::size_t t = 0; t < block; ++t) cg[t] += g * row[t];
        }
      }
    }
  }
}

}  // namespace convcaps::caps
