#include "convcaps/caps/params.hpp"

#include <algorithm>
#include <cmath>

#include "convcaps/errors.hpp"
#include "convcaps/random.hpp"

namespace convcaps::caps {

ModelParams ModelParams::zeros(const Architecture& arch) {
  arch.validate();
  const std::size_t d = arch.patch_size;
  const std::size_t k1 = arch.spatial_filters;
  const std::size_t k2 = arch.primary_maps();
  ModelParams p;
  p.spatial.kernels = Tensor({k1, d, d});
  p.spatial.bias = Tensor({k1});
  p.primary.kernels = Tensor({k2, k1, arch.primary_kernel});
  p.primary.bias = Tensor({k2});
  p.primary.arrays = arch.primary_arrays;
  p.primary.dim = arch.primary_dim;
  p.window.weights =
      Tensor({arch.window_arrays, arch.window_dim, arch.window_size, arch.primary_arrays, arch.primary_dim});
  p.window.bias = Tensor({arch.window_arrays, arch.window_dim});
  p.classcaps.weights =
      Tensor({arch.window_arrays, arch.window_positions(), arch.classes, arch.class_dim, arch.window_dim});
  return p;
}

ModelParams ModelParams::glorot_uniform(const Architecture& arch, std::uint64_t seed) {
  ModelParams p = zeros(arch);
  Rng rng(seed);
  auto init = [&rng](Tensor& t, double fan_in, double fan_out) {
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : t.values()) v = uniform(rng, -bound, bound);
  };
  const double d2 = double(arch.patch_size) * arch.patch_size;
  // Fans follow the usual convolution convention (receptive field x channels);
  // viewpoint matrices use their own in/out dimensions.
  init(p.spatial.kernels, d2, d2 * arch.spatial_filters);
  init(p.primary.kernels, double(arch.primary_kernel) * arch.spatial_filters,
       double(arch.primary_kernel) * arch.primary_maps());
  init(p.window.weights, double(arch.window_size) * arch.primary_arrays * arch.primary_dim, arch.window_dim);
  init(p.classcaps.weights, arch.window_dim, arch.class_dim);
  return p;
}

std::array<Tensor*, kParamTensorCount> ModelParams::tensors() {
  return {&spatial.kernels, &spatial.bias, &primary.kernels, &primary.bias,
          &window.weights,  &window.bias,  &classcaps.weights};
}

std::array<const Tensor*, kParamTensorCount> ModelParams::tensors() const {
  return {&spatial.kernels, &spatial.bias, &primary.kernels, &primary.bias,
          &window.weights,  &window.bias,  &classcaps.weights};
}

std::size_t ModelParams::count() const {
  std::size_t n = 0;
  for (const Tensor* t : tensors()) n += t->size();
  return n;
}

bool ModelParams::all_finite() const {
  const auto ts = tensors();
  return std::all_of(ts.begin(), ts.end(), [](const Tensor* t) { return t->all_finite(); });
}

void ModelParams::set_zero() {
  for (Tensor* t : tensors()) t->fill(0.0);
}

void ModelParams::add_scaled(const ModelParams& other, double scale) {
  auto mine = tensors();
  auto theirs = other.tensors();
  for (std::size_t i = 0; i < kParamTensorCount; ++i) {
    if (mine[i]->size() != theirs[i]->size()) throw ShapeError("add_scaled: parameter shapes differ");
    double* a = mine[i]->data();
    const double* b = theirs[i]->data();
    for (std::size_t j = 0; j < mine[i]->size(); ++j) a[j] += scale * b[j];
  }
}

void ModelParams::scale(double factor) {
  for (Tensor* t : tensors()) {
    for (double& v : t->values()) v *= factor;
  }
}

std::vector<double> ModelParams::flatten() const {
  std::vector<double> out;
  out.reserve(count());
  for (const Tensor* t : tensors()) out.insert(out.end(), t->values().begin(), t->values().end());
  return out;
}

void ModelParams::assign_flat(std::span<const double> values) {
  if (values.size() != count()) throw ShapeError("assign_flat: expected " + std::to_string(count()) + " values");
  std::size_t offset = 0;
  for (Tensor* t : tensors()) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), t->size(), t->data());
    offset += t->size();
  }
}

void ModelParams::round_to_float() {
  for (Tensor* t : tensors()) {
    for (double& v : t->values()) v = static_cast<double>(static_cast<float>(v));
  }
}

}  // namespace convcaps::caps
