#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "convcaps/caps/architecture.hpp"
#include "convcaps/numerics/tensor.hpp"

namespace convcaps::caps {

using numerics::Tensor;

/// Spatial filters shared by every spectral channel.
struct SpatialConvParams {
  Tensor kernels;  // [K1 x D x D]
  Tensor bias;     // [K1]

  friend bool operator==(const SpatialConvParams&, const SpatialConvParams&) = default;
};

/// 1D convolution over the spectral axis; K2 = arrays * dim output maps.
struct PrimaryCapsParams {
  Tensor kernels;  // [K2 x K1 x f2]
  Tensor bias;     // [K2]
  std::size_t arrays = 0;
  std::size_t dim = 0;

  friend bool operator==(const PrimaryCapsParams&, const PrimaryCapsParams&) = default;
};

/// Constraint-window viewpoint tensors, one per output array q. Slice
/// weights[q][:, j, i, :] is the d3 x d2 matrix applied to child array i at
/// window offset j.
struct ConvCapsParams {
  Tensor weights;  // [K3 x d3 x f3 x a2 x d2]
  Tensor bias;     // [K3 x d3]

  friend bool operator==(const ConvCapsParams&, const ConvCapsParams&) = default;
};

/// One d4 x d3 viewpoint matrix per (child array, child position, class).
struct ClassCapsParams {
  Tensor weights;  // [a3 x c3 x n x d4 x d3]

  friend bool operator==(const ClassCapsParams&, const ClassCapsParams&) = default;
};

inline constexpr std::size_t kParamTensorCount = 7;
inline constexpr std::array<std::string_view, kParamTensorCount> kParamTensorNames = {
    "spatial.kernels", "spatial.bias", "primary.kernels", "primary.bias",
    "window.weights",  "window.bias",  "classcaps.weights"};

/// All learnable tensors. Tensor order in tensors() is the declaration order
/// used by checkpoints and optimizers.
struct ModelParams {
  SpatialConvParams spatial;
  PrimaryCapsParams primary;
  ConvCapsParams window;
  ClassCapsParams classcaps;

  static ModelParams zeros(const Architecture& arch);
  /// Uniform on [-b, b], b = sqrt(6 / (fan_in + fan_out)) per tensor; biases zero.
  static ModelParams glorot_uniform(const Architecture& arch, std::uint64_t seed);

  std::array<Tensor*, kParamTensorCount> tensors();
  std::array<const Tensor*, kParamTensorCount> tensors() const;

  std::size_t count() const;
  bool all_finite() const;
  void set_zero();
  /// this += scale * other
  void add_scaled(const ModelParams& other, double scale);
  void scale(double factor);

  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> values);
  /// Rounds every value through float32, as a checkpoint round trip would.
  void round_to_float();

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

}  // namespace convcaps::caps
