#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace convcaps::caps {

/// Layer hyperparameters of the four-layer network. Defaults are the
/// published setup; `channels` and `classes` come from the dataset.
struct Architecture {
  std::uint32_t patch_size = 7;        // D, spatial filter is D x D
  std::uint32_t channels = 0;          // C
  std::uint32_t spatial_filters = 16;  // K1
  std::uint32_t primary_kernel = 9;    // f2
  std::uint32_t primary_stride = 2;    // s2
  std::uint32_t primary_arrays = 2;    // a2
  std::uint32_t primary_dim = 8;       // d2
  std::uint32_t window_size = 9;       // f3
  std::uint32_t window_stride = 2;     // s3
  std::uint32_t window_arrays = 4;     // K3 (= a3)
  std::uint32_t window_dim = 8;        // d3
  std::uint32_t classes = 0;           // n
  std::uint32_t class_dim = 16;        // d4

  std::size_t primary_maps() const noexcept { return std::size_t{primary_arrays} * primary_dim; }
  std::size_t primary_positions() const;  // c2
  std::size_t window_positions() const;   // c3
  std::size_t children() const { return std::size_t{window_arrays} * window_positions(); }

  /// Throws ShapeError when any field is zero, D is even, or a stage would
  /// receive a signal shorter than its kernel.
  void validate() const;

  std::string describe() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// The published structure for a dataset with `channels` bands and `classes` classes.
Architecture published_architecture(std::uint32_t channels, std::uint32_t classes);

struct LayerParamCounts {
  std::size_t spatial = 0;
  std::size_t primary = 0;
  std::size_t window = 0;
  std::size_t classcaps = 0;

  std::size_t total() const noexcept { return spatial + primary + window + classcaps; }
};

LayerParamCounts layer_param_counts(const Architecture& arch);
std::size_t param_count(const Architecture& arch);

}  // namespace convcaps::caps
