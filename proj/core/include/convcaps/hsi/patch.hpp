#pragma once

#include <cstddef>
#include <cstdint>

#include "convcaps/hsi/cube.hpp"
#include "convcaps/numerics/tensor.hpp"

namespace convcaps::hsi {

struct PixelCoord {
  std::size_t row = 0;
  std::size_t col = 0;

  friend auto operator<=>(const PixelCoord&, const PixelCoord&) = default;
};

/// D x D x C neighbourhood around a centre pixel.
struct Patch {
  PixelCoord center;
  numerics::Tensor data;  // [D x D x C]
  std::uint16_t label = 0;
};

/// Mirror index about the image edge without repeating the edge sample:
/// -1 -> 1, n -> n-2.
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n);

/// Extracts the patch centred on (row, col). `size` must be odd.
Patch extract_patch(const HsiCube& cube, std::size_t row, std::size_t col, std::size_t size);

/// Same as extract_patch but writes into a preallocated [D x D x C] tensor.
void extract_patch_into(const HsiCube& cube, std::size_t row, std::size_t col, std::size_t size,
                        numerics::Tensor& out);

}  // namespace convcaps::hsi
