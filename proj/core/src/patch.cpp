#include "convcaps/hsi/patch.hpp"

#include <algorithm>
#include <stdexcept>

#include "convcaps/errors.hpp"

namespace convcaps::hsi {

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto last = static_cast<std::ptrdiff_t>(n - 1);
  // Patches wider than twice the image need repeated folding.
  while (i < 0 || i > last) {
    if (i < 0) i = -i;
    if (i > last) i = 2 * last - i;
  }
  return static_cast<std::size_t>(i);
}

void extract_patch_into(const HsiCube& cube, std::size_t row, std::size_t col, std::size_t size,
                        numerics::Tensor& out) {
  if (size % 2 == 0) throw ShapeError("patch size must be odd, got " + std::to_string(size));
  if (row >= cube.height() || col >= cube.width()) throw std::out_of_range("patch centre outside cube");
  const std::size_t c = cube.channels();
  if (out.shape() != numerics::Shape{size, size, c}) out = numerics::Tensor({size, size, c});

  const auto half = static_cast<std::ptrdiff_t>(size / 2);
  double* dst = out.data();
  for (std::ptrdiff_t dy = -half; dy <= half; ++dy) {
    const std::size_t r = reflect_index(static_cast<std::ptrdiff_t>(row) + dy, cube.height());
    for (std::ptrdiff_t dx = -half; dx <= half; ++dx) {
      const std::size_t cc = reflect_index(static_cast<std::ptrdiff_t>(col) + dx, cube.width());
      const auto px = cube.pixel(r, cc);
      dst = std::copy(px.begin(), px.end(), dst);
    }
  }
}

Patch extract_patch(const HsiCube& cube, std::size_t row, std::size_t col, std::size_t size) {
  Patch p;
  p.center = {row, col};
  extract_patch_into(cube, row, col, size, p.data);
  p.label = cube.label(row, col);
  return p;
}

}  // namespace convcaps::hsi
