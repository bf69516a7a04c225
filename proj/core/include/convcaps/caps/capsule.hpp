#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace convcaps::caps {

/// positions x arrays x dim block of capsule vectors.
struct CapsuleTensor {
  std::size_t positions = 0;
  std::size_t arrays = 0;
  std::size_t dim = 0;
  std::vector<double> data;

  CapsuleTensor() = default;
  CapsuleTensor(std::size_t positions, std::size_t arrays, std::size_t dim)
      : positions(positions), arrays(arrays), dim(dim), data(positions * arrays * dim, 0.0) {}

  std::span<double> capsule(std::size_t position, std::size_t array) {
    return std::span<double>(data).subspan((position * arrays + array) * dim, dim);
  }
  std::span<const double> capsule(std::size_t position, std::size_t array) const {
    return std::span<const double>(data).subspan((position * arrays + array) * dim, dim);
  }

  friend bool operator==(const CapsuleTensor&, const CapsuleTensor&) = default;
};

double norm(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

/// v = (|s|^2 / (1 + |s|^2)) * s / |s|, and 0 for s = 0.
/// In double precision the length rounds to 1 once |s| exceeds about 1e8.
void squash(std::span<const double> s, std::span<double> out);
std::vector<double> squash(std::span<const double> s);

/// Adds dL/ds to `grad_in` given dL/dv.
void squash_backward(std::span<const double> s, std::span<const double> grad_out, std::span<double> grad_in);

}  // namespace convcaps::caps
