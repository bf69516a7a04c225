#pragma once

#include <vector>

#include "convcaps/hsi/cube.hpp"

namespace convcaps::hsi {

inline constexpr double kDefaultWhiteningEpsilon = 1e-5;

/// PCA whitening of pixel spectra, keeping every component.
///   y = diag(inv_sqrt_eigs) * basis^T * (x - mean)
struct WhiteningTransform {
  std::vector<double> mean;           // C
  std::vector<double> basis;          // C x C, row-major, columns are eigenvectors
  std::vector<double> eigenvalues;    // C, descending
  std::vector<double> inv_sqrt_eigs;  // 1 / sqrt(lambda + epsilon)
  double epsilon = kDefaultWhiteningEpsilon;

  std::size_t channels() const noexcept { return mean.size(); }
};

/// Fits mean and population covariance over every pixel of the cube,
/// labeled or not.
WhiteningTransform fit_whitening(const HsiCube& cube, double epsilon = kDefaultWhiteningEpsilon);

HsiCube apply_whitening(const HsiCube& cube, const WhiteningTransform& t);

/// x = basis * diag(sqrt(lambda + eps)) * y + mean
HsiCube invert_whitening(const HsiCube& whitened, const WhiteningTransform& t);

}  // namespace convcaps::hsi
