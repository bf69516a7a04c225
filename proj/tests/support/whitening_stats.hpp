#pragma once

// Random correlated cubes and brute-force population statistics for
// checking whitening.

#include <random>
#include <vector>

#include "convcaps/hsi/cube.hpp"
#include "oracles.hpp"

namespace wstats {

using convcaps::hsi::HsiCube;

// Correlated spectra: x = A z + offset with A = 2c*I + R, R uniform in
// [-1, 1], so the covariance is far from diagonal but well conditioned
// (smallest singular value of A is at least 2c - c = c).
inline HsiCube correlated_cube(std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  auto a = oracle::random_vec(c * c, rng);
  for (std::size_t i = 0; i < c; ++i) a[i * c + i] += 2.0 * static_cast<double>(c);
  const auto offset = oracle::random_vec(c, rng, -5.0, 5.0);
  HsiCube cube(h, w, c);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t col = 0; col < w; ++col) {
      const auto z = oracle::random_vec(c, rng, -scale, scale);
      auto px = cube.pixel(r, col);
      for (std::size_t i = 0; i < c; ++i) {
        double acc = offset[i];
        for (std::size_t j = 0; j < c; ++j) acc += a[i * c + j] * z[j];
        px[i] = acc;
      }
    }
  }
  return cube;
}

struct PopulationStats {
  std::vector<double> mean;
  std::vector<double> cov;  // c x c
};

inline PopulationStats brute_force_stats(const HsiCube& cube) {
  const std::size_t c = cube.channels();
  const double n = static_cast<double>(cube.pixel_count());
  PopulationStats s{std::vector<double>(c, 0.0), std::vector<double>(c * c, 0.0)};
  for (std::size_t r = 0; r < cube.height(); ++r) {
    for (std::size_t col = 0; col < cube.width(); ++col) {
      for (std::size_t i = 0; i < c; ++i) s.mean[i] += cube.pixel(r, col)[i] / n;
    }
  }
  for (std::size_t r = 0; r < cube.height(); ++r) {
    for (std::size_t col = 0; col < cube.width(); ++col) {
      const auto px = cube.pixel(r, col);
      for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < c; ++j) s.cov[i * c + j] += (px[i] - s.mean[i]) * (px[j] - s.mean[j]) / n;
      }
    }
  }
  return s;
}

}  // namespace wstats
