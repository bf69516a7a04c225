#pragma once

#include <cstddef>
#include <cstdint>

#include <string>

#include "convcaps/app/config.hpp"
#include "convcaps/caps/architecture.hpp"
#include "convcaps/hsi/cube.hpp"

namespace convcaps::app {

/// Synthetic labeled cube: one random Gaussian spectral prototype per class,
/// classes laid out as vertical bands, i.i.d. Gaussian noise on every value.
/// The first and last `background_rows` rows are unlabeled and hold noise
/// around the mean of the prototypes.
struct ToyCubeSpec {
  std::size_t height = 48;
  std::size_t width = 48;
  std::size_t channels = 32;
  std::size_t classes = 3;
  std::size_t background_rows = 2;
  double noise = 0.5;
  std::uint64_t seed = 7;
};

hsi::HsiCube make_toy_cube(const ToyCubeSpec& spec);

/// Scaled-down analogue of the published structure for the toy cube.
caps::Architecture toy_architecture(std::uint32_t channels, std::uint32_t classes);

/// Training settings for the toy cube: toy architecture, 20 epochs, batch 16,
/// other settings at their defaults. Output goes to "toy-run".
RunConfig toy_run_config(const std::string& dataset, const ToyCubeSpec& spec);

}  // namespace convcaps::app
