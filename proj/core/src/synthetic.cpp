#include "convcaps/app/synthetic.hpp"

#include <stdexcept>
#include <vector>

#include "convcaps/random.hpp"

namespace convcaps::app {

hsi::HsiCube make_toy_cube(const ToyCubeSpec& spec) {
  if (spec.classes == 0 || spec.classes > spec.width) throw std::invalid_argument("toy cube: bad class count");
  if (2 * spec.background_rows >= spec.height) throw std::invalid_argument("toy cube: background covers the image");
  Rng rng(spec.seed);
  std::vector<std::vector<double>> prototypes(spec.classes, std::vector<double>(spec.channels));
  for (auto& p : prototypes) {
    for (double& v : p) v = normal(rng);
  }
  std::vector<double> background(spec.channels, 0.0);
  for (const auto& p : prototypes) {
    for (std::size_t c = 0; c < spec.channels; ++c) background[c] += p[c] / static_cast<double>(spec.classes);
  }

  hsi::HsiCube cube(spec.height, spec.width, spec.channels);
  for (std::size_t r = 0; r < spec.height; ++r) {
    const bool unlabeled = r < spec.background_rows || r >= spec.height - spec.background_rows;
    for (std::size_t c = 0; c < spec.width; ++c) {
      const std::size_t k = c * spec.classes / spec.width;
      const auto& base = unlabeled ? background : prototypes[k];
      auto px = cube.pixel(r, c);
      for (std::size_t ch = 0; ch < spec.channels; ++ch) px[ch] = base[ch] + spec.noise * normal(rng);
      cube.set_label(r, c, unlabeled ? 0 : static_cast<std::uint16_t>(k + 1));
    }
  }
  return cube;
}

caps::Architecture toy_architecture(std::uint32_t channels, std::uint32_t classes) {
  caps::Architecture a;
  a.patch_size = 3;
  a.channels = channels;
  a.spatial_filters = 8;
  a.primary_kernel = 5;
  a.primary_stride = 2;
  a.primary_arrays = 2;
  a.primary_dim = 4;
  a.window_size = 3;
  a.window_stride = 2;
  a.window_arrays = 2;
  a.window_dim = 4;
  a.classes = classes;
  a.class_dim = 8;
  return a;
}

RunConfig toy_run_config(const std::string& dataset, const ToyCubeSpec& spec) {
  RunConfig cfg;
  cfg.dataset = dataset;
  cfg.output_dir = "toy-run";
  cfg.arch = toy_architecture(static_cast<std::uint32_t>(spec.channels), static_cast<std::uint32_t>(spec.classes));
  cfg.train.epochs = 20;
  cfg.train.batch_size = 16;
  return cfg;
}

}  // namespace convcaps::app
