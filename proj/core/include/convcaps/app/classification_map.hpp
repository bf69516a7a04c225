#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "convcaps/caps/architecture.hpp"
#include "convcaps/caps/params.hpp"
#include "convcaps/hsi/cube.hpp"

namespace convcaps::app {

using Rgb = std::array<std::uint8_t, 3>;

/// class id -> colour. Id 0 (background) always renders black.
struct Palette {
  std::map<std::uint16_t, Rgb> colors;

  bool has(std::uint16_t id) const { return id == 0 || colors.count(id) != 0; }
  Rgb color(std::uint16_t id) const;
};

/// 16 fixed, well-separated colours for ids 1..16.
Palette default_palette();
/// Lines of "id r g b"; '#' comments allowed.
Palette parse_palette(const std::string& text);

struct ClassificationMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint16_t> ids;  // row-major, 0 where masked
};

/// Classifies the patch around every pixel. With `mask_background`,
/// unlabeled pixels are left at 0 instead of being classified.
ClassificationMap classify_cube(const hsi::HsiCube& cube, const caps::Architecture& arch,
                                const caps::ModelParams& params, std::size_t routing_iters, bool mask_background,
                                std::size_t threads = 0);

/// Binary PPM: "P6\n{W} {H}\n255\n" + 3*W*H bytes. Throws ConfigError
/// before producing anything if an id has no palette entry.
std::vector<std::uint8_t> encode_ppm(const ClassificationMap& map, const Palette& palette);

}  // namespace convcaps::app
