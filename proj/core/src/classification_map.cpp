#include "convcaps/app/classification_map.hpp"

#include <sstream>

#include "convcaps/errors.hpp"
#include "convcaps/training/trainer.hpp"

namespace convcaps::app {

Rgb Palette::color(std::uint16_t id) const {
  if (id == 0) return {0, 0, 0};
  const auto it = colors.find(id);
  if (it == colors.end()) throw ConfigError("palette has no entry for class " + std::to_string(id));
  return it->second;
}

Palette default_palette() {
  static constexpr Rgb kColors[16] = {
      {230, 25, 75},  {60, 180, 75},   {255, 225, 25}, {0, 130, 200},   {245, 130, 48},  {145, 30, 180},
      {70, 240, 240}, {240, 50, 230},  {210, 245, 60}, {250, 190, 212}, {0, 128, 128},   {220, 190, 255},
      {170, 110, 40}, {255, 250, 200}, {128, 0, 0},    {170, 255, 195}};
  Palette p;
  for (std::uint16_t i = 0; i < 16; ++i) p.colors[static_cast<std::uint16_t>(i + 1)] = kColors[i];
  return p;
}

Palette parse_palette(const std::string& text) {
  Palette p;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long id = 0, r = 0, g = 0, b = 0;
    if (!(ls >> id)) continue;
    if (!(ls >> r >> g >> b) || id < 1 || id > 0xFFFF || r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255) {
      throw ConfigError("palette line " + std::to_string(line_no) + ": expected 'id r g b' with 0..255 colours");
    }
    p.colors[static_cast<std::uint16_t>(id)] = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                                                static_cast<std::uint8_t>(b)};
  }
  return p;
}

ClassificationMap classify_cube(const hsi::HsiCube& cube, const caps::Architecture& arch,
                                const caps::ModelParams& params, std::size_t routing_iters, bool mask_background,
                                std::size_t threads) {
  if (cube.channels() != arch.channels) {
    throw ShapeError("checkpoint expects " + std::to_string(arch.channels) + " channels, cube has " +
                     std::to_string(cube.channels()));
  }
  std::vector<hsi::LabeledPixel> pixels;
  for (std::size_t r = 0; r < cube.height(); ++r) {
    for (std::size_t c = 0; c < cube.width(); ++c) {
      const auto id = cube.label(r, c);
      if (mask_background && id == 0) continue;
      pixels.push_back({{r, c}, id});
    }
  }
  ClassificationMap map{cube.height(), cube.width(), std::vector<std::uint16_t>(cube.pixel_count(), 0)};
  if (pixels.empty()) return map;
  const auto predicted =
      training::predict(arch, params, {&cube, arch.patch_size, pixels}, routing_iters, threads);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    map.ids[pixels[i].coord.row * cube.width() + pixels[i].coord.col] = static_cast<std::uint16_t>(predicted[i]);
  }
  return map;
}

std::vector<std::uint8_t> encode_ppm(const ClassificationMap& map, const Palette& palette) {
  for (auto id : map.ids) {
    if (!palette.has(id)) throw ConfigError("palette has no entry for class " + std::to_string(id));
  }
  const std::string header = "P6\n" + std::to_string(map.width) + " " + std::to_string(map.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + 3 * map.ids.size());
  for (auto id : map.ids) {
    const Rgb c = palette.color(id);
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

}  // namespace convcaps::app
