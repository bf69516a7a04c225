#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace convcaps::hsi {

/// Hyperspectral cube: H x W pixels, C spectral channels, stored
/// (row, col, channel) row-major, with an optional ground-truth label map
/// (0 = unlabeled background).
class HsiCube {
 public:
  HsiCube() = default;
  HsiCube(std::size_t height, std::size_t width, std::size_t channels);
  HsiCube(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> values,
          std::vector<std::uint16_t> labels = {});

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return height_ * width_; }
  bool has_labels() const noexcept { return has_labels_; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  std::span<const std::uint16_t> labels() const noexcept { return labels_; }

  std::span<const double> pixel(std::size_t row, std::size_t col) const;
  std::span<double> pixel(std::size_t row, std::size_t col);

  std::uint16_t label(std::size_t row, std::size_t col) const { return labels_[row * width_ + col]; }
  void set_label(std::size_t row, std::size_t col, std::uint16_t id);

  /// Largest class id present in the label map.
  std::size_t num_classes() const;
  /// Pixel count per class id, index 0 = background.
  std::vector<std::size_t> class_histogram() const;

  friend bool operator==(const HsiCube&, const HsiCube&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  bool has_labels_ = false;
  std::vector<double> values_;
  std::vector<std::uint16_t> labels_;
};

inline constexpr std::uint8_t kCubeFormatVersion = 1;

/// HSIC container:
///   "HSIC" | u8 version | u32 H | u32 W | u32 C | u8 has_labels |
///   H*W*C f32 (row, col, channel) | [H*W u16 labels]      (all little-endian)
std::vector<std::uint8_t> encode_cube(const HsiCube& cube);
HsiCube decode_cube(std::span<const std::uint8_t> bytes);

void save_cube(const HsiCube& cube, const std::filesystem::path& path);
HsiCube load_cube(const std::filesystem::path& path);

}  // namespace convcaps::hsi
