#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "convcaps/hsi/cube.hpp"
#include "convcaps/hsi/patch.hpp"

namespace convcaps::hsi {

struct SplitFractions {
  double train = 0.2;
  double validation = 0.1;

  friend bool operator==(const SplitFractions&, const SplitFractions&) = default;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;

  friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

/// floor(m * f_train), floor(m * f_val), remainder.
SplitCounts split_counts(std::size_t class_total, const SplitFractions& fractions);

struct LabeledPixel {
  PixelCoord coord;
  std::uint16_t label = 0;

  friend bool operator==(const LabeledPixel&, const LabeledPixel&) = default;
};

/// Disjoint train/validation/test pixel lists. Within each list pixels are
/// grouped by class (ascending) and raster-ordered within a class.
struct SplitAssignment {
  std::vector<LabeledPixel> train;
  std::vector<LabeledPixel> validation;
  std::vector<LabeledPixel> test;
  std::size_t num_classes = 0;
  std::vector<std::string> warnings;

  SplitCounts counts_for(std::uint16_t label) const;

  friend bool operator==(const SplitAssignment&, const SplitAssignment&) = default;
};

/// Per-class random selection under `seed`; deterministic for a given seed.
/// Classes without labeled pixels are skipped and reported in `warnings`.
SplitAssignment stratified_split(const HsiCube& cube, const SplitFractions& fractions, std::uint64_t seed);

/// Text form: "# row col label subset" then one line per pixel.
std::string format_split(const SplitAssignment& split);
SplitAssignment parse_split(const std::string& text);

}  // namespace convcaps::hsi
