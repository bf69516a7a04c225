#include "convcaps/hsi/split.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "convcaps/errors.hpp"
#include "convcaps/random.hpp"

namespace convcaps::hsi {

namespace {

// Guards against products like 0.1 * 30 landing a hair below an integer.
constexpr double kFloorSlack = 1e-9;

std::size_t floor_count(std::size_t m, double fraction) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(m) * fraction + kFloorSlack));
}

void check_fractions(const SplitFractions& f) {
  if (!(f.train > 0.0) || !(f.validation > 0.0) || !(f.train + f.validation < 1.0)) {
    throw ConfigError("split fractions must be positive with train + validation < 1");
  }
}

}  // namespace

SplitCounts split_counts(std::size_t class_total, const SplitFractions& fractions) {
  check_fractions(fractions);
  SplitCounts c;
  c.train = floor_count(class_total, fractions.train);
  c.validation = floor_count(class_total, fractions.validation);
  c.test = class_total - c.train - c.validation;
  return c;
}

SplitCounts SplitAssignment::counts_for(std::uint16_t label) const {
  auto count = [label](const std::vector<LabeledPixel>& v) {
    return static_cast<std::size_t>(
        std::count_if(v.begin(), v.end(), [label](const LabeledPixel& p) { return p.label == label; }));
  };
  return {count(train), count(validation), count(test)};
}

SplitAssignment stratified_split(const HsiCube& cube, const SplitFractions& fractions, std::uint64_t seed) {
  check_fractions(fractions);
  SplitAssignment out;
  out.num_classes = cube.num_classes();

  std::vector<std::vector<PixelCoord>> by_class(out.num_classes + 1);
  for (std::size_t r = 0; r < cube.height(); ++r) {
    for (std::size_t c = 0; c < cube.width(); ++c) {
      if (auto id = cube.label(r, c); id != 0) by_class[id].push_back({r, c});
    }
  }

  Rng rng(seed);
  for (std::size_t id = 1; id <= out.num_classes; ++id) {
    auto& pixels = by_class[id];
    if (pixels.empty()) {
      out.warnings.push_back("class " + std::to_string(id) + " has no labeled pixels; skipped");
      continue;
    }
    const SplitCounts counts = split_counts(pixels.size(), fractions);
    shuffle(pixels, rng);
    auto emit = [&](std::vector<LabeledPixel>& dst, std::size_t begin, std::size_t end) {
      std::vector<PixelCoord> chunk(pixels.begin() + begin, pixels.begin() + end);
      std::sort(chunk.begin(), chunk.end());
      for (const auto& p : chunk) dst.push_back({p, static_cast<std::uint16_t>(id)});
    };
    emit(out.train, 0, counts.train);
    emit(out.validation, counts.train, counts.train + counts.validation);
    emit(out.test, counts.train + counts.validation, pixels.size());
  }
  return out;
}

std::string format_split(const SplitAssignment& split) {
  std::ostringstream os;
  os << "# row col label subset\n";
  auto dump = [&os](const std::vector<LabeledPixel>& v, const char* name) {
    for (const auto& p : v) os << p.coord.row << ' ' << p.coord.col << ' ' << p.label << ' ' << name << '\n';
  };
  dump(split.train, "train");
  dump(split.validation, "val");
  dump(split.test, "test");
  return os.str();
}

SplitAssignment parse_split(const std::string& text) {
  SplitAssignment out;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    LabeledPixel p;
    unsigned label = 0;
    std::string subset;
    if (!(ls >> p.coord.row >> p.coord.col >> label >> subset) || label == 0 || label > 0xFFFF) {
      throw ConfigError("split file line " + std::to_string(line_no) + ": expected 'row col label subset'");
    }
    p.label = static_cast<std::uint16_t>(label);
    out.num_classes = std::max<std::size_t>(out.num_classes, label);
    if (subset == "train") {
      out.train.push_back(p);
    } else if (subset == "val") {
      out.validation.push_back(p);
    } else if (subset == "test") {
      out.test.push_back(p);
    } else {
      throw ConfigError("split file line " + std::to_string(line_no) + ": unknown subset '" + subset + "'");
    }
  }
  return out;
}

}  // namespace convcaps::hsi
