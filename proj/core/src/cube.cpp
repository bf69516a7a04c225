#include "convcaps/hsi/cube.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "convcaps/errors.hpp"
#include "convcaps/byte_io.hpp"

namespace convcaps::io {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace convcaps::io

namespace convcaps::hsi {

HsiCube::HsiCube(std::size_t height, std::size_t width, std::size_t channels)
    : HsiCube(height, width, channels, std::vector<double>(height * width * channels, 0.0)) {}

HsiCube::HsiCube(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> values,
                 std::vector<std::uint16_t> labels)
    : height_(height), width_(width), channels_(channels), has_labels_(!labels.empty()),
      values_(std::move(values)), labels_(std::move(labels)) {
  if (height == 0 || width == 0 || channels == 0) throw ShapeError("cube dimensions must be positive");
  if (values_.size() != height * width * channels) throw ShapeError("cube value count does not match H*W*C");
  if (labels_.empty()) {
    labels_.assign(height * width, 0);
  } else if (labels_.size() != height * width) {
    throw ShapeError("label map size does not match H*W");
  }
}

std::span<const double> HsiCube::pixel(std::size_t row, std::size_t col) const {
  return std::span<const double>(values_).subspan((row * width_ + col) * channels_, channels_);
}

std::span<double> HsiCube::pixel(std::size_t row, std::size_t col) {
  return std::span<double>(values_).subspan((row * width_ + col) * channels_, channels_);
}

void HsiCube::set_label(std::size_t row, std::size_t col, std::uint16_t id) {
  labels_.at(row * width_ + col) = id;
  has_labels_ = true;
}

std::size_t HsiCube::num_classes() const {
  if (labels_.empty()) return 0;
  return *std::max_element(labels_.begin(), labels_.end());
}

std::vector<std::size_t> HsiCube::class_histogram() const {
  std::vector<std::size_t> hist(num_classes() + 1, 0);
  for (auto id : labels_) ++hist[id];
  return hist;
}

std::vector<std::uint8_t> encode_cube(const HsiCube& cube) {
  io::ByteWriter w;
  w.tag("HSIC");
  w.u8(kCubeFormatVersion);
  w.u32(static_cast<std::uint32_t>(cube.height()));
  w.u32(static_cast<std::uint32_t>(cube.width()));
  w.u32(static_cast<std::uint32_t>(cube.channels()));
  w.u8(cube.has_labels() ? 1 : 0);
  for (double v : cube.values()) w.f32(static_cast<float>(v));
  if (cube.has_labels()) {
    for (auto id : cube.labels()) w.u16(id);
  }
  return w.take();
}

HsiCube decode_cube(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  r.expect_tag("HSIC");
  const auto version_at = r.position();
  const auto version = r.u8("version");
  if (version != kCubeFormatVersion) {
    throw FormatError("unsupported HSIC version " + std::to_string(version), version_at);
  }
  const std::uint64_t h = r.u32("height");
  const std::uint64_t w = r.u32("width");
  const std::uint64_t c = r.u32("channels");
  if (h == 0 || w == 0 || c == 0) throw FormatError("zero cube dimension", r.position());
  const auto flag_at = r.position();
  const auto flag = r.u8("label flag");
  if (flag > 1) throw FormatError("label flag must be 0 or 1", flag_at);

  // h*w*c*4 can wrap in 64 bits for hostile headers; compare in floating point first.
  if (static_cast<double>(h) * static_cast<double>(w) * static_cast<double>(c) * 4.0 >
      static_cast<double>(r.remaining())) {
    throw FormatError("truncated value payload", r.position());
  }
  const std::uint64_t value_bytes = h * w * c * 4;
  const std::uint64_t label_bytes = flag ? h * w * 2 : 0;
  r.require(value_bytes, "value payload");
  std::vector<double> values(static_cast<std::size_t>(h * w * c));
  for (auto& v : values) v = r.f32("value");
  std::vector<std::uint16_t> labels;
  if (flag) {
    r.require(label_bytes, "label payload");
    labels.resize(static_cast<std::size_t>(h * w));
    for (auto& id : labels) id = r.u16("label");
  }
  if (r.remaining() != 0) {
    throw FormatError("payload size mismatch: " + std::to_string(r.remaining()) + " trailing bytes", r.position());
  }
  HsiCube cube(h, w, c, std::move(values), std::move(labels));
  return cube;
}

void save_cube(const HsiCube& cube, const std::filesystem::path& path) {
  io::write_file(path.string(), encode_cube(cube));
}

HsiCube load_cube(const std::filesystem::path& path) { return decode_cube(io::read_file(path.string())); }

}  // namespace convcaps::hsi
