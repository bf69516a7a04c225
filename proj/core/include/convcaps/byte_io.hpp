#pragma once

// Little-endian encode/decode helpers shared by the binary containers.

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "convcaps/errors.hpp"

namespace convcaps::io {

class ByteWriter {
 public:
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void tag(const char (&magic)[5]) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(magic[i]));
  }

  std::vector<std::uint8_t> take() { return std::move(out_); }
  std::size_t size() const noexcept { return out_.size(); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8(const char* what) { return static_cast<std::uint8_t>(get(1, what)); }
  std::uint16_t u16(const char* what) { return static_cast<std::uint16_t>(get(2, what)); }
  std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(get(4, what)); }
  std::uint64_t u64(const char* what) { return get(8, what); }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

  void expect_tag(const char (&magic)[5]) {
    if (remaining() < 4) throw FormatError(std::string("truncated header, expected magic \"") + magic + "\"", pos_);
    for (int i = 0; i < 4; ++i) {
      if (in_[pos_ + i] != static_cast<std::uint8_t>(magic[i])) {
        throw FormatError(std::string("bad magic, expected \"") + magic + "\"", pos_);
      }
    }
    pos_ += 4;
  }

  void require(std::uint64_t n, const char* what) const {
    if (remaining() < n) {
      throw FormatError(std::string("truncated ") + what + ": need " + std::to_string(n) + " bytes, have " +
                            std::to_string(remaining()),
                        pos_);
    }
  }

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return in_.size() - pos_; }

 private:
  std::uint64_t get(int n, const char* what) {
    require(static_cast<std::uint64_t>(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace convcaps::io
