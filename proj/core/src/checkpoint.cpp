#include "convcaps/caps/checkpoint.hpp"

#include "convcaps/byte_io.hpp"
#include "convcaps/caps/network.hpp"
#include "convcaps/errors.hpp"

namespace convcaps::caps {

namespace {

std::array<std::uint32_t*, 13> arch_fields(Architecture& a) {
  return {&a.patch_size,     &a.channels,    &a.spatial_filters, &a.primary_kernel, &a.primary_stride,
          &a.primary_arrays, &a.primary_dim, &a.window_size,     &a.window_stride,  &a.window_arrays,
          &a.window_dim,     &a.classes,     &a.class_dim};
}

double payload_estimate(const Architecture& a) {
  const double k1 = a.spatial_filters, d = a.patch_size, k2 = static_cast<double>(a.primary_maps());
  const double k3 = a.window_arrays, d3 = a.window_dim;
  const double count = k1 * d * d + k1 + k2 * k1 * a.primary_kernel + k2 +
                       k3 * d3 * a.window_size * a.primary_arrays * a.primary_dim + k3 * d3 +
                       k3 * static_cast<double>(a.window_positions()) * a.classes * a.class_dim * d3;
  return 4.0 * count;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  check_params(ckpt.arch, ckpt.params);
  io::ByteWriter w;
  w.tag("CCKP");
  w.u8(kCheckpointVersion);
  Architecture arch = ckpt.arch;
  for (auto* field : arch_fields(arch)) w.u32(*field);
  for (const Tensor* t : ckpt.params.tensors()) {
    for (double v : t->values()) w.f32(static_cast<float>(v));
  }
  w.u64(ckpt.step);
  w.u64(ckpt.seed);
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  r.expect_tag("CCKP");
  const auto version_at = r.position();
  if (const auto version = r.u8("version"); version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), version_at);
  }
  Checkpoint ckpt;
  for (auto* field : arch_fields(ckpt.arch)) *field = r.u32("architecture");
  const auto arch_end = r.position();
  try {
    ckpt.arch.validate();
  } catch (const ShapeError& e) {
    throw FormatError(std::string("invalid architecture block: ") + e.what(), arch_end);
  }
  // Checked in floating point first: a corrupt header can imply a count
  // that overflows or would exhaust memory.
  if (payload_estimate(ckpt.arch) > static_cast<double>(r.remaining())) {
    throw FormatError("truncated parameter payload", r.position());
  }
  ckpt.params = ModelParams::zeros(ckpt.arch);
  r.require(static_cast<std::uint64_t>(ckpt.params.count()) * 4, "parameter payload");
  for (Tensor* t : ckpt.params.tensors()) {
    for (double& v : t->values()) v = r.f32("parameter");
  }
  ckpt.step = r.u64("step counter");
  ckpt.seed = r.u64("seed");
  if (r.remaining() != 0) throw FormatError("trailing bytes after checkpoint", r.position());
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  io::write_file(path.string(), encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path.string()));
}

}  // namespace convcaps::caps
