#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "convcaps/caps/architecture.hpp"
#include "convcaps/caps/params.hpp"

namespace convcaps::caps {

inline constexpr std::uint8_t kCheckpointVersion = 1;

/// "CCKP" | u8 version | 13 x u32 architecture fields (D, C, K1, f2, s2, a2,
/// d2, f3, s3, K3, d3, n, d4) | parameter tensors as f32 in declaration order |
/// u64 step | u64 seed.  Little-endian throughout.
struct Checkpoint {
  Architecture arch;
  ModelParams params;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace convcaps::caps
