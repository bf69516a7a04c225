#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "convcaps/caps/architecture.hpp"
#include "convcaps/hsi/split.hpp"
#include "convcaps/training/trainer.hpp"

namespace convcaps::app {

/// Environment variable that overrides `output_dir`.
inline constexpr const char* kOutputDirEnv = "CONVCAPS_OUTPUT_DIR";

/// Everything one training run needs. Parsed from a key=value file, one key
/// per line, '#' starts a comment.
struct RunConfig {
  std::string dataset;
  std::string output_dir = "convcaps-run";
  std::string palette;                   // optional "id r g b" file
  std::vector<std::string> class_names;  // optional, comma separated

  bool whiten = true;
  double whiten_epsilon = 1e-5;
  hsi::SplitFractions split;

  // Dataset-dependent fields (channels, classes) are filled from the cube.
  caps::Architecture arch;
  training::TrainConfig train;

  /// Field-level checks that need no file system access.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig parse_run_config(const std::string& text);
/// Relative dataset and palette paths are taken relative to the config file
/// and made absolute, so a serialized copy loads from anywhere.
RunConfig load_run_config(const std::string& path);
std::string serialize_run_config(const RunConfig& cfg);

}  // namespace convcaps::app
