#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "convcaps/app/config.hpp"
#include "convcaps/caps/architecture.hpp"
#include "convcaps/hsi/cube.hpp"
#include "convcaps/hsi/split.hpp"
#include "convcaps/metrics/confusion.hpp"
#include "convcaps/training/trainer.hpp"

namespace convcaps::app {

/// Whitening fitted on the cube itself (all pixels), or a copy when disabled.
hsi::HsiCube preprocess(const hsi::HsiCube& raw, bool whiten, double epsilon);

struct PreparedData {
  hsi::HsiCube cube;  // preprocessed
  hsi::SplitAssignment split;
  caps::Architecture arch;  // channels and classes filled from the cube
};

PreparedData prepare_data(const RunConfig& cfg);

/// `output_dir` unless the CONVCAPS_OUTPUT_DIR environment variable is set.
std::filesystem::path resolve_output_dir(const RunConfig& cfg);

std::string class_name(const std::vector<std::string>& names, std::size_t id);
std::string format_metrics_table(const metrics::ConfusionMatrix& cm, const metrics::Metrics& m,
                                 const std::vector<std::string>& names);
/// key=value lines: per-class name and accuracy, then OA, AA (percent) and kappa x 100.
std::string format_metrics_kv(const metrics::ConfusionMatrix& cm, const metrics::Metrics& m,
                              const std::vector<std::string>& names);

struct TrainOutcome {
  std::filesystem::path output_dir;
  training::TrainRecord record;
  metrics::ConfusionMatrix confusion;
  metrics::Metrics test_metrics;
};

/// Artifact file names written by run_training.
inline constexpr const char* kCheckpointFile = "checkpoint.cckp";
inline constexpr const char* kTrainLogFile = "train_log.csv";
inline constexpr const char* kMetricsTableFile = "metrics.txt";
inline constexpr const char* kMetricsKvFile = "metrics.kv";
inline constexpr const char* kSplitFile = "split.txt";
inline constexpr const char* kRunConfigFile = "run.cfg";

/// whitening -> split -> train -> evaluate the best snapshot on the test set,
/// writing every artifact into the output directory. Errors are rethrown with
/// the failing stage named. The test metrics are computed with the
/// float32-rounded parameters that the checkpoint stores.
TrainOutcome run_training(const RunConfig& cfg, std::ostream& progress);

}  // namespace convcaps::app
