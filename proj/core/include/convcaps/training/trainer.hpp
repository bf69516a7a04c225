#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "convcaps/caps/architecture.hpp"
#include "convcaps/caps/params.hpp"
#include "convcaps/hsi/cube.hpp"
#include "convcaps/hsi/split.hpp"
#include "convcaps/metrics/confusion.hpp"
#include "convcaps/metrics/margin_loss.hpp"
#include "convcaps/training/adam.hpp"

namespace convcaps::training {

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  std::size_t routing_iters = 3;
  AdamConfig adam;
  metrics::MarginConfig margin;
  std::uint64_t seed = 0;
  // Fixed-order gradient reduction, bit-identical regardless of thread count.
  bool deterministic_reduction = true;
  std::size_t threads = 0;  // 0 = hardware concurrency

  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double validation_oa = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainRecord {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_validation_oa = 0.0;

  friend bool operator==(const TrainRecord&, const TrainRecord&) = default;
};

/// "epoch,loss,val_OA" followed by one line per epoch.
std::string format_train_log(const TrainRecord& record);

/// Labeled pixels of one cube, turned into patches on demand.
struct PatchSource {
  const hsi::HsiCube* cube = nullptr;
  std::size_t patch_size = 0;
  std::span<const hsi::LabeledPixel> pixels;
};

struct TrainResult {
  caps::ModelParams best;
  TrainRecord record;
  std::uint64_t steps = 0;
};

/// Mean margin loss over `samples`; adds the mean gradient to `grad` when non-null.
double batch_loss(const caps::Architecture& arch, const caps::ModelParams& params, const PatchSource& samples,
                  std::size_t routing_iters, const metrics::MarginConfig& margin, caps::ModelParams* grad,
                  std::size_t threads = 1, bool deterministic = true);

/// Mini-batch Adam training from `init`. After each epoch the validation OA
/// is measured and the best snapshot (earliest on ties) is returned.
using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train(const caps::Architecture& arch, caps::ModelParams init, const PatchSource& train_set,
                  const PatchSource& validation_set, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// 1-based predicted class per pixel.
std::vector<std::size_t> predict(const caps::Architecture& arch, const caps::ModelParams& params,
                                 const PatchSource& samples, std::size_t routing_iters, std::size_t threads = 0);

metrics::ConfusionMatrix evaluate(const caps::Architecture& arch, const caps::ModelParams& params,
                                  const PatchSource& samples, std::size_t routing_iters, std::size_t threads = 0);

}  // namespace convcaps::training
