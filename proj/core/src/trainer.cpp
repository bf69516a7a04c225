#include "convcaps/training/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <sstream>

#include "convcaps/caps/network.hpp"
#include "convcaps/errors.hpp"
#include "convcaps/hsi/patch.hpp"
#include "convcaps/random.hpp"
#include "convcaps/training/parallel.hpp"

namespace convcaps::training {

namespace {

constexpr std::size_t kReductionChunk = 8;

struct Workspace {
  numerics::Tensor patch;
  caps::ForwardCache cache;
  numerics::Tensor loss_grad;
};

// Loss of one sample; adds `weight` * dL/dparams to `grad` when non-null.
double sample_loss(const caps::Architecture& arch, const caps::ModelParams& params, const hsi::HsiCube& cube,
                   std::size_t patch_size, const hsi::LabeledPixel& px, std::size_t routing_iters,
                   const metrics::MarginConfig& margin, caps::ModelParams* grad, double weight, Workspace& ws) {
  hsi::extract_patch_into(cube, px.coord.row, px.coord.col, patch_size, ws.patch);
  const auto activations = caps::model_forward(ws.patch, arch, params, routing_iters, grad ? &ws.cache : nullptr);
  const double loss = metrics::margin_loss(activations, px.label, margin, grad ? &ws.loss_grad : nullptr);
  if (grad) {
    for (double& g : ws.loss_grad.values()) g *= weight;
    caps::model_backward(ws.patch, arch, params, ws.cache, ws.loss_grad, *grad);
  }
  return loss;
}

void check_source(const PatchSource& s, const caps::Architecture& arch) {
  if (!s.cube) throw std::invalid_argument("patch source has no cube");
  if (s.patch_size != arch.patch_size) throw ShapeError("patch size does not match architecture");
  if (s.cube->channels() != arch.channels) {
    throw ShapeError("cube has " + std::to_string(s.cube->channels()) + " channels, architecture expects " +
                     std::to_string(arch.channels));
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (routing_iters < 1) throw ConfigError("routing_iters must be >= 1");
  adam.validate();
  margin.validate();
}

std::string format_train_log(const TrainRecord& record) {
  std::ostringstream os;
  os << "epoch,loss,val_OA\n";
  char line[96];
  for (const auto& e : record.epochs) {
    std::snprintf(line, sizeof line, "%zu,%.9g,%.6f\n", e.epoch, e.mean_loss, e.validation_oa);
    os << line;
  }
  return os.str();
}

double batch_loss(const caps::Architecture& arch, const caps::ModelParams& params, const PatchSource& samples,
                  std::size_t routing_iters, const metrics::MarginConfig& margin, caps::ModelParams* grad,
                  std::size_t threads, bool deterministic) {
  check_source(samples, arch);
  const std::size_t count = samples.pixels.size();
  if (count == 0) throw std::invalid_argument("empty batch");
  const double weight = 1.0 / static_cast<double>(count);

  if (deterministic) {
    // Fixed chunks summed in order: independent of the worker count.
    const std::size_t chunks = (count + kReductionChunk - 1) / kReductionChunk;
    std::vector<double> losses(count, 0.0);
    std::vector<std::optional<caps::ModelParams>> partial(chunks);
    parallel_for(chunks, threads, [&](std::size_t c, std::size_t) {
      Workspace ws;
      if (grad) partial[c] = caps::ModelParams::zeros(arch);
      caps::ModelParams* target = grad ? &*partial[c] : nullptr;
      const std::size_t end = std::min(count, (c + 1) * kReductionChunk);
      for (std::size_t i = c * kReductionChunk; i < end; ++i) {
        losses[i] = sample_loss(arch, params, *samples.cube, samples.patch_size, samples.pixels[i], routing_iters,
                                margin, target, weight, ws);
      }
    });
    if (grad) {
      for (const auto& p : partial) grad->add_scaled(*p, 1.0);
    }
    return std::accumulate(losses.begin(), losses.end(), 0.0) * weight;
  }

  const std::size_t workers = std::min(resolve_threads(threads), count);
  std::vector<std::optional<caps::ModelParams>> partial(workers);
  std::vector<double> losses(workers, 0.0);
  std::vector<Workspace> spaces(workers);
  parallel_for(count, workers, [&](std::size_t i, std::size_t w) {
    if (grad && !partial[w]) partial[w] = caps::ModelParams::zeros(arch);
    losses[w] += sample_loss(arch, params, *samples.cube, samples.patch_size, samples.pixels[i], routing_iters,
                             margin, grad ? &*partial[w] : nullptr, weight, spaces[w]);
  });
  if (grad) {
    for (const auto& p : partial) {
      if (p) grad->add_scaled(*p, 1.0);
    }
  }
  return std::accumulate(losses.begin(), losses.end(), 0.0) * weight;
}

std::vector<std::size_t> predict(const caps::Architecture& arch, const caps::ModelParams& params,
                                 const PatchSource& samples, std::size_t routing_iters, std::size_t threads) {
  check_source(samples, arch);
  std::vector<std::size_t> out(samples.pixels.size());
  const std::size_t workers = resolve_threads(threads);
  std::vector<numerics::Tensor> patches(workers);
  parallel_for(samples.pixels.size(), workers, [&](std::size_t i, std::size_t w) {
    const auto& px = samples.pixels[i];
    hsi::extract_patch_into(*samples.cube, px.coord.row, px.coord.col, samples.patch_size, patches[w]);
    out[i] = caps::predict_class(caps::model_forward(patches[w], arch, params, routing_iters));
  });
  return out;
}

metrics::ConfusionMatrix evaluate(const caps::Architecture& arch, const caps::ModelParams& params,
                                  const PatchSource& samples, std::size_t routing_iters, std::size_t threads) {
  if (samples.pixels.empty()) throw std::invalid_argument("evaluation set is empty");
  const auto predicted = predict(arch, params, samples, routing_iters, threads);
  metrics::ConfusionMatrix cm(arch.classes);
  for (std::size_t i = 0; i < predicted.size(); ++i) cm.accumulate(samples.pixels[i].label, predicted[i]);
  return cm;
}

TrainResult train(const caps::Architecture& arch, caps::ModelParams init, const PatchSource& train_set,
                  const PatchSource& validation_set, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  check_source(train_set, arch);
  check_source(validation_set, arch);
  caps::check_params(arch, init);
  if (train_set.pixels.empty() || validation_set.pixels.empty()) {
    throw ConfigError("training and validation sets must be non-empty");
  }

  TrainResult result;
  caps::ModelParams params = std::move(init);
  AdamState adam = AdamState::for_params(params);
  caps::ModelParams grad = caps::ModelParams::zeros(arch);
  // Separate stream from weight initialisation, which is seeded with cfg.seed too.
  Rng rng(cfg.seed ^ 0x9E3779B97F4A7C15ull);

  std::vector<hsi::LabeledPixel> order(train_set.pixels.begin(), train_set.pixels.end());
  std::vector<hsi::LabeledPixel> batch;
  bool have_best = false;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(order, rng);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.assign(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
      grad.set_zero();
      PatchSource src{train_set.cube, train_set.patch_size, batch};
      double loss = 0.0;
      try {
        loss = batch_loss(arch, params, src, cfg.routing_iters, cfg.margin, &grad, cfg.threads,
                          cfg.deterministic_reduction);
        if (!std::isfinite(loss)) throw NumericalError("non-finite loss");
        adam_step(params, grad, adam, cfg.adam);
      } catch (const NumericalError& e) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_index) + ": " + e.what());
      }
      loss_sum += loss * static_cast<double>(end - start);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = loss_sum / static_cast<double>(order.size());
    const auto cm = evaluate(arch, params, validation_set, cfg.routing_iters, cfg.threads);
    rec.validation_oa = metrics::compute_metrics(cm).overall_accuracy;
    result.record.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (!have_best || rec.validation_oa > result.record.best_validation_oa) {
      have_best = true;
      result.record.best_validation_oa = rec.validation_oa;
      result.record.best_epoch = epoch;
      result.best = params;
    }
  }
  result.steps = adam.step;
  return result;
}

}  // namespace convcaps::training
