#include "convcaps/app/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "convcaps/caps/checkpoint.hpp"
#include "convcaps/errors.hpp"
#include "convcaps/hsi/whitening.hpp"

namespace convcaps::app {

namespace {

// Runs `fn`, prefixing any error message with the pipeline stage while
// keeping the exception type (callers map types to exit codes).
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  const std::string prefix = std::string("stage '") + name + "': ";
  try {
    return fn();
  } catch (const FormatError& e) {
    throw FormatError(prefix + e.what(), e.offset());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const ShapeError& e) {
    throw ShapeError(prefix + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(prefix + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(prefix + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

hsi::HsiCube preprocess(const hsi::HsiCube& raw, bool whiten, double epsilon) {
  if (!whiten) return raw;
  return hsi::apply_whitening(raw, hsi::fit_whitening(raw, epsilon));
}

PreparedData prepare_data(const RunConfig& cfg) {
  PreparedData data;
  const auto raw = stage("load", [&] { return hsi::load_cube(cfg.dataset); });
  if (raw.num_classes() == 0) throw ConfigError("stage 'load': cube has no labeled pixels");
  data.cube = stage("whitening", [&] { return preprocess(raw, cfg.whiten, cfg.whiten_epsilon); });
  data.split = stage("split", [&] { return hsi::stratified_split(data.cube, cfg.split, cfg.train.seed); });
  data.arch = cfg.arch;
  data.arch.channels = static_cast<std::uint32_t>(data.cube.channels());
  data.arch.classes = static_cast<std::uint32_t>(data.cube.num_classes());
  stage("architecture", [&] { data.arch.validate(); });
  return data;
}

std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return cfg.output_dir;
}

std::string class_name(const std::vector<std::string>& names, std::size_t id) {
  if (id >= 1 && id <= names.size() && !names[id - 1].empty()) return names[id - 1];
  return "class_" + std::to_string(id);
}

std::string format_metrics_table(const metrics::ConfusionMatrix& cm, const metrics::Metrics& m,
                                 const std::vector<std::string>& names) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%5s  %-24s %8s %12s\n", "Class", "Name", "Samples", "Accuracy(%)");
  os << line;
  for (std::size_t k = 1; k <= cm.classes(); ++k) {
    std::snprintf(line, sizeof line, "%5zu  %-24s %8llu %12s\n", k, class_name(names, k).c_str(),
                  static_cast<unsigned long long>(cm.row_sum(k)), fixed(100.0 * m.per_class[k - 1], 2).c_str());
    os << line;
  }
  os << "OA (%)       " << fixed(100.0 * m.overall_accuracy, 2) << "\n";
  os << "AA (%)       " << fixed(100.0 * m.average_accuracy, 2) << "\n";
  os << "kappa x100   " << fixed(100.0 * m.kappa, 2) << "\n";
  for (const auto& w : m.warnings) os << "warning: " << w << "\n";
  return os.str();
}

std::string format_metrics_kv(const metrics::ConfusionMatrix& cm, const metrics::Metrics& m,
                              const std::vector<std::string>& names) {
  std::ostringstream os;
  for (std::size_t k = 1; k <= cm.classes(); ++k) {
    os << "class." << k << ".name=" << class_name(names, k) << "\n";
    os << "class." << k << ".accuracy_percent=" << fixed(100.0 * m.per_class[k - 1], 6) << "\n";
  }
  os << "OA_percent=" << fixed(100.0 * m.overall_accuracy, 6) << "\n";
  os << "AA_percent=" << fixed(100.0 * m.average_accuracy, 6) << "\n";
  os << "kappa_x100=" << fixed(100.0 * m.kappa, 6) << "\n";
  return os.str();
}

TrainOutcome run_training(const RunConfig& cfg, std::ostream& progress) {
  stage("config", [&] { cfg.validate(); });
  TrainOutcome outcome;
  outcome.output_dir = resolve_output_dir(cfg);
  if (!std::filesystem::exists(cfg.dataset)) throw ConfigError("stage 'config': dataset not found: " + cfg.dataset);
  if (!cfg.palette.empty() && !std::filesystem::exists(cfg.palette)) {
    throw ConfigError("stage 'config': palette not found: " + cfg.palette);
  }

  PreparedData data = prepare_data(cfg);
  for (const auto& w : data.split.warnings) progress << "warning: " << w << "\n";
  progress << "architecture: " << data.arch.describe() << " (" << caps::param_count(data.arch) << " parameters)\n";
  progress << "split: " << data.split.train.size() << " train, " << data.split.validation.size() << " validation, "
           << data.split.test.size() << " test\n";

  const training::PatchSource train_set{&data.cube, data.arch.patch_size, data.split.train};
  const training::PatchSource val_set{&data.cube, data.arch.patch_size, data.split.validation};
  const training::PatchSource test_set{&data.cube, data.arch.patch_size, data.split.test};

  auto result = stage("train", [&] {
    return training::train(data.arch, caps::ModelParams::glorot_uniform(data.arch, cfg.train.seed), train_set, val_set,
                           cfg.train, [&progress](const training::EpochRecord& e) {
                             progress << "epoch " << e.epoch << ": loss " << e.mean_loss << ", validation OA "
                                      << fixed(100.0 * e.validation_oa, 2) << "%\n";
                           });
  });
  outcome.record = result.record;
  progress << "best validation OA " << fixed(100.0 * result.record.best_validation_oa, 2) << "% at epoch "
           << result.record.best_epoch << "\n";

  caps::ModelParams stored = result.best;
  stored.round_to_float();
  outcome.confusion = stage("evaluate", [&] {
    if (test_set.pixels.empty()) throw ConfigError("test set is empty");
    return training::evaluate(data.arch, stored, test_set, cfg.train.routing_iters, cfg.train.threads);
  });
  outcome.test_metrics = metrics::compute_metrics(outcome.confusion);

  stage("write", [&] {
    std::filesystem::create_directories(outcome.output_dir);
    caps::save_checkpoint({data.arch, result.best, result.steps, cfg.train.seed}, outcome.output_dir / kCheckpointFile);
    write_text(outcome.output_dir / kTrainLogFile, training::format_train_log(result.record));
    write_text(outcome.output_dir / kMetricsTableFile,
               format_metrics_table(outcome.confusion, outcome.test_metrics, cfg.class_names));
    write_text(outcome.output_dir / kMetricsKvFile,
               format_metrics_kv(outcome.confusion, outcome.test_metrics, cfg.class_names));
    write_text(outcome.output_dir / kSplitFile, hsi::format_split(data.split));
    write_text(outcome.output_dir / kRunConfigFile, serialize_run_config(cfg));
  });
  progress << "test OA " << fixed(100.0 * outcome.test_metrics.overall_accuracy, 2) << "%, kappa x100 "
           << fixed(100.0 * outcome.test_metrics.kappa, 2) << "\n";
  return outcome;
}

}  // namespace convcaps::app
