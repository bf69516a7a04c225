#include "commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "convcaps/app/classification_map.hpp"
#include "convcaps/app/config.hpp"
#include "convcaps/app/pipeline.hpp"
#include "convcaps/app/synthetic.hpp"
#include "convcaps/byte_io.hpp"
#include "convcaps/caps/checkpoint.hpp"
#include "convcaps/caps/network.hpp"
#include "convcaps/errors.hpp"
#include "convcaps/hsi/whitening.hpp"
#include "convcaps/metrics/confusion.hpp"
#include "convcaps/training/model_gradcheck.hpp"
#include "convcaps/training/trainer.hpp"

namespace convcaps::cli {

namespace {

std::string read_text(const std::string& path) {
  const auto bytes = io::read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_text(const std::string& path, const std::string& text) {
  io::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

struct InfoArgs {
  std::string cube;
};

struct WhitenArgs {
  std::string input;
  std::string output;
  double epsilon = hsi::kDefaultWhiteningEpsilon;
};

struct SplitArgs {
  std::string cube;
  std::string output;
  double train = 0.2;
  double validation = 0.1;
  std::uint64_t seed = 0;
};

struct TrainArgs {
  std::string config;
};

// Shared by eval and render-map: how to turn a raw cube into model input.
struct ModelInputArgs {
  std::string checkpoint;
  std::string cube;
  bool raw = false;
  double epsilon = hsi::kDefaultWhiteningEpsilon;
  std::size_t routing_iters = caps::kDefaultRoutingIterations;
  std::size_t threads = 0;
};

struct EvalArgs {
  ModelInputArgs input;
  std::string split_file;
  std::string subset = "test";
  double train = 0.2;
  double validation = 0.1;
  std::uint64_t seed = 0;
  std::string metrics_out;
};

struct ParamCountArgs {
  std::uint32_t channels = 0;
  std::uint32_t classes = 0;
  bool breakdown = false;
};

struct GradcheckArgs {
  std::uint64_t seed = 0;
  std::size_t seeds = 1;
  double epsilon = 1e-5;
  int corrupt_group = -1;
};

struct RenderArgs {
  ModelInputArgs input;
  std::string output;
  std::string palette;
  bool mask = false;
};

struct SynthArgs {
  std::string output;
  std::string config;
  app::ToyCubeSpec spec;
};

int cmd_info(const InfoArgs& a, std::ostream& out) {
  const auto cube = hsi::load_cube(a.cube);
  out << cube.height() << " x " << cube.width() << " x " << cube.channels() << ", " << cube.num_classes()
      << " classes\n";
  out << "class  pixels\n";
  const auto hist = cube.class_histogram();
  for (std::size_t id = 0; id < hist.size(); ++id) {
    if (id == 0 || hist[id] != 0) {
      char line[64];
      std::snprintf(line, sizeof line, "%5zu  %zu\n", id, hist[id]);
      out << line;
    }
  }
  return kExitOk;
}

int cmd_whiten(const WhitenArgs& a, std::ostream& out) {
  const auto cube = hsi::load_cube(a.input);
  const auto t = hsi::fit_whitening(cube, a.epsilon);
  hsi::save_cube(hsi::apply_whitening(cube, t), a.output);
  out << "whitened " << cube.pixel_count() << " pixels, " << cube.channels() << " components; eigenvalues "
      << t.eigenvalues.back() << " .. " << t.eigenvalues.front() << "\n";
  return kExitOk;
}

int cmd_split(const SplitArgs& a, std::ostream& out) {
  const auto cube = hsi::load_cube(a.cube);
  const auto split = hsi::stratified_split(cube, {a.train, a.validation}, a.seed);
  for (const auto& w : split.warnings) out << "warning: " << w << "\n";
  out << "class  train    val   test\n";
  for (std::size_t k = 1; k <= split.num_classes; ++k) {
    const auto c = split.counts_for(static_cast<std::uint16_t>(k));
    char line[64];
    std::snprintf(line, sizeof line, "%5zu %6zu %6zu %6zu\n", k, c.train, c.validation, c.test);
    out << line;
  }
  out << "total " << split.train.size() << " " << split.validation.size() << " " << split.test.size() << "\n";
  if (!a.output.empty()) write_text(a.output, hsi::format_split(split));
  return kExitOk;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const auto cfg = app::load_run_config(a.config);
  const auto outcome = app::run_training(cfg, out);
  out << app::format_metrics_table(outcome.confusion, outcome.test_metrics, cfg.class_names);
  out << "artifacts written to " << outcome.output_dir.string() << "\n";
  return kExitOk;
}

struct ModelInput {
  caps::Checkpoint checkpoint;
  hsi::HsiCube cube;
};

ModelInput load_model_input(const ModelInputArgs& a) {
  ModelInput in{caps::load_checkpoint(a.checkpoint), hsi::load_cube(a.cube)};
  if (in.checkpoint.arch.channels != in.cube.channels()) {
    throw ShapeError("checkpoint expects " + std::to_string(in.checkpoint.arch.channels) + " channels, cube has " +
                     std::to_string(in.cube.channels()));
  }
  if (in.cube.num_classes() > in.checkpoint.arch.classes) {
    throw ShapeError("cube has class id " + std::to_string(in.cube.num_classes()) + " but the checkpoint knows " +
                     std::to_string(in.checkpoint.arch.classes) + " classes");
  }
  if (!a.raw) in.cube = app::preprocess(in.cube, true, a.epsilon);
  return in;
}

std::vector<hsi::LabeledPixel> select_subset(const hsi::SplitAssignment& split, const std::string& subset) {
  if (subset == "train") return split.train;
  if (subset == "val") return split.validation;
  if (subset == "test") return split.test;
  std::vector<hsi::LabeledPixel> all = split.train;
  all.insert(all.end(), split.validation.begin(), split.validation.end());
  all.insert(all.end(), split.test.begin(), split.test.end());
  return all;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto in = load_model_input(a.input);
  const auto split = a.split_file.empty() ? hsi::stratified_split(in.cube, {a.train, a.validation}, a.seed)
                                          : hsi::parse_split(read_text(a.split_file));
  const auto pixels = select_subset(split, a.subset);
  if (pixels.empty()) throw ConfigError("subset '" + a.subset + "' is empty");
  const training::PatchSource source{&in.cube, in.checkpoint.arch.patch_size, pixels};
  const auto cm = training::evaluate(in.checkpoint.arch, in.checkpoint.params, source, a.input.routing_iters,
                                     a.input.threads);
  const auto m = metrics::compute_metrics(cm);
  out << "evaluated " << pixels.size() << " pixels (" << a.subset << ")\n";
  out << app::format_metrics_table(cm, m, {});
  if (!a.metrics_out.empty()) write_text(a.metrics_out, app::format_metrics_kv(cm, m, {}));
  return kExitOk;
}

int cmd_param_count(const ParamCountArgs& a, std::ostream& out) {
  const auto arch = caps::published_architecture(a.channels, a.classes);
  arch.validate();
  const auto counts = caps::layer_param_counts(arch);
  out << counts.total() << "\n";
  if (a.breakdown) {
    out << "spatial   " << counts.spatial << "\n";
    out << "primary   " << counts.primary << "\n";
    out << "window    " << counts.window << "\n";
    out << "classcaps " << counts.classcaps << "\n";
  }
  return kExitOk;
}

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  std::optional<std::size_t> corrupt;
  if (a.corrupt_group >= 0) corrupt = static_cast<std::size_t>(a.corrupt_group);
  out << "architecture: " << training::gradcheck_architecture().describe() << "\n";
  bool ok = true;
  for (std::size_t i = 0; i < a.seeds; ++i) {
    const std::uint64_t seed = a.seed + i;
    const auto report = training::run_gradcheck(seed, a.epsilon, corrupt);
    out << "seed " << seed << "\n";
    for (const auto& g : report.groups) {
      char line[128];
      std::snprintf(line, sizeof line, "  %-18s %10zu coords  max rel error %.3e\n", g.name.c_str(),
                    g.report.coordinates, g.report.max_relative_error);
      out << line;
    }
    const bool passed = report.passed();
    out << "  " << (passed ? "PASS" : "FAIL") << " (tolerance " << training::kGradCheckTolerance << ")\n";
    ok = ok && passed;
  }
  return ok ? kExitOk : kExitNumerical;
}

int cmd_render_map(const RenderArgs& a, std::ostream& out) {
  const auto in = load_model_input(a.input);
  const auto palette = a.palette.empty() ? app::default_palette() : app::parse_palette(read_text(a.palette));
  for (std::uint32_t k = 1; k <= in.checkpoint.arch.classes; ++k) {
    if (!palette.has(static_cast<std::uint16_t>(k))) {
      throw ConfigError("palette has no entry for class " + std::to_string(k));
    }
  }
  const auto map = app::classify_cube(in.cube, in.checkpoint.arch, in.checkpoint.params, a.input.routing_iters,
                                      a.mask, a.input.threads);
  io::write_file(a.output, app::encode_ppm(map, palette));
  out << "wrote " << map.width << "x" << map.height << " map to " << a.output << "\n";
  return kExitOk;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const auto cube = app::make_toy_cube(a.spec);
  hsi::save_cube(cube, a.output);
  out << "wrote " << cube.height() << " x " << cube.width() << " x " << cube.channels() << " cube with "
      << cube.num_classes() << " classes to " << a.output << "\n";
  if (!a.config.empty()) {
    // The config refers to the cube relative to its own directory.
    namespace fs = std::filesystem;
    const auto config_dir = fs::absolute(a.config).parent_path();
    write_text(a.config, app::serialize_run_config(
        app::toy_run_config(fs::proximate(fs::absolute(a.output), config_dir).string(), a.spec)));
    out << "wrote training config to " << a.config << "\n";
  }
  return kExitOk;
}

void add_model_input(CLI::App* cmd, ModelInputArgs& a) {
  cmd->add_option("checkpoint", a.checkpoint, "Checkpoint file (.cckp)")->required()->check(CLI::ExistingFile);
  cmd->add_option("cube", a.cube, "Raw HSIC cube")->required()->check(CLI::ExistingFile);
  cmd->add_flag("--raw", a.raw, "Use the cube as-is instead of whitening it");
  cmd->add_option("--whiten-epsilon", a.epsilon, "Whitening regularizer")->capture_default_str();
  cmd->add_option("--routing-iters", a.routing_iters, "Dynamic routing iterations")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", a.threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"1-D convolutional capsule network for hyperspectral pixel classification", "convcaps"};
  app.require_subcommand(1);
  app.footer(std::string("Environment: ") + app::kOutputDirEnv + " overrides the output directory of 'train'.\n"
             "Exit codes: 0 success, 1 invalid input, 2 numerical failure.");

  InfoArgs info;
  auto* info_cmd = app.add_subcommand("info", "Print cube dimensions and class histogram");
  info_cmd->add_option("cube", info.cube, "HSIC cube")->required();

  WhitenArgs whiten;
  auto* whiten_cmd = app.add_subcommand("whiten", "PCA-whiten a cube (fitted on all its pixels)");
  whiten_cmd->add_option("input", whiten.input, "Input HSIC cube")->required()->check(CLI::ExistingFile);
  whiten_cmd->add_option("output", whiten.output, "Output HSIC cube")->required();
  whiten_cmd->add_option("--epsilon", whiten.epsilon, "Eigenvalue regularizer")->capture_default_str();

  SplitArgs split;
  auto* split_cmd = app.add_subcommand("split", "Stratified train/validation/test split");
  split_cmd->add_option("cube", split.cube, "HSIC cube with labels")->required()->check(CLI::ExistingFile);
  split_cmd->add_option("-o,--output", split.output, "Write the split file here");
  split_cmd->add_option("--train", split.train, "Training fraction per class")->capture_default_str();
  split_cmd->add_option("--val", split.validation, "Validation fraction per class")->capture_default_str();
  split_cmd->add_option("--seed", split.seed, "Shuffle seed")->capture_default_str();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Whiten, split, train and evaluate from a config file");
  train_cmd->add_option("config", train.config, "key=value run config")->required()->check(CLI::ExistingFile);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on part of a labeled cube");
  add_model_input(eval_cmd, eval.input);
  eval_cmd->add_option("--split-file", eval.split_file, "Split file written by 'train' or 'split'")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--subset", eval.subset, "Pixels to evaluate")
      ->capture_default_str()
      ->check(CLI::IsMember({"train", "val", "test", "all"}));
  eval_cmd->add_option("--train", eval.train, "Training fraction when re-deriving the split")->capture_default_str();
  eval_cmd->add_option("--val", eval.validation, "Validation fraction when re-deriving the split")
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval.seed, "Split seed when re-deriving the split")->capture_default_str();
  eval_cmd->add_option("--metrics-out", eval.metrics_out, "Also write key=value metrics here");

  ParamCountArgs pc;
  auto* pc_cmd = app.add_subcommand("param-count", "Trainable parameters of the published architecture");
  pc_cmd->add_option("channels", pc.channels, "Spectral channels C")->required()->check(CLI::PositiveNumber);
  pc_cmd->add_option("classes", pc.classes, "Classes n")->required()->check(CLI::PositiveNumber);
  pc_cmd->add_flag("--breakdown", pc.breakdown, "Also print per-layer counts");

  GradcheckArgs gc;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference check of all gradients on a small network");
  gc_cmd->add_option("--seed", gc.seed, "First seed")->capture_default_str();
  gc_cmd->add_option("--seeds", gc.seeds, "Number of consecutive seeds")->capture_default_str()->check(
      CLI::PositiveNumber);
  gc_cmd->add_option("--epsilon", gc.epsilon, "Central-difference step")->capture_default_str();
  gc_cmd->add_option("--corrupt-group", gc.corrupt_group)->group("");

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render-map", "Classify every pixel and write a PPM image");
  add_model_input(render_cmd, render.input);
  render_cmd->add_option("output", render.output, "Output .ppm path")->required();
  render_cmd->add_option("--palette", render.palette, "File of 'id r g b' lines")->check(CLI::ExistingFile);
  render_cmd->add_flag("--mask", render.mask, "Render unlabeled pixels black instead of classifying them");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic toy cube (and optionally a config for it)");
  synth_cmd->add_option("output", synth.output, "Output HSIC cube")->required();
  synth_cmd->add_option("--config", synth.config, "Also write a training config for the cube");
  synth_cmd->add_option("--height", synth.spec.height)->capture_default_str();
  synth_cmd->add_option("--width", synth.spec.width)->capture_default_str();
  synth_cmd->add_option("--channels", synth.spec.channels)->capture_default_str();
  synth_cmd->add_option("--classes", synth.spec.classes)->capture_default_str();
  synth_cmd->add_option("--noise", synth.spec.noise)->capture_default_str();
  synth_cmd->add_option("--seed", synth.spec.seed)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*info_cmd) return cmd_info(info, out);
    if (*whiten_cmd) return cmd_whiten(whiten, out);
    if (*split_cmd) return cmd_split(split, out);
    if (*train_cmd) return cmd_train(train, out);
    if (*eval_cmd) return cmd_eval(eval, out);
    if (*pc_cmd) return cmd_param_count(pc, out);
    if (*gc_cmd) return cmd_gradcheck(gc, out);
    if (*render_cmd) return cmd_render_map(render, out);
    if (*synth_cmd) return cmd_synth(synth, out);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace convcaps::cli
