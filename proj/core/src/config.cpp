#include "convcaps/app/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "convcaps/errors.hpp"

namespace convcaps::app {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a real number, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::string real_text(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_names(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define CONVCAPS_INT_FIELD(expr, type)                                                            \
  Field {                                                                                         \
    [](RunConfig& c, const std::string& k, const std::string& v) { expr = parse_int<type>(k, v); }, \
        [](const RunConfig& c) { return std::to_string(expr); }                                    \
  }
#define CONVCAPS_REAL_FIELD(expr)                                                            \
  Field {                                                                                    \
    [](RunConfig& c, const std::string& k, const std::string& v) { expr = parse_real(k, v); }, \
        [](const RunConfig& c) { return real_text(expr); }                                    \
  }
#define CONVCAPS_BOOL_FIELD(expr)                                                            \
  Field {                                                                                    \
    [](RunConfig& c, const std::string& k, const std::string& v) { expr = parse_bool(k, v); }, \
        [](const RunConfig& c) { return std::string(expr ? "true" : "false"); }               \
  }
#define CONVCAPS_TEXT_FIELD(expr)                                                            \
  Field {                                                                                    \
    [](RunConfig& c, const std::string&, const std::string& v) { expr = v; },                \
        [](const RunConfig& c) { return expr; }                                               \
  }

// Serialization order is the order of this table.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"dataset", CONVCAPS_TEXT_FIELD(c.dataset)},
      {"output_dir", CONVCAPS_TEXT_FIELD(c.output_dir)},
      {"palette", CONVCAPS_TEXT_FIELD(c.palette)},
      {"class_names",
       Field{[](RunConfig& c, const std::string&, const std::string& v) { c.class_names = split_names(v); },
             [](const RunConfig& c) {
               std::string out;
               for (std::size_t i = 0; i < c.class_names.size(); ++i) out += (i ? "," : "") + c.class_names[i];
               return out;
             }}},
      {"whiten", CONVCAPS_BOOL_FIELD(c.whiten)},
      {"whiten_epsilon", CONVCAPS_REAL_FIELD(c.whiten_epsilon)},
      {"train_fraction", CONVCAPS_REAL_FIELD(c.split.train)},
      {"val_fraction", CONVCAPS_REAL_FIELD(c.split.validation)},
      {"patch_size", CONVCAPS_INT_FIELD(c.arch.patch_size, std::uint32_t)},
      {"spatial_filters", CONVCAPS_INT_FIELD(c.arch.spatial_filters, std::uint32_t)},
      {"primary_kernel", CONVCAPS_INT_FIELD(c.arch.primary_kernel, std::uint32_t)},
      {"primary_stride", CONVCAPS_INT_FIELD(c.arch.primary_stride, std::uint32_t)},
      {"primary_arrays", CONVCAPS_INT_FIELD(c.arch.primary_arrays, std::uint32_t)},
      {"primary_dim", CONVCAPS_INT_FIELD(c.arch.primary_dim, std::uint32_t)},
      {"window_size", CONVCAPS_INT_FIELD(c.arch.window_size, std::uint32_t)},
      {"window_stride", CONVCAPS_INT_FIELD(c.arch.window_stride, std::uint32_t)},
      {"window_arrays", CONVCAPS_INT_FIELD(c.arch.window_arrays, std::uint32_t)},
      {"window_dim", CONVCAPS_INT_FIELD(c.arch.window_dim, std::uint32_t)},
      {"class_dim", CONVCAPS_INT_FIELD(c.arch.class_dim, std::uint32_t)},
      {"epochs", CONVCAPS_INT_FIELD(c.train.epochs, std::size_t)},
      {"batch_size", CONVCAPS_INT_FIELD(c.train.batch_size, std::size_t)},
      {"routing_iters", CONVCAPS_INT_FIELD(c.train.routing_iters, std::size_t)},
      {"learning_rate", CONVCAPS_REAL_FIELD(c.train.adam.learning_rate)},
      {"adam_beta1", CONVCAPS_REAL_FIELD(c.train.adam.beta1)},
      {"adam_beta2", CONVCAPS_REAL_FIELD(c.train.adam.beta2)},
      {"adam_eps", CONVCAPS_REAL_FIELD(c.train.adam.epsilon)},
      {"r_plus", CONVCAPS_REAL_FIELD(c.train.margin.r_plus)},
      {"r_minus", CONVCAPS_REAL_FIELD(c.train.margin.r_minus)},
      {"lambda", CONVCAPS_REAL_FIELD(c.train.margin.lambda)},
      {"seed", CONVCAPS_INT_FIELD(c.train.seed, std::uint64_t)},
      {"deterministic_reduction", CONVCAPS_BOOL_FIELD(c.train.deterministic_reduction)},
      {"threads", CONVCAPS_INT_FIELD(c.train.threads, std::size_t)},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  if (dataset.empty()) throw ConfigError("dataset path is required");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  if (!(whiten_epsilon > 0.0)) throw ConfigError("whiten_epsilon must be positive");
  if (!(split.train > 0.0) || !(split.validation > 0.0) || !(split.train + split.validation < 1.0)) {
    throw ConfigError("train_fraction and val_fraction must be positive and sum below 1");
  }
  if (arch.patch_size % 2 == 0) throw ConfigError("patch_size must be odd");
  train.validate();
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    bool known = false;
    for (const auto& [name, field] : fields()) {
      if (name == key) {
        field.set(cfg, key, value);
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_run_config(ss.str());
  const auto base = std::filesystem::path(path).parent_path();
  for (std::string* p : {&cfg.dataset, &cfg.palette}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) {
      *p = std::filesystem::absolute(base / *p).lexically_normal().string();
    }
  }
  return cfg;
}

std::string serialize_run_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [name, field] : fields()) out += name + " = " + field.get(cfg) + "\n";
  return out;
}

}  // namespace convcaps::app
