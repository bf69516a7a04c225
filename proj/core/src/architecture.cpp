#include "convcaps/caps/architecture.hpp"

#include <sstream>

#include "convcaps/errors.hpp"
#include "convcaps/numerics/ops.hpp"

namespace convcaps::caps {

using numerics::valid_output_length;

std::size_t Architecture::primary_positions() const {
  return valid_output_length(channels, primary_kernel, primary_stride);
}

std::size_t Architecture::window_positions() const {
  return valid_output_length(primary_positions(), window_size, window_stride);
}

void Architecture::validate() const {
  const std::uint32_t fields[] = {patch_size,   channels,    spatial_filters, primary_kernel, primary_stride,
                                  primary_arrays, primary_dim, window_size,     window_stride,  window_arrays,
                                  window_dim,   classes,     class_dim};
  for (auto v : fields) {
    if (v == 0) throw ShapeError("architecture fields must all be positive: " + describe());
  }
  if (patch_size % 2 == 0) throw ShapeError("patch size must be odd: " + describe());
  if (channels < primary_kernel) {
    throw ShapeError("C=" + std::to_string(channels) + " is shorter than the primary kernel f2=" +
                     std::to_string(primary_kernel));
  }
  if (primary_positions() < window_size) {
    throw ShapeError("c2=" + std::to_string(primary_positions()) + " is shorter than the window f3=" +
                     std::to_string(window_size));
  }
}

std::string Architecture::describe() const {
  std::ostringstream os;
  os << "D=" << patch_size << " C=" << channels << " K1=" << spatial_filters << " f2=" << primary_kernel
     << " s2=" << primary_stride << " a2=" << primary_arrays << " d2=" << primary_dim << " f3=" << window_size
     << " s3=" << window_stride << " K3=" << window_arrays << " d3=" << window_dim << " n=" << classes
     << " d4=" << class_dim;
  return os.str();
}

Architecture published_architecture(std::uint32_t channels, std::uint32_t classes) {
  Architecture a;
  a.channels = channels;
  a.classes = classes;
  return a;
}

LayerParamCounts layer_param_counts(const Architecture& arch) {
  arch.validate();
  const std::size_t d = arch.patch_size;
  const std::size_t k1 = arch.spatial_filters;
  const std::size_t k2 = arch.primary_maps();
  LayerParamCounts c;
  c.spatial = d * d * k1 + k1;
  c.primary = std::size_t{arch.primary_kernel} * k1 * k2 + k2;
  c.window = std::size_t{arch.window_arrays} *
             (std::size_t{arch.window_dim} * arch.window_size * arch.primary_arrays * arch.primary_dim +
              arch.window_dim);
  c.classcaps = arch.children() * arch.classes * arch.class_dim * arch.window_dim;
  return c;
}

std::size_t param_count(const Architecture& arch) { return layer_param_counts(arch).total(); }

}  // namespace convcaps::caps
