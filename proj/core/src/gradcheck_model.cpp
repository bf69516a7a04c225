#include "convcaps/training/model_gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "convcaps/caps/network.hpp"
#include "convcaps/numerics/ops.hpp"
#include "convcaps/random.hpp"

namespace convcaps::training {

caps::Architecture gradcheck_architecture() {
  caps::Architecture a;
  a.patch_size = 3;
  a.channels = 24;
  a.spatial_filters = 2;
  a.primary_kernel = 3;
  a.primary_stride = 2;
  a.primary_arrays = 2;
  a.primary_dim = 2;
  a.window_size = 3;
  a.window_stride = 2;
  a.window_arrays = 2;
  a.window_dim = 3;
  a.classes = 3;
  a.class_dim = 4;
  return a;
}

double ModelGradCheck::worst() const {
  double w = 0.0;
  for (const auto& g : groups) w = std::max(w, g.report.max_relative_error);
  return w;
}

namespace {

double mean_loss(const caps::Architecture& arch, const caps::ModelParams& params,
                 const std::vector<GradCheckSample>& samples, std::size_t routing_iters,
                 const metrics::MarginConfig& margin, caps::ModelParams* grad) {
  double total = 0.0;
  const double weight = 1.0 / static_cast<double>(samples.size());
  caps::ForwardCache cache;
  numerics::Tensor loss_grad;
  for (const auto& s : samples) {
    const auto act = caps::model_forward(s.patch, arch, params, routing_iters, grad ? &cache : nullptr);
    total += metrics::margin_loss(act, s.label, margin, grad ? &loss_grad : nullptr);
    if (grad) {
      for (double& g : loss_grad.values()) g *= weight;
      caps::model_backward(s.patch, arch, params, cache, loss_grad, *grad);
    }
  }
  return total * weight;
}

// Smallest |pre-activation| over both ReLU layers.
double relu_margin(const caps::Architecture& arch, const caps::ModelParams& params, const numerics::Tensor& patch) {
  double margin = std::numeric_limits<double>::infinity();
  const std::size_t pixels = std::size_t{arch.patch_size} * arch.patch_size;
  numerics::Tensor spatial({arch.channels, arch.spatial_filters});
  for (std::size_t c = 0; c < arch.channels; ++c) {
    for (std::size_t k = 0; k < arch.spatial_filters; ++k) {
      double pre = params.spatial.bias[k];
      for (std::size_t px = 0; px < pixels; ++px) pre += params.spatial.kernels[k * pixels + px] * patch[px * arch.channels + c];
      margin = std::min(margin, std::abs(pre));
      spatial[c * arch.spatial_filters + k] = std::max(0.0, pre);
    }
  }
  const auto maps = numerics::conv1d_valid(spatial, params.primary.kernels, params.primary.bias, arch.primary_stride);
  for (double v : maps.values()) margin = std::min(margin, std::abs(v));
  return margin;
}

}  // namespace

ModelGradCheck check_model_gradients(const caps::Architecture& arch, const caps::ModelParams& params,
                                     const std::vector<GradCheckSample>& samples, std::size_t routing_iters,
                                     const metrics::MarginConfig& margin, double epsilon,
                                     std::optional<std::size_t> corrupt_group) {
  caps::ModelParams analytic = caps::ModelParams::zeros(arch);
  mean_loss(arch, params, samples, routing_iters, margin, &analytic);
  if (corrupt_group) {
    numerics::Tensor& t = *analytic.tensors().at(*corrupt_group);
    for (double& g : t.values()) g = g * 1.5 + 1e-3;
  }

  ModelGradCheck out;
  for (std::size_t gi = 0; gi < caps::kParamTensorCount; ++gi) {
    caps::ModelParams probe = params;
    numerics::Tensor& target = *probe.tensors()[gi];
    const std::vector<double> point(target.values().begin(), target.values().end());
    auto f = [&](std::span<const double> x) {
      std::copy(x.begin(), x.end(), target.values().begin());
      return mean_loss(arch, probe, samples, routing_iters, margin, nullptr);
    };
    out.groups.push_back({std::string(caps::kParamTensorNames[gi]),
                          numerics::finite_difference_check(f, point, analytic.tensors()[gi]->values(), epsilon)});
  }
  return out;
}

ModelGradCheck run_gradcheck(std::uint64_t seed, double epsilon, std::optional<std::size_t> corrupt_group) {
  const caps::Architecture arch = gradcheck_architecture();
  caps::ModelParams params = caps::ModelParams::glorot_uniform(arch, seed);
  Rng rng(seed + 1);
  for (numerics::Tensor* t : {&params.spatial.bias, &params.primary.bias}) {
    for (double& v : t->values()) v = uniform(rng, -0.2, 0.2);
  }
  // Window biases of order one keep the squashed child capsules away from
  // zero; otherwise some class-layer gradients drop to ~1e-9, below what
  // central differences resolve.
  for (double& v : params.window.bias.values()) v = uniform(rng, -1.0, 1.0);

  // One sample per class. Patches with a ReLU input within kReluClearance of
  // the kink are redrawn: there the loss is not differentiable at the
  // finite-difference scale.
  constexpr double kReluClearance = 1e-3;
  std::vector<GradCheckSample> samples(arch.classes);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].label = i + 1;
    samples[i].patch = numerics::Tensor({arch.patch_size, arch.patch_size, arch.channels});
    do {
      for (double& v : samples[i].patch.values()) v = normal(rng);
    } while (relu_margin(arch, params, samples[i].patch) < kReluClearance);
  }
  return check_model_gradients(arch, params, samples, caps::kDefaultRoutingIterations, metrics::MarginConfig{},
                               epsilon, corrupt_group);
}

}  // namespace convcaps::training
