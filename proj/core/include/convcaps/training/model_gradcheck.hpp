#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "convcaps/caps/architecture.hpp"
#include "convcaps/caps/params.hpp"
#include "convcaps/metrics/margin_loss.hpp"
#include "convcaps/numerics/gradcheck.hpp"

namespace convcaps::training {

inline constexpr double kGradCheckTolerance = 1e-4;

/// Small network used for gradient checks: C=24, D=3, n=3.
caps::Architecture gradcheck_architecture();

struct GradCheckSample {
  numerics::Tensor patch;
  std::size_t label = 1;
};

struct GroupCheck {
  std::string name;
  numerics::GradCheckReport report;
};

struct ModelGradCheck {
  std::vector<GroupCheck> groups;

  double worst() const;
  bool passed(double tolerance = kGradCheckTolerance) const { return worst() < tolerance; }
};

/// Central-difference check of the mean margin loss over `samples`, one
/// report per parameter tensor. `corrupt_group` perturbs that tensor's
/// analytic gradient first, to exercise the detector.
ModelGradCheck check_model_gradients(const caps::Architecture& arch, const caps::ModelParams& params,
                                     const std::vector<GradCheckSample>& samples, std::size_t routing_iters,
                                     const metrics::MarginConfig& margin, double epsilon,
                                     std::optional<std::size_t> corrupt_group = std::nullopt);

/// Random miniature instance (weights, patches, labels) drawn from `seed`.
ModelGradCheck run_gradcheck(std::uint64_t seed, double epsilon = 1e-5,
                             std::optional<std::size_t> corrupt_group = std::nullopt);

}  // namespace convcaps::training
