#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace convcaps::metrics {

/// n x n counts, rows = true class, columns = predicted class. Class ids are
/// 1-based at the interface.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = 0);

  std::size_t classes() const noexcept { return n_; }
  std::uint64_t count(std::size_t truth, std::size_t predicted) const;
  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t predicted) const;

  void accumulate(std::size_t truth, std::size_t predicted);
  /// Element-wise sum of a per-worker partial.
  void merge(const ConfusionMatrix& other);

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  void check(std::size_t id) const;

  std::size_t n_ = 0;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> counts_;
};

struct Metrics {
  double overall_accuracy = 0.0;
  double average_accuracy = 0.0;
  double kappa = 0.0;
  std::vector<double> per_class;   // NaN for classes without support
  std::vector<std::string> warnings;
};

/// OA, AA and Cohen's kappa. Classes with no true samples are left out of AA
/// and reported in `warnings`. Throws if the matrix is empty.
Metrics compute_metrics(const ConfusionMatrix& cm);

}  // namespace convcaps::metrics
