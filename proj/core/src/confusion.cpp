#include "convcaps/metrics/confusion.hpp"

#include <limits>
#include <stdexcept>

namespace convcaps::metrics {

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : n_(classes), counts_(classes * classes, 0) {}

void ConfusionMatrix::check(std::size_t id) const {
  if (id < 1 || id > n_) {
    throw std::out_of_range("class id " + std::to_string(id) + " outside [1, " + std::to_string(n_) + "]");
  }
}

std::uint64_t ConfusionMatrix::count(std::size_t truth, std::size_t predicted) const {
  check(truth);
  check(predicted);
  return counts_[(truth - 1) * n_ + (predicted - 1)];
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  check(truth);
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < n_; ++j) s += counts_[(truth - 1) * n_ + j];
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  check(predicted);
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < n_; ++i) s += counts_[i * n_ + (predicted - 1)];
  return s;
}

void ConfusionMatrix::accumulate(std::size_t truth, std::size_t predicted) {
  check(truth);
  check(predicted);
  ++counts_[(truth - 1) * n_ + (predicted - 1)];
  ++total_;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.n_ != n_) throw std::invalid_argument("cannot merge confusion matrices of different size");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("confusion matrix is empty");
  const std::size_t n = cm.classes();
  const double total = static_cast<double>(cm.total());

  Metrics m;
  m.per_class.assign(n, std::numeric_limits<double>::quiet_NaN());
  double trace = 0.0;
  double chance = 0.0;
  double recall_sum = 0.0;
  std::size_t supported = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double diag = static_cast<double>(cm.count(k, k));
    const double row = static_cast<double>(cm.row_sum(k));
    const double col = static_cast<double>(cm.col_sum(k));
    trace += diag;
    chance += row * col;
    if (row > 0) {
      m.per_class[k - 1] = diag / row;
      recall_sum += diag / row;
      ++supported;
    } else {
      m.warnings.push_back("class " + std::to_string(k) + " has no samples; excluded from AA");
    }
  }
  m.overall_accuracy = trace / total;
  m.average_accuracy = supported ? recall_sum / static_cast<double>(supported) : 0.0;
  const double pe = chance / (total * total);
  // pe == 1 only when every sample sits in one cell, which is perfect agreement.
  m.kappa = pe < 1.0 ? (m.overall_accuracy - pe) / (1.0 - pe) : 1.0;
  return m;
}

}  // namespace convcaps::metrics
