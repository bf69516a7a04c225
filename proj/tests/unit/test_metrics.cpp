#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "convcaps/caps/network.hpp"
#include "convcaps/errors.hpp"
#include "convcaps/metrics/confusion.hpp"
#include "convcaps/metrics/margin_loss.hpp"
#include "convcaps/numerics/gradcheck.hpp"
#include "oracles.hpp"

using namespace convcaps;
using metrics::ConfusionMatrix;
using numerics::Tensor;

namespace {

// Class k gets capsule (len, 0, ...) rotated into a random direction.
Tensor capsules_with_lengths(const std::vector<double>& lengths, std::size_t dim, std::mt19937_64& rng) {
  Tensor t({lengths.size(), dim});
  for (std::size_t k = 0; k < lengths.size(); ++k) {
    auto dir = oracle::random_vec(dim, rng);
    const double n = oracle::length(dir);
    for (std::size_t e = 0; e < dim; ++e) t.at({k, e}) = lengths[k] * dir[e] / n;
  }
  return t;
}

ConfusionMatrix from_rows(const std::vector<std::vector<std::uint64_t>>& rows) {
  ConfusionMatrix cm(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.size(); ++j) {
      for (std::uint64_t c = 0; c < rows[i][j]; ++c) cm.accumulate(i + 1, j + 1);
    }
  }
  return cm;
}

}  // namespace

TEST_CASE("margin loss examples") {
  std::mt19937_64 rng(1);
  const metrics::MarginConfig cfg;
  CHECK(metrics::margin_loss(capsules_with_lengths({0.1, 0.9, 0.1}, 4, rng), 2, cfg) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(metrics::margin_loss(Tensor({5, 4}), 3, cfg) == doctest::Approx(0.81).epsilon(1e-15));
  CHECK_THROWS_AS(metrics::margin_loss(Tensor({5, 4}), 0, cfg), std::out_of_range);
  CHECK_THROWS_AS(metrics::margin_loss(Tensor({5, 4}), 6, cfg), std::out_of_range);
}

TEST_CASE("margin loss matches the formula and its gradient") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> len(0.0, 0.99);
  const metrics::MarginConfig cfg;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> lengths(4);
    for (double& l : lengths) l = len(rng);
    const std::size_t truth = 1 + rng() % 4;
    const auto act = capsules_with_lengths(lengths, 3, rng);
    Tensor grad;
    const double loss = metrics::margin_loss(act, truth, cfg, &grad);
    CHECK(loss == doctest::Approx(oracle::margin_loss(lengths, truth, 0.9, 0.1, 0.5)).epsilon(1e-12));
    CHECK(loss >= 0.0);
    const auto r = numerics::finite_difference_check(
        [&](std::span<const double> v) {
          return metrics::margin_loss(Tensor(act.shape(), {v.begin(), v.end()}), truth, cfg);
        },
        act.values(), grad.values(), 1e-7);
    CHECK(r.max_relative_error < 1e-6);
  }
}

TEST_CASE("margin loss depends on lengths only") {
  std::mt19937_64 rng(3);
  const metrics::MarginConfig cfg;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> lengths{0.3, 0.95, 0.05, 0.6};
    const auto a = capsules_with_lengths(lengths, 5, rng);
    const auto b = capsules_with_lengths(lengths, 5, rng);
    CHECK(std::abs(metrics::margin_loss(a, 2, cfg) - metrics::margin_loss(b, 2, cfg)) < 1e-12);
  }
}

TEST_CASE("margin loss is zero exactly inside both margins") {
  std::mt19937_64 rng(4);
  const metrics::MarginConfig cfg;
  CHECK(metrics::margin_loss(capsules_with_lengths({0.05, 0.95}, 3, rng), 2, cfg) == 0.0);
  CHECK(metrics::margin_loss(capsules_with_lengths({0.11, 0.95}, 3, rng), 2, cfg) > 0.0);
  CHECK(metrics::margin_loss(capsules_with_lengths({0.05, 0.89}, 3, rng), 2, cfg) > 0.0);
}

TEST_CASE("margin config validation") {
  metrics::MarginConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.r_minus = 0.95;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.lambda = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("confusion accumulation") {
  ConfusionMatrix cm(3);
  cm.accumulate(1, 1);
  CHECK(cm.count(1, 1) == 1);
  CHECK(cm.total() == 1);
  CHECK_THROWS_AS(cm.accumulate(0, 1), std::out_of_range);
  CHECK_THROWS_AS(cm.accumulate(1, 4), std::out_of_range);

  std::mt19937_64 rng(5);
  std::vector<std::pair<std::size_t, std::size_t>> events;
  for (int i = 0; i < 200; ++i) events.emplace_back(1 + rng() % 3, 1 + rng() % 3);
  ConfusionMatrix a(3), b(3), left(3), right(3);
  for (const auto& [t, p] : events) a.accumulate(t, p);
  std::shuffle(events.begin(), events.end(), rng);
  for (std::size_t i = 0; i < events.size(); ++i) {
    b.accumulate(events[i].first, events[i].second);
    (i % 2 ? left : right).accumulate(events[i].first, events[i].second);
  }
  CHECK(a == b);
  CHECK(a.total() == 200);
  left.merge(right);
  CHECK(left == a);
  CHECK_THROWS_AS(left.merge(ConfusionMatrix(2)), std::invalid_argument);
}

TEST_CASE("metrics examples") {
  SUBCASE("diagonal") {
    const auto m = metrics::compute_metrics(from_rows({{5, 0, 0}, {0, 7, 0}, {0, 0, 2}}));
    CHECK(m.overall_accuracy == 1.0);
    CHECK(m.average_accuracy == 1.0);
    CHECK(m.kappa == 1.0);
  }
  SUBCASE("one-sided predictions") {
    const auto m = metrics::compute_metrics(from_rows({{50, 0}, {50, 0}}));
    CHECK(m.overall_accuracy == 0.5);
    CHECK(m.average_accuracy == 0.5);
    CHECK(m.kappa == doctest::Approx(0.0));
  }
  SUBCASE("chance agreement") {
    const auto m = metrics::compute_metrics(from_rows({{25, 25}, {25, 25}}));
    CHECK(m.overall_accuracy == 0.5);
    CHECK(m.kappa == doctest::Approx(0.0));
  }
  SUBCASE("hand-computed kappa") {
    // p_o = 0.7, p_e = (0.5*0.6 + 0.5*0.4) = 0.5 -> kappa 0.4
    const auto m = metrics::compute_metrics(from_rows({{40, 10}, {20, 30}}));
    CHECK(m.overall_accuracy == doctest::Approx(0.7));
    CHECK(m.average_accuracy == doctest::Approx(0.7));
    CHECK(m.kappa == doctest::Approx(0.4));
    CHECK(m.per_class[0] == doctest::Approx(0.8));
    CHECK(m.per_class[1] == doctest::Approx(0.6));
  }
  SUBCASE("class without support") {
    const auto m = metrics::compute_metrics(from_rows({{3, 1, 0}, {0, 0, 0}, {1, 0, 4}}));
    CHECK(std::isnan(m.per_class[1]));
    CHECK(m.warnings.size() == 1);
    CHECK(m.average_accuracy == doctest::Approx((0.75 + 0.8) / 2.0));
  }
  CHECK_THROWS_AS(metrics::compute_metrics(ConfusionMatrix(3)), std::invalid_argument);
}

TEST_CASE("metric properties on random matrices") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 6;
    std::vector<std::vector<std::uint64_t>> rows(n, std::vector<std::uint64_t>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) rows[i][j] = (i == j ? 5 : 0) + rng() % 4;
      rows[i][(i + 1) % n] += 1;  // never diagonal
    }
    const auto m = metrics::compute_metrics(from_rows(rows));
    CHECK(m.kappa < 1.0);
    CHECK(m.kappa <= m.overall_accuracy);

    auto scaled = rows;
    for (auto& r : scaled) {
      for (auto& c : r) c *= 3;
    }
    const auto ms = metrics::compute_metrics(from_rows(scaled));
    CHECK(ms.overall_accuracy == doctest::Approx(m.overall_accuracy).epsilon(1e-14));
    CHECK(ms.average_accuracy == doctest::Approx(m.average_accuracy).epsilon(1e-14));
    CHECK(ms.kappa == doctest::Approx(m.kappa).epsilon(1e-12));
  }
}

TEST_CASE("prediction is the longest capsule") {
  std::mt19937_64 rng(7);
  const auto act = capsules_with_lengths({0.2, 0.7, 0.5, 0.69}, 3, rng);
  CHECK(caps::predict_class(act) == 2);
}
