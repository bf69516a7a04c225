#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>

#include "convcaps/errors.hpp"
#include "convcaps/hsi/cube.hpp"
#include "convcaps/hsi/patch.hpp"
#include "convcaps/hsi/split.hpp"
#include "convcaps/hsi/whitening.hpp"
#include "oracles.hpp"
#include "split_tables.hpp"
#include "whitening_stats.hpp"

using namespace convcaps;
using hsi::HsiCube;
using wstats::brute_force_stats;
using wstats::correlated_cube;

namespace {

HsiCube random_cube(std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  auto values = oracle::random_vec(h * w * c, rng, -scale, scale);
  return HsiCube(h, w, c, std::move(values));
}

// Independent mirror rule: period 2(n-1), folded into [0, n).
std::size_t mirror(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * (static_cast<std::ptrdiff_t>(n) - 1);
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::ptrdiff_t>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

// One row of pixels, labels laid out class by class.
HsiCube label_strip(const std::vector<std::size_t>& totals) {
  std::size_t n = 0;
  for (auto t : totals) n += t;
  std::vector<std::uint16_t> labels;
  for (std::size_t k = 0; k < totals.size(); ++k) labels.insert(labels.end(), totals[k], static_cast<std::uint16_t>(k + 1));
  return HsiCube(1, n, 1, std::vector<double>(n, 0.0), labels);
}

}  // namespace

TEST_CASE("cube accessors") {
  HsiCube cube(2, 3, 4);
  CHECK(cube.pixel_count() == 6);
  CHECK_FALSE(cube.has_labels());
  CHECK(cube.num_classes() == 0);
  CHECK(cube.class_histogram() == std::vector<std::size_t>{6});
  cube.set_label(1, 2, 3);
  CHECK(cube.has_labels());
  CHECK(cube.num_classes() == 3);
  CHECK(cube.class_histogram() == std::vector<std::size_t>{5, 0, 0, 1});
  CHECK_THROWS_AS(HsiCube(0, 3, 4), ShapeError);
  CHECK_THROWS_AS(HsiCube(2, 2, 2, std::vector<double>(7)), ShapeError);
}

TEST_CASE("HSIC byte layout") {
  HsiCube cube(1, 1, 1, {1.0}, {3});
  const auto bytes = hsi::encode_cube(cube);
  const std::vector<std::uint8_t> expect = {'H', 'S', 'I', 'C', 1, 1, 0, 0, 0, 1, 0, 0, 0,
                                            1,   0,   0,   0,   1, 0, 0, 0x80, 0x3f, 3, 0};
  CHECK(bytes == expect);

  HsiCube unlabeled(1, 2, 1, {0.5, -2.0});
  const auto b2 = hsi::encode_cube(unlabeled);
  CHECK(b2.size() == 18 + 8);
  CHECK(b2[17] == 0);
}

TEST_CASE("HSIC round trip") {
  std::vector<double> values;
  for (int i = 0; i < 12; ++i) values.push_back(0.25 * i - 1.0);
  HsiCube cube(2, 2, 3, values, {0, 1, 2, 1});
  CHECK(hsi::decode_cube(hsi::encode_cube(cube)) == cube);

  const auto path = std::filesystem::temp_directory_path() / "convcaps_unit_roundtrip.hsic";
  hsi::save_cube(cube, path);
  CHECK(hsi::load_cube(path) == cube);
  std::filesystem::remove(path);

  HsiCube unlabeled(2, 2, 3, values);
  CHECK(hsi::decode_cube(hsi::encode_cube(unlabeled)) == unlabeled);
}

TEST_CASE("HSIC decode errors") {
  HsiCube cube(2, 2, 3, std::vector<double>(12, 1.0), {1, 1, 1, 1});
  const auto good = hsi::encode_cube(cube);

  SUBCASE("truncated payload") {
    std::vector<std::uint8_t> bad(good.begin(), good.end() - 12);
    try {
      (void)hsi::decode_cube(bad);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("truncated") != std::string::npos);
      CHECK(e.offset() >= 18);
    }
  }
  SUBCASE("bad magic") {
    auto bad = good;
    bad[0] = 'X';
    try {
      (void)hsi::decode_cube(bad);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("\"HSIC\"") != std::string::npos);
      CHECK(e.offset() == 0);
    }
  }
  SUBCASE("version") {
    auto bad = good;
    bad[4] = 2;
    CHECK_THROWS_AS((void)hsi::decode_cube(bad), FormatError);
  }
  SUBCASE("label flag") {
    auto bad = good;
    bad[17] = 7;
    CHECK_THROWS_AS((void)hsi::decode_cube(bad), FormatError);
  }
  SUBCASE("zero dimension") {
    auto bad = good;
    bad[5] = 0;
    CHECK_THROWS_AS((void)hsi::decode_cube(bad), FormatError);
  }
  SUBCASE("trailing bytes") {
    auto bad = good;
    bad.push_back(0);
    CHECK_THROWS_AS((void)hsi::decode_cube(bad), FormatError);
  }
  SUBCASE("empty") { CHECK_THROWS_AS((void)hsi::decode_cube({}), FormatError); }
  CHECK_THROWS((void)hsi::load_cube("/nonexistent/cube.hsic"));
}

TEST_CASE("whitening of a known diagonal covariance") {
  // Balanced +-2 / +-1 design: population covariance diag(4, 1).
  std::vector<double> values;
  for (double a : {-2.0, 2.0}) {
    for (double b : {-1.0, 1.0}) {
      values.push_back(a + 3.0);
      values.push_back(b - 1.0);
    }
  }
  const HsiCube cube(2, 2, 2, values);
  const auto t = hsi::fit_whitening(cube);
  REQUIRE(t.channels() == 2);
  CHECK(t.mean[0] == doctest::Approx(3.0));
  CHECK(t.mean[1] == doctest::Approx(-1.0));
  CHECK(t.eigenvalues[0] == doctest::Approx(4.0));
  CHECK(t.eigenvalues[1] == doctest::Approx(1.0));
  CHECK(t.inv_sqrt_eigs[0] == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(t.inv_sqrt_eigs[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("whitening of isotropic data is near identity scaling") {
  std::vector<double> values;
  for (double a : {-1.0, 1.0}) {
    for (double b : {-1.0, 1.0}) {
      for (double c : {-1.0, 1.0}) values.insert(values.end(), {a, b, c});
    }
  }
  const auto t = hsi::fit_whitening(HsiCube(2, 4, 3, values));
  for (double s : t.inv_sqrt_eigs) CHECK(s == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("whitening a constant cube stays finite") {
  const HsiCube cube(4, 4, 3, std::vector<double>(48, 2.5));
  const auto t = hsi::fit_whitening(cube, 1e-5);
  for (double s : t.inv_sqrt_eigs) {
    CHECK(std::isfinite(s));
    CHECK(s == doctest::Approx(1.0 / std::sqrt(1e-5)));
  }
  const auto y = hsi::apply_whitening(cube, t);
  for (double v : y.values()) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("whitened population has zero mean and identity covariance") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const auto cube = correlated_cube(10, 10, 4, seed, 30.0);
    const auto t = hsi::fit_whitening(cube);
    REQUIRE(t.eigenvalues.back() > 1e5 * t.epsilon);
    CHECK(std::is_sorted(t.eigenvalues.rbegin(), t.eigenvalues.rend()));
    const auto y = hsi::apply_whitening(cube, t);
    const auto s = brute_force_stats(y);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(std::abs(s.mean[i]) < 1e-9);
      for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(s.cov[i * 4 + j] - (i == j ? 1.0 : 0.0)) < 1e-6);
    }
  }
}

TEST_CASE("whitening inverse recovers the pixels") {
  const auto cube = correlated_cube(8, 9, 5, 9, 20.0);
  const auto t = hsi::fit_whitening(cube);
  const auto back = hsi::invert_whitening(hsi::apply_whitening(cube, t), t);
  CHECK(oracle::max_abs_diff({back.values().begin(), back.values().end()},
                             {cube.values().begin(), cube.values().end()}) < 1e-6);
}

TEST_CASE("whitening keeps labels and rejects bad input") {
  HsiCube cube = random_cube(3, 3, 2, 4);
  cube.set_label(1, 1, 2);
  const auto y = hsi::apply_whitening(cube, hsi::fit_whitening(cube));
  CHECK(y.label(1, 1) == 2);
  CHECK(std::vector<std::uint16_t>(y.labels().begin(), y.labels().end()) ==
        std::vector<std::uint16_t>(cube.labels().begin(), cube.labels().end()));

  CHECK_THROWS_AS(hsi::fit_whitening(random_cube(1, 2, 4, 1)), std::invalid_argument);
  CHECK_THROWS_AS(hsi::fit_whitening(cube, 0.0), std::invalid_argument);
  auto nan_cube = random_cube(3, 3, 2, 5);
  nan_cube.values()[4] = NAN;
  CHECK_THROWS_AS(hsi::fit_whitening(nan_cube), NumericalError);
  CHECK_THROWS_AS(hsi::apply_whitening(random_cube(3, 3, 3, 1), hsi::fit_whitening(cube)), ShapeError);
}

TEST_CASE("mirror index") {
  CHECK(hsi::reflect_index(-1, 5) == 1);
  CHECK(hsi::reflect_index(5, 5) == 3);
  CHECK(hsi::reflect_index(0, 1) == 0);
  CHECK(hsi::reflect_index(-4, 1) == 0);
  for (std::size_t n = 1; n < 9; ++n) {
    for (std::ptrdiff_t i = -30; i < 30; ++i) REQUIRE(hsi::reflect_index(i, n) == mirror(i, n));
  }
}

TEST_CASE("patch extraction") {
  const auto cube = random_cube(9, 11, 3, 12);

  SUBCASE("D = 1 is the pixel") {
    const auto p = hsi::extract_patch(cube, 4, 7, 1);
    CHECK(p.data.shape() == numerics::Shape{1, 1, 3});
    for (std::size_t c = 0; c < 3; ++c) CHECK(p.data[c] == cube.pixel(4, 7)[c]);
  }
  SUBCASE("interior patch is a direct slice") {
    const auto p = hsi::extract_patch(cube, 4, 5, 7);
    for (std::size_t a = 0; a < 7; ++a) {
      for (std::size_t b = 0; b < 7; ++b) {
        for (std::size_t c = 0; c < 3; ++c) REQUIRE(p.data.at({a, b, c}) == cube.pixel(1 + a, 2 + b)[c]);
      }
    }
    for (std::size_t c = 0; c < 3; ++c) CHECK(p.data.at({3, 3, c}) == cube.pixel(4, 5)[c]);
  }
  SUBCASE("border patches mirror") {
    for (std::size_t row : {0u, 1u, 8u}) {
      for (std::size_t col : {0u, 10u}) {
        const auto p = hsi::extract_patch(cube, row, col, 5);
        for (std::size_t a = 0; a < 5; ++a) {
          for (std::size_t b = 0; b < 5; ++b) {
            const auto r = mirror(static_cast<std::ptrdiff_t>(row + a) - 2, 9);
            const auto c = mirror(static_cast<std::ptrdiff_t>(col + b) - 2, 11);
            for (std::size_t ch = 0; ch < 3; ++ch) REQUIRE(p.data.at({a, b, ch}) == cube.pixel(r, c)[ch]);
          }
        }
      }
    }
    const auto corner = hsi::extract_patch(cube, 0, 0, 3);
    for (std::size_t ch = 0; ch < 3; ++ch) {
      CHECK(corner.data.at({0, 0, ch}) == cube.pixel(1, 1)[ch]);
      CHECK(corner.data.at({1, 1, ch}) == cube.pixel(0, 0)[ch]);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(hsi::extract_patch(cube, 1, 1, 4), ShapeError);
    CHECK_THROWS_AS(hsi::extract_patch(cube, 9, 0, 3), std::out_of_range);
  }
}

TEST_CASE("split counts follow the floor rule") {
  CHECK(hsi::split_counts(46, {}) == hsi::SplitCounts{9, 4, 33});
  CHECK(hsi::split_counts(20, {}) == hsi::SplitCounts{4, 2, 14});
  CHECK(hsi::split_counts(1, {}) == hsi::SplitCounts{0, 0, 1});
  CHECK(hsi::split_counts(0, {}) == hsi::SplitCounts{0, 0, 0});
  CHECK(hsi::split_counts(10, {0.3, 0.1}) == hsi::SplitCounts{3, 1, 6});
}

TEST_CASE("split counts reproduce the published tables") {
  for (const auto& table : tables::published_splits()) {
    std::size_t tr = 0, va = 0, te = 0;
    for (const auto& row : table.rows) {
      CAPTURE(row.name);
      const auto got = hsi::split_counts(row.total(), {0.2, 0.1});
      CHECK(got == hsi::SplitCounts{row.train, row.validation, row.test});
      tr += got.train;
      va += got.validation;
      te += got.test;
    }
    CAPTURE(table.scene);
    CHECK(tr == table.train_total);
    CHECK(va == table.validation_total);
    CHECK(te == table.test_total);
  }
}

TEST_CASE("stratified split on a labeled cube") {
  std::vector<std::size_t> totals;
  for (const auto& row : tables::published_splits()[0].rows) totals.push_back(row.total());
  const auto cube = label_strip(totals);
  const auto a = hsi::stratified_split(cube, {}, 42);

  SUBCASE("counts per class") {
    for (std::size_t k = 0; k < totals.size(); ++k) {
      const auto& row = tables::published_splits()[0].rows[k];
      CHECK(a.counts_for(static_cast<std::uint16_t>(k + 1)) == hsi::SplitCounts{row.train, row.validation, row.test});
    }
    CHECK(a.num_classes == 16);
    CHECK(a.warnings.empty());
  }
  SUBCASE("partition") {
    std::set<std::size_t> seen;
    for (const auto* part : {&a.train, &a.validation, &a.test}) {
      for (const auto& p : *part) {
        CHECK(p.label == cube.label(p.coord.row, p.coord.col));
        CHECK(seen.insert(p.coord.col).second);
      }
    }
    CHECK(seen.size() == cube.pixel_count());
  }
  SUBCASE("determinism") {
    CHECK(hsi::stratified_split(cube, {}, 42) == a);
    const auto b = hsi::stratified_split(cube, {}, 43);
    CHECK_FALSE(b.train == a.train);
    for (std::uint16_t k = 1; k <= 16; ++k) CHECK(b.counts_for(k) == a.counts_for(k));
  }
  SUBCASE("text round trip") {
    const auto b = hsi::parse_split(hsi::format_split(a));
    CHECK(b.train == a.train);
    CHECK(b.validation == a.validation);
    CHECK(b.test == a.test);
  }
}

TEST_CASE("split edge cases") {
  SUBCASE("absent class id is reported") {
    const auto cube = label_strip({5, 0, 7});
    const auto a = hsi::stratified_split(cube, {}, 1);
    CHECK(a.warnings.size() == 1);
    CHECK(a.counts_for(2) == hsi::SplitCounts{});
    CHECK(a.counts_for(3) == hsi::SplitCounts{1, 0, 6});
  }
  SUBCASE("bad fractions") {
    const auto cube = label_strip({5});
    CHECK_THROWS_AS(hsi::stratified_split(cube, {0.8, 0.3}, 1), ConfigError);
    CHECK_THROWS_AS(hsi::stratified_split(cube, {-0.1, 0.1}, 1), ConfigError);
  }
  SUBCASE("malformed split text") {
    CHECK_THROWS_AS(hsi::parse_split("1 2 3\n"), ConfigError);
    CHECK_THROWS_AS(hsi::parse_split("1 2 3 holdout\n"), ConfigError);
  }
}
