#include <doctest.h>

#include <cmath>
#include <random>

#include "convcaps/errors.hpp"
#include "convcaps/numerics/gradcheck.hpp"
#include "convcaps/numerics/ops.hpp"
#include "convcaps/numerics/tensor.hpp"
#include "oracles.hpp"

using namespace convcaps;
using numerics::Tensor;

namespace {

Tensor random_tensor(numerics::Shape shape, std::mt19937_64& rng) {
  const auto n = numerics::shape_size(shape);
  return Tensor(std::move(shape), oracle::random_vec(n, rng));
}

}  // namespace

TEST_CASE("tensor shape bookkeeping") {
  Tensor t({2, 3, 4});
  CHECK(t.size() == 24);
  CHECK(t.rank() == 3);
  t.at({1, 2, 3}) = 5.0;
  CHECK(t[23] == 5.0);
  CHECK_THROWS_AS(t.at({2, 0, 0}), std::out_of_range);
  CHECK_THROWS_AS(t.at({0, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>(3)), ShapeError);
  t.reshape({6, 4});
  CHECK(t.dim(0) == 6);
  CHECK_THROWS_AS(t.reshape({5, 5}), ShapeError);
  CHECK(numerics::shape_string({2, 3}) == "[2x3]");
}

TEST_CASE("relu examples") {
  const Tensor x({3}, {-1.0, 0.0, 2.0});
  CHECK(numerics::relu(x) == Tensor({3}, {0.0, 0.0, 2.0}));
  CHECK(numerics::relu(Tensor({4})) == Tensor({4}));

  std::mt19937_64 rng(3);
  const Tensor t = random_tensor({50}, rng);
  Tensor neg = t;
  for (double& v : neg.values()) v = -v;
  const Tensor a = numerics::relu(t);
  const Tensor b = numerics::relu(neg);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(a[i] + b[i] == std::abs(t[i]));
}

TEST_CASE("relu backward masks non-positive pre-activations") {
  const Tensor pre({4}, {-1.0, 0.0, 0.5, 2.0});
  Tensor g({4}, {1.0, 1.0, 1.0, 1.0});
  numerics::relu_backward(pre, g);
  CHECK(g == Tensor({4}, {0.0, 0.0, 1.0, 1.0}));
}

TEST_CASE("valid output length law") {
  CHECK(numerics::valid_output_length(220, 9, 2) == 106);
  CHECK(numerics::valid_output_length(103, 9, 2) == 48);
  CHECK(numerics::valid_output_length(106, 9, 2) == 49);
  CHECK(numerics::valid_output_length(9, 9, 1) == 1);
  CHECK_THROWS_AS(numerics::valid_output_length(8, 9, 1), ShapeError);
  CHECK_THROWS_AS(numerics::valid_output_length(9, 9, 0), ShapeError);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t f = 1 + rng() % 12;
    const std::size_t l = f + rng() % 60;
    const std::size_t s = 1 + rng() % 6;
    std::size_t count = 0;
    for (std::size_t start = 0; start + f <= l; start += s) ++count;
    REQUIRE(numerics::valid_output_length(l, f, s) == count);

    const Tensor x = random_tensor({l, 1}, rng);
    const Tensor k = random_tensor({1, 1, f}, rng);
    CHECK(numerics::conv1d_valid(x, k, Tensor({1}), s).dim(0) == count);
  }
}

TEST_CASE("conv1d sum of ones") {
  const std::size_t cin = 5;
  Tensor x({9, cin}, 1.0);
  Tensor k({1, cin, 9}, 1.0);
  const Tensor y = numerics::conv1d_valid(x, k, Tensor({1}), 1);
  REQUIRE(y.shape() == numerics::Shape{1, 1});
  CHECK(y[0] == 9.0 * cin);
}

TEST_CASE("conv1d identity kernel reproduces the input") {
  std::mt19937_64 rng(5);
  const std::size_t c = 4;
  const Tensor x = random_tensor({13, c}, rng);
  Tensor k({c, c, 1});
  for (std::size_t i = 0; i < c; ++i) k.at({i, i, 0}) = 1.0;
  CHECK(numerics::conv1d_valid(x, k, Tensor({c}), 1) == x);
}

TEST_CASE("conv1d matches the nested-loop oracle") {
  std::mt19937_64 rng(17);
  const Tensor x = random_tensor({17, 3}, rng);
  const Tensor k = random_tensor({2, 3, 4}, rng);
  const Tensor b = random_tensor({2}, rng);
  const Tensor y = numerics::conv1d_valid(x, k, b, 3);
  CHECK(y.shape() == numerics::Shape{5, 2});
  const auto expect = oracle::conv1d({x.values().begin(), x.values().end()}, 17, 3,
                                     {k.values().begin(), k.values().end()}, 2, 4, {b.values().begin(), b.values().end()},
                                     3);
  CHECK(oracle::max_abs_diff({y.values().begin(), y.values().end()}, expect) < 1e-12);
}

TEST_CASE("conv1d is linear in the signal") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor x = random_tensor({21, 3}, rng);
    const Tensor z = random_tensor({21, 3}, rng);
    const Tensor k = random_tensor({4, 3, 5}, rng);
    const double a = 1.7, b = -0.6;
    Tensor mix({21, 3});
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + b * z[i];
    const Tensor zero_bias({4});
    const Tensor lhs = numerics::conv1d_valid(mix, k, zero_bias, 2);
    const Tensor yx = numerics::conv1d_valid(x, k, zero_bias, 2);
    const Tensor yz = numerics::conv1d_valid(z, k, zero_bias, 2);
    for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(std::abs(lhs[i] - (a * yx[i] + b * yz[i])) < 1e-10);
  }
}

TEST_CASE("conv1d shape errors") {
  CHECK_THROWS_AS(numerics::conv1d_valid(Tensor({5, 2}), Tensor({1, 3, 2}), Tensor({1}), 1), ShapeError);
  CHECK_THROWS_AS(numerics::conv1d_valid(Tensor({5, 2}), Tensor({1, 2, 2}), Tensor({2}), 1), ShapeError);
  CHECK_THROWS_AS(numerics::conv1d_valid(Tensor({3, 2}), Tensor({1, 2, 4}), Tensor({1}), 1), ShapeError);
}

TEST_CASE("conv1d backward matches finite differences") {
  std::mt19937_64 rng(29);
  const Tensor x = random_tensor({11, 2}, rng);
  const Tensor k = random_tensor({3, 2, 3}, rng);
  const Tensor b = random_tensor({3}, rng);
  const Tensor w = random_tensor({5, 3}, rng);  // loss = sum(w * y)

  auto loss = [&](const Tensor& xs, const Tensor& ks, const Tensor& bs) {
    const Tensor y = numerics::conv1d_valid(xs, ks, bs, 2);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += w[i] * y[i];
    return acc;
  };
  Tensor kg = Tensor::zeros_like(k), bg = Tensor::zeros_like(b), xg = Tensor::zeros_like(x);
  numerics::conv1d_valid_backward(x, k, 2, w, kg, bg, &xg);

  const auto rk = numerics::finite_difference_check(
      [&](std::span<const double> v) { return loss(x, Tensor(k.shape(), {v.begin(), v.end()}), b); }, k.values(),
      kg.values(), 1e-6);
  const auto rb = numerics::finite_difference_check(
      [&](std::span<const double> v) { return loss(x, k, Tensor(b.shape(), {v.begin(), v.end()})); }, b.values(),
      bg.values(), 1e-6);
  const auto rx = numerics::finite_difference_check(
      [&](std::span<const double> v) { return loss(Tensor(x.shape(), {v.begin(), v.end()}), k, b); }, x.values(),
      xg.values(), 1e-6);
  CHECK(rk.max_relative_error < 1e-6);
  CHECK(rb.max_relative_error < 1e-6);
  CHECK(rx.max_relative_error < 1e-6);
}

TEST_CASE("conv2d single channel") {
  std::mt19937_64 rng(31);
  CHECK(numerics::conv2d_single_channel(Tensor({7, 7}), random_tensor({7, 7}, rng), 0.25) == 0.25);

  const Tensor patch = random_tensor({7, 7}, rng);
  Tensor delta({7, 7});
  delta.at({3, 3}) = 1.0;
  CHECK(numerics::conv2d_single_channel(patch, delta, 0.0) == patch.at({3, 3}));

  const Tensor kernel = random_tensor({7, 7}, rng);
  double expect = 0.5;
  for (std::size_t r = 0; r < 7; ++r) {
    for (std::size_t c = 0; c < 7; ++c) expect += patch.at({r, c}) * kernel.at({r, c});
  }
  CHECK(numerics::conv2d_single_channel(patch, kernel, 0.5) == doctest::Approx(expect).epsilon(1e-14));
  CHECK_THROWS_AS(numerics::conv2d_single_channel(Tensor({3, 3}), Tensor({2, 2}), 0.0), ShapeError);
}

TEST_CASE("finite difference checker") {
  SUBCASE("quadratic") {
    const std::vector<double> w{3.0};
    const std::vector<double> g{6.0};
    const auto r = numerics::finite_difference_check([](std::span<const double> v) { return v[0] * v[0]; }, w, g,
                                                      1e-4);
    CHECK(r.numeric == doctest::Approx(6.0));
    CHECK(r.max_relative_error < 1e-8);
  }
  SUBCASE("constant") {
    const std::vector<double> w{1.0, -2.0};
    const std::vector<double> g{0.0, 0.0};
    const auto r = numerics::finite_difference_check([](std::span<const double>) { return 4.0; }, w, g, 1e-5);
    CHECK(r.numeric == 0.0);
    CHECK(r.max_relative_error == 0.0);
  }
  SUBCASE("detects a wrong gradient") {
    const std::vector<double> w{1.0, 2.0};
    const std::vector<double> g{2.0, 5.0};
    const auto r = numerics::finite_difference_check(
        [](std::span<const double> v) { return v[0] * v[0] + v[1] * v[1]; }, w, g, 1e-5);
    CHECK(r.worst_index == 1);
    CHECK(r.max_relative_error > 0.1);
  }
  SUBCASE("non-finite function value") {
    const std::vector<double> w{0.0};
    const std::vector<double> g{0.0};
    CHECK_THROWS_AS(numerics::finite_difference_check([](std::span<const double>) { return NAN; }, w, g, 1e-5),
                    NumericalError);
  }
  CHECK(numerics::relative_error(0.0, 0.0) == 0.0);
}
