#include "convcaps/hsi/whitening.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "convcaps/errors.hpp"

namespace convcaps::hsi {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> pixel_matrix(const HsiCube& cube) {
  return {cube.values().data(), static_cast<Eigen::Index>(cube.pixel_count()),
          static_cast<Eigen::Index>(cube.channels())};
}

void check_channels(const HsiCube& cube, const WhiteningTransform& t) {
  if (cube.channels() != t.channels()) {
    throw ShapeError("whitening transform has " + std::to_string(t.channels()) + " channels, cube has " +
                     std::to_string(cube.channels()));
  }
}

}  // namespace

WhiteningTransform fit_whitening(const HsiCube& cube, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("whitening epsilon must be positive");
  const auto c = static_cast<Eigen::Index>(cube.channels());
  if (cube.pixel_count() < cube.channels() + 1) {
    throw std::invalid_argument("whitening needs at least C+1 pixels");
  }

  const auto x = pixel_matrix(cube);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const RowMatrix centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(cube.pixel_count());
  if (!cov.allFinite()) throw NumericalError("covariance has non-finite entries");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");

  WhiteningTransform t;
  t.epsilon = epsilon;
  t.mean.assign(mean.data(), mean.data() + c);
  t.eigenvalues.resize(c);
  t.inv_sqrt_eigs.resize(c);
  t.basis.resize(static_cast<std::size_t>(c * c));
  // Eigen sorts ascending; components are stored largest-variance first so
  // the leading whitened channels are the leading principal components.
  const auto& vecs = solver.eigenvectors();
  for (Eigen::Index i = 0; i < c; ++i) {
    const Eigen::Index src = c - 1 - i;
    // Roundoff can leave tiny negative eigenvalues on rank-deficient data.
    const double lambda = std::max(0.0, solver.eigenvalues()(src));
    t.eigenvalues[i] = lambda;
    t.inv_sqrt_eigs[i] = 1.0 / std::sqrt(lambda + epsilon);
    for (Eigen::Index r = 0; r < c; ++r) t.basis[r * c + i] = vecs(r, src);
  }
  return t;
}

HsiCube apply_whitening(const HsiCube& cube, const WhiteningTransform& t) {
  check_channels(cube, t);
  const auto c = static_cast<Eigen::Index>(cube.channels());
  const auto x = pixel_matrix(cube);
  Eigen::Map<const RowMatrix> basis(t.basis.data(), c, c);
  Eigen::Map<const Eigen::RowVectorXd> mean(t.mean.data(), c);
  Eigen::Map<const Eigen::RowVectorXd> scale(t.inv_sqrt_eigs.data(), c);

  // Row form: y^T = (x - mean)^T * basis * diag(scale)
  RowMatrix y = ((x.rowwise() - mean) * basis).array().rowwise() * scale.array();
  std::vector<double> out(y.data(), y.data() + y.size());
  std::vector<std::uint16_t> labels;
  if (cube.has_labels()) labels.assign(cube.labels().begin(), cube.labels().end());
  return HsiCube(cube.height(), cube.width(), cube.channels(), std::move(out), std::move(labels));
}

HsiCube invert_whitening(const HsiCube& whitened, const WhiteningTransform& t) {
  check_channels(whitened, t);
  const auto c = static_cast<Eigen::Index>(whitened.channels());
  const auto y = pixel_matrix(whitened);
  Eigen::Map<const RowMatrix> basis(t.basis.data(), c, c);
  Eigen::Map<const Eigen::RowVectorXd> mean(t.mean.data(), c);
  Eigen::RowVectorXd unscale(c);
  for (Eigen::Index i = 0; i < c; ++i) unscale(i) = 1.0 / t.inv_sqrt_eigs[i];

  RowMatrix x = (y.array().rowwise() * unscale.array()).matrix() * basis.transpose();
  x.rowwise() += mean;
  std::vector<double> out(x.data(), x.data() + x.size());
  std::vector<std::uint16_t> labels;
  if (whitened.has_labels()) labels.assign(whitened.labels().begin(), whitened.labels().end());
  return HsiCube(whitened.height(), whitened.width(), whitened.channels(), std::move(out), std::move(labels));
}

}  // namespace convcaps::hsi
