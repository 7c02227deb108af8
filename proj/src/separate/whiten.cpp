// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "tatumkit/separate.hpp"

namespace tatumkit::separate {

namespace {

// Eigenvalues below this fraction of the largest count as numerically zero.
constexpr double kRankTolerance = 1e-10;

}  // namespace

Eigen::MatrixXd covariance(const Eigen::MatrixXd& data) {
  if (data.rows() == 0 || data.cols() < 2) {
    throw Error(ErrorCode::EmptyInput, "covariance needs at least one row and two columns");
  }
  const Eigen::MatrixXd centered = data.colwise() - data.rowwise().mean();
  return centered * centered.transpose();
}

WhiteningResult whiten(const Eigen::MatrixXd& data, Eigen::Index retained) {
  const Eigen::Index n = data.rows();
  const Eigen::Index m = data.cols();
  if (n == 0 || m < 2) throw Error(ErrorCode::EmptyInput, "whitening needs at least one row and two columns");
  if (retained < 1 || retained > std::min(n, m)) {
    throw Error(ErrorCode::InvalidArgument,
                "retained must lie in [1, min(rows, cols)], got " + std::to_string(retained));
  }

  WhiteningResult result;
  result.mean = data.rowwise().mean();
  const Eigen::MatrixXd centered = data.colwise() - result.mean;
  const Eigen::MatrixXd cov = centered * centered.transpose();

  // Symmetric PSD: the eigen-decomposition equals the SVD.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::RankDeficient, "covariance eigen-decomposition failed");
  }
  const Eigen::VectorXd ascending = solver.eigenvalues();
  const Eigen::MatrixXd vectors = solver.eigenvectors();

  result.scale.resize(n);
  Eigen::MatrixXd basis(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = n - 1 - i;
    result.scale(i) = std::max(0.0, ascending(src));
    Eigen::VectorXd v = vectors.col(src);
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v(pivot) < 0.0) v = -v;
    basis.col(i) = v;
  }
  result.rotation = basis.transpose();

  const double largest = result.scale(0);
  Eigen::Index rank = 0;
  if (largest > 0.0) {
    while (rank < n && result.scale(rank) > kRankTolerance * largest) ++rank;
  }
  if (rank == 0) throw Error(ErrorCode::RankDeficient, "data has zero variance");
  if (retained > rank) {
    result.diagnostics.push_back(
        {ErrorCode::RankDeficient, "requested " + std::to_string(retained) +
                                       " components but numerical rank is " + std::to_string(rank)});
    retained = rank;
  }

  result.retained = retained;
  result.reduced_basis = basis.leftCols(retained);
  Eigen::VectorXd gains(retained);
  for (Eigen::Index i = 0; i < retained; ++i) {
    gains(i) = std::sqrt(static_cast<double>(m) / result.scale(i));
  }
  result.whitening = gains.asDiagonal() * result.reduced_basis.transpose();
  result.dewhitening = result.reduced_basis * gains.cwiseInverse().asDiagonal();
  result.whitened = result.whitening * centered;
  return result;
}

}  // namespace tatumkit::separate
