// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <string>

#include "tatumkit/separate.hpp"

namespace tatumkit::separate {

namespace {

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " matrix must be square and non-empty");
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::RankDeficient, std::string(what) + " matrix is singular");
  }
  return lu.inverse();
}

}  // namespace

MixingModel MixingModel::from_mixing(Eigen::MatrixXd mixing) {
  Eigen::MatrixXd inverse = checked_inverse(mixing, "mixing");
  return MixingModel(std::move(mixing), std::move(inverse));
}

MixingModel MixingModel::from_unmixing(Eigen::MatrixXd unmixing) {
  Eigen::MatrixXd inverse = checked_inverse(unmixing, "unmixing");
  return MixingModel(std::move(inverse), std::move(unmixing));
}

Eigen::MatrixXd mix(const Eigen::MatrixXd& sources, const MixingModel& model) {
  if (sources.rows() != model.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(model.size()) + " source rows, got " +
                    std::to_string(sources.rows()));
  }
  return model.mixing() * sources;
}

Eigen::MatrixXd unmix(const Eigen::MatrixXd& mixed, const MixingModel& model) {
  if (mixed.rows() != model.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(model.size()) + " mixed rows, got " +
                    std::to_string(mixed.rows()));
  }
  return model.unmixing() * mixed;
}

}  // namespace tatumkit::separate
