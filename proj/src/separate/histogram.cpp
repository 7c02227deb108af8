// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <string>

#include "tatumkit/separate.hpp"

namespace tatumkit::separate {

namespace {

struct Binning {
  double lo = 0.0;
  double width = 0.0;
  std::size_t bins = 1;

  std::size_t index(double x) const {
    if (width <= 0.0) return 0;
    const double pos = (x - lo) / width;
    if (!(pos > 0.0)) return 0;
    return std::min(bins - 1, static_cast<std::size_t>(pos));
  }
};

template <typename Row>
Binning binning_for(const Row& row, std::size_t bins) {
  Binning b;
  b.bins = bins;
  if (row.size() == 0) return b;
  const double lo = row.minCoeff();
  const double hi = row.maxCoeff();
  b.lo = lo;
  b.width = (hi - lo) / static_cast<double>(bins);
  return b;
}

double pair_information(const Eigen::MatrixXd& rows, Eigen::Index a, Eigen::Index b,
                        std::size_t bins) {
  const Eigen::Index m = rows.cols();
  const Binning bx = binning_for(rows.row(a), bins);
  const Binning by = binning_for(rows.row(b), bins);
  std::vector<double> joint(bins * bins, 0.0);
  for (Eigen::Index j = 0; j < m; ++j) {
    joint[bx.index(rows(a, j)) * bins + by.index(rows(b, j))] += 1.0;
  }
  const double inv = 1.0 / static_cast<double>(m);
  std::vector<double> px(bins, 0.0), py(bins, 0.0);
  for (std::size_t i = 0; i < bins; ++i) {
    for (std::size_t k = 0; k < bins; ++k) {
      double& cell = joint[i * bins + k];
      cell *= inv;
      px[i] += cell;
      py[k] += cell;
    }
  }
  std::vector<double> product(bins * bins);
  for (std::size_t i = 0; i < bins; ++i) {
    for (std::size_t k = 0; k < bins; ++k) product[i * bins + k] = px[i] * py[k];
  }
  return kl_divergence(joint, product);
}

}  // namespace

PdfHistogram PdfHistogram::from_samples(std::span<const double> samples, std::size_t bins) {
  if (bins == 0) throw Error(ErrorCode::InvalidArgument, "histogram needs at least one bin");
  PdfHistogram h;
  h.counts.assign(bins, 0.0);
  h.bin_edges.resize(bins + 1);
  double lo = 0.0, hi = 0.0;
  if (!samples.empty()) {
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    lo = *mn;
    hi = *mx;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.bin_edges[i] = lo + width * static_cast<double>(i);
  const Binning b{lo, width, bins};
  for (double x : samples) h.counts[b.index(x)] += 1.0;
  h.mass = static_cast<double>(samples.size());
  return h;
}

std::vector<double> PdfHistogram::normalized() const {
  std::vector<double> p(counts);
  if (mass > 0.0) {
    for (double& v : p) v /= mass;
  }
  return p;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::BinningMismatch, "histograms have " + std::to_string(p.size()) + " and " +
                                                std::to_string(q.size()) + " bins");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = p[i] + kHistogramEpsilon;
    const double b = q[i] + kHistogramEpsilon;
    if (a != b) sum += a * std::log(a / b);
  }
  return std::max(0.0, sum);
}

double kl_divergence(const PdfHistogram& p, const PdfHistogram& q) {
  if (p.bin_edges != q.bin_edges) {
    throw Error(ErrorCode::BinningMismatch, "histograms use different bin edges");
  }
  const auto pn = p.normalized();
  const auto qn = q.normalized();
  return kl_divergence(pn, qn);
}

double mutual_information(const Eigen::MatrixXd& rows, std::size_t bins, Diagnostics* diagnostics) {
  if (rows.rows() < 2) throw Error(ErrorCode::DimensionMismatch, "mutual information needs two rows");
  if (rows.cols() == 0) throw Error(ErrorCode::EmptyInput, "mutual information of empty rows");
  if (bins == 0) throw Error(ErrorCode::InvalidArgument, "histogram needs at least one bin");
  if (rows.cols() < 100 && diagnostics != nullptr) {
    diagnostics->push_back({ErrorCode::InsufficientData,
                            "only " + std::to_string(rows.cols()) +
                                " samples; histogram estimate is unreliable below 100"});
  }
  double total = 0.0;
  for (Eigen::Index a = 0; a < rows.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < rows.rows(); ++b) total += pair_information(rows, a, b, bins);
  }
  return total;
}

}  // namespace tatumkit::separate
