// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "tatumkit/separate.hpp"
#include "tatumkit/simd.hpp"

namespace tatumkit::separate {

namespace {

constexpr double kQuarterTurn = std::numbers::pi / 2.0;

// Second- and fourth-order moments of a zero-mean pair, normalized by the
// sample count. fourth[p] = E[x^(4-p) y^p], second[p] = E[x^(2-p) y^p].
struct Moments {
  std::array<double, 3> second{};
  std::array<double, 5> fourth{};
};

Moments normalized_moments(std::span<const double> x, std::span<const double> y) {
  const simd::PairMoments raw = simd::active().pair_moments(x, y);
  const double inv = 1.0 / static_cast<double>(x.size());
  Moments m;
  for (int i = 0; i < 3; ++i) m.second[i] = raw[i] * inv;
  for (int i = 0; i < 5; ++i) m.fourth[i] = raw[3 + i] * inv;
  return m;
}

struct PairCumulants {
  double c1112 = 0.0, c1122 = 0.0, c1222 = 0.0;
  double c1111 = 0.0, c2222 = 0.0;
};

// Rotate the moment tensors by R = [[c, -s], [s, c]] and form cumulants of
// the rotated pair.
PairCumulants rotated_cumulants(const Moments& m, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double r[2][2] = {{c, -s}, {s, c}};

  auto second = [&](int a, int b) {
    double acc = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) acc += r[a][i] * r[b][j] * m.second[i + j];
    return acc;
  };
  auto fourth = [&](int a, int b, int cc, int d) {
    double acc = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l)
            acc += r[a][i] * r[b][j] * r[cc][k] * r[d][l] * m.fourth[i + j + k + l];
    return acc;
  };
  auto cumulant = [&](int a, int b, int cc, int d) {
    return fourth(a, b, cc, d) - second(a, b) * second(cc, d) - second(a, cc) * second(b, d) -
           second(a, d) * second(b, cc);
  };

  PairCumulants out;
  out.c1111 = cumulant(0, 0, 0, 0);
  out.c1112 = cumulant(0, 0, 0, 1);
  out.c1122 = cumulant(0, 0, 1, 1);
  out.c1222 = cumulant(0, 1, 1, 1);
  out.c2222 = cumulant(1, 1, 1, 1);
  return out;
}

// Sum of squared cross-cumulants over all index orderings.
double contrast_from_moments(const Moments& m, double angle) {
  const PairCumulants k = rotated_cumulants(m, angle);
  return 4.0 * k.c1112 * k.c1112 + 6.0 * k.c1122 * k.c1122 + 4.0 * k.c1222 * k.c1222;
}

double total_cumulant_energy(const Moments& m) {
  const PairCumulants k = rotated_cumulants(m, 0.0);
  return k.c1111 * k.c1111 + k.c2222 * k.c2222 + 4.0 * k.c1112 * k.c1112 +
         6.0 * k.c1122 * k.c1122 + 4.0 * k.c1222 * k.c1222;
}

double golden_minimum(const Moments& m, double lo, double hi) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = contrast_from_moments(m, x1);
  double f2 = contrast_from_moments(m, x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = contrast_from_moments(m, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = contrast_from_moments(m, x2);
    }
  }
  return 0.5 * (a + b);
}

// Fold an angle into [-pi/4, pi/4); quarter turns only permute and flip rows.
double fold_quarter(double angle) {
  double a = std::fmod(angle + kQuarterTurn / 2.0, kQuarterTurn);
  if (a < 0.0) a += kQuarterTurn;
  return a - kQuarterTurn / 2.0;
}

void rotate_rows(Eigen::MatrixXd& data, Eigen::Index p, Eigen::Index q, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Eigen::RowVectorXd rp = data.row(p);
  const Eigen::RowVectorXd rq = data.row(q);
  data.row(p) = c * rp - s * rq;
  data.row(q) = s * rp + c * rq;
}

struct PairSolution {
  double angle = 0.0;
  bool degenerate = false;
  std::vector<double> grid_contrast;
};

PairSolution solve_pair(const Eigen::MatrixXd& data, Eigen::Index p, Eigen::Index q,
                        const IcaConfig& config) {
  const std::size_t m = static_cast<std::size_t>(data.cols());
  const Eigen::RowVectorXd xrow = data.row(p);
  const Eigen::RowVectorXd yrow = data.row(q);
  const std::span<const double> x(xrow.data(), m);
  const std::span<const double> y(yrow.data(), m);
  const Moments mom = normalized_moments(x, y);

  PairSolution sol;
  const std::size_t grid = std::max<std::size_t>(config.angle_grid, 4);
  const double step = kQuarterTurn / static_cast<double>(grid);
  sol.grid_contrast.resize(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    sol.grid_contrast[i] = contrast_from_moments(mom, step * static_cast<double>(i));
  }

  const double var_x = mom.second[0];
  const double var_y = mom.second[2];
  const double cov = mom.second[1];
  const double det = var_x * var_y - cov * cov;
  const auto [lo_it, hi_it] = std::minmax_element(sol.grid_contrast.begin(), sol.grid_contrast.end());
  const double spread = *hi_it - *lo_it;
  const double energy = total_cumulant_energy(mom);
  if (!(det > 1e-12 * (var_x + var_y) * (var_x + var_y)) || !(spread > 1e-9 * energy)) {
    sol.degenerate = true;
    sol.angle = 0.0;
    return sol;
  }

  // Local minima on the circular grid (period of a quarter turn).
  std::vector<double> candidates;
  for (std::size_t i = 0; i < grid; ++i) {
    const double here = sol.grid_contrast[i];
    const double prev = sol.grid_contrast[(i + grid - 1) % grid];
    const double next = sol.grid_contrast[(i + 1) % grid];
    if (here < prev && here <= next) {
      const double centre = step * static_cast<double>(i);
      candidates.push_back(golden_minimum(mom, centre - step, centre + step));
    }
  }
  if (candidates.empty()) {
    candidates.push_back(step * static_cast<double>(lo_it - sol.grid_contrast.begin()));
  }

  if (candidates.size() == 1) {
    sol.angle = fold_quarter(candidates.front());
    return sol;
  }

  // Several contrast minima: keep the rotation whose outputs share the least
  // information according to their histogram densities.
  Eigen::MatrixXd pair(2, data.cols());
  double best_mi = std::numeric_limits<double>::infinity();
  for (double angle : candidates) {
    pair.row(0) = xrow;
    pair.row(1) = yrow;
    rotate_rows(pair, 0, 1, angle);
    const double mi = mutual_information(pair, config.histogram_bins);
    if (mi < best_mi) {
      best_mi = mi;
      sol.angle = fold_quarter(angle);
    }
  }
  return sol;
}

}  // namespace

double pair_contrast(std::span<const double> x, std::span<const double> y, double angle_rad) {
  if (x.size() != y.size() || x.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "pair_contrast needs two equal, non-empty rows");
  }
  const std::size_t m = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  std::vector<double> cx(m), cy(m);
  for (std::size_t i = 0; i < m; ++i) {
    cx[i] = x[i] - mx;
    cy[i] = y[i] - my;
  }
  return contrast_from_moments(normalized_moments(cx, cy), angle_rad);
}

IcaRotation ica_rotation(const Eigen::MatrixXd& whitened, const IcaConfig& config) {
  const Eigen::Index k = whitened.rows();
  if (k < 2) throw Error(ErrorCode::DimensionMismatch, "ICA rotation needs at least two rows");
  if (whitened.cols() < 2) throw Error(ErrorCode::EmptyInput, "ICA rotation needs observations");

  Eigen::MatrixXd data = whitened.colwise() - whitened.rowwise().mean();
  Eigen::MatrixXd unmixing = Eigen::MatrixXd::Identity(k, k);
  Diagnostics diagnostics;
  std::vector<double> first_contrast;
  bool degenerate_reported = false;

  const std::size_t sweeps = std::max<std::size_t>(config.max_sweeps, 1);
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    double largest = 0.0;
    for (Eigen::Index p = 0; p < k; ++p) {
      for (Eigen::Index q = p + 1; q < k; ++q) {
        PairSolution sol = solve_pair(data, p, q, config);
        if (sweep == 0 && k == 2) first_contrast = sol.grid_contrast;
        if (sol.degenerate) {
          if (!degenerate_reported) {
            diagnostics.push_back({ErrorCode::DegenerateContrast,
                                   "cumulant contrast is flat for rows " + std::to_string(p) +
                                       " and " + std::to_string(q) +
                                       "; no independent directions to recover"});
            degenerate_reported = true;
          }
          continue;
        }
        if (std::abs(sol.angle) > config.sweep_tolerance_rad) {
          rotate_rows(data, p, q, sol.angle);
          rotate_rows(unmixing, p, q, sol.angle);
        }
        largest = std::max(largest, std::abs(sol.angle));
      }
    }
    if (largest <= config.sweep_tolerance_rad) break;
  }

  IcaRotation result{MixingModel::from_unmixing(unmixing), 0.0, std::move(first_contrast),
                     std::move(diagnostics)};
  if (k == 2) result.angle_rad = std::atan2(unmixing(1, 0), unmixing(0, 0));
  return result;
}

}  // namespace tatumkit::separate
