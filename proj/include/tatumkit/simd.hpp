// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace tatumkit::simd {

/// Raw moment sums of a pair of rows, used by the cumulant contrast.
/// Index layout: [xx, xy, yy, xxxx, xxxy, xxyy, xyyy, yyyy].
using PairMoments = std::array<double, 8>;

/// Inner loops with a scalar reference implementation and vectorized
/// variants. Every variant must agree with the scalar one to within
/// floating-point reassociation; the tests check this.
struct KernelTable {
  std::string_view name;

  double (*dot)(std::span<const double> a, std::span<const double> b);

  void (*half_wave_rectify)(std::span<const double> in, std::span<double> out);

  void (*magnitude)(std::span<const std::complex<double>> in, std::span<double> out);

  /// out[i] = sum_j kernel[j] * in[i - j], zero history before in[0].
  void (*causal_convolve)(std::span<const double> in, std::span<const double> kernel,
                          std::span<double> out);

  /// sum_i weights[i] * r_i^2 with r_i = ((values[i] + q/2) mod q) - q/2.
  double (*residual_energy)(std::span<const double> values, std::span<const double> weights,
                            double q);

  PairMoments (*pair_moments)(std::span<const double> x, std::span<const double> y);
};

const KernelTable& scalar_kernels();

/// AVX2/FMA table, or nullptr when the build or the CPU lacks support.
const KernelTable* avx2_kernels();

/// Table chosen once per process: the widest variant the CPU supports.
/// Setting TATUMKIT_SIMD=scalar in the environment forces the reference path.
const KernelTable& active();

}  // namespace tatumkit::simd
