// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "kernels_internal.hpp"

namespace tatumkit::simd::detail {

double dot_scalar(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void half_wave_rectify_scalar(std::span<const double> in, std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void magnitude_scalar(std::span<const std::complex<double>> in, std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double re = in[i].real();
    const double im = in[i].imag();
    out[i] = std::sqrt(re * re + im * im);
  }
}

void causal_convolve_scalar(std::span<const double> in, std::span<const double> kernel,
                            std::span<double> out) {
  const std::size_t n = in.size();
  const std::size_t taps = kernel.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t span = std::min(taps, i + 1);
    double acc = 0.0;
    for (std::size_t j = 0; j < span; ++j) acc += kernel[j] * in[i - j];
    out[i] = acc;
  }
}

double residual_energy_scalar(std::span<const double> values, std::span<const double> weights,
                              double q) {
  const double half = 0.5 * q;
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    // floor(t / q) is exact here: t is a multiple of 1/2 and q >= 1, so t / q
    // never lands within an ulp of an integer unless it is one.
    const double t = values[i] + half;
    const double r = t - q * std::floor(t / q) - half;
    acc += weights[i] * (r * r);
  }
  return acc;
}

PairMoments pair_moments_scalar(std::span<const double> x, std::span<const double> y) {
  PairMoments m{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = x[i];
    const double b = y[i];
    const double aa = a * a;
    const double bb = b * b;
    const double ab = a * b;
    m[0] += aa;
    m[1] += ab;
    m[2] += bb;
    m[3] += aa * aa;
    m[4] += aa * ab;
    m[5] += aa * bb;
    m[6] += ab * bb;
    m[7] += bb * bb;
  }
  return m;
}

}  // namespace tatumkit::simd::detail
