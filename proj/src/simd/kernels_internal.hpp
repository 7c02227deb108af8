// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tatumkit/simd.hpp"

namespace tatumkit::simd::detail {

double dot_scalar(std::span<const double> a, std::span<const double> b);
void half_wave_rectify_scalar(std::span<const double> in, std::span<double> out);
void magnitude_scalar(std::span<const std::complex<double>> in, std::span<double> out);
void causal_convolve_scalar(std::span<const double> in, std::span<const double> kernel,
                            std::span<double> out);
double residual_energy_scalar(std::span<const double> values, std::span<const double> weights,
                              double q);
PairMoments pair_moments_scalar(std::span<const double> x, std::span<const double> y);

#if defined(TATUMKIT_HAVE_AVX2)
double dot_avx2(std::span<const double> a, std::span<const double> b);
void half_wave_rectify_avx2(std::span<const double> in, std::span<double> out);
void magnitude_avx2(std::span<const std::complex<double>> in, std::span<double> out);
void causal_convolve_avx2(std::span<const double> in, std::span<const double> kernel,
                          std::span<double> out);
double residual_energy_avx2(std::span<const double> values, std::span<const double> weights,
                            double q);
PairMoments pair_moments_avx2(std::span<const double> x, std::span<const double> y);
#endif

}  // namespace tatumkit::simd::detail
