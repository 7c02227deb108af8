// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <string_view>

#include "kernels_internal.hpp"

namespace tatumkit::simd {

namespace {

bool cpu_supports_avx2() {
#if defined(TATUMKIT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  if (const char* forced = std::getenv("TATUMKIT_SIMD")) {
    if (std::string_view(forced) == "scalar") return scalar_kernels();
  }
  if (const KernelTable* wide = avx2_kernels()) return *wide;
  return scalar_kernels();
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar",
      &detail::dot_scalar,
      &detail::half_wave_rectify_scalar,
      &detail::magnitude_scalar,
      &detail::causal_convolve_scalar,
      &detail::residual_energy_scalar,
      &detail::pair_moments_scalar,
  };
  return table;
}

const KernelTable* avx2_kernels() {
#if defined(TATUMKIT_HAVE_AVX2)
  static const KernelTable table{
      "avx2",
      &detail::dot_avx2,
      &detail::half_wave_rectify_avx2,
      &detail::magnitude_avx2,
      &detail::causal_convolve_avx2,
      &detail::residual_energy_avx2,
      &detail::pair_moments_avx2,
  };
  static const bool supported = cpu_supports_avx2();
  return supported ? &table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace tatumkit::simd
