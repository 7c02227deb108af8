// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 -mfma. Only reached through the dispatch table after a
// runtime CPU check, so nothing here may be inlined into generic code.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "kernels_internal.hpp"

namespace tatumkit::simd::detail {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double dot_avx2(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  const double* pa = a.data();
  const double* pb = b.data();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 4), _mm256_loadu_pd(pb + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 8), _mm256_loadu_pd(pb + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 12), _mm256_loadu_pd(pb + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) acc += pa[i] * pb[i];
  return acc;
}

void half_wave_rectify_avx2(std::span<const double> in, std::span<double> out) {
  const std::size_t n = in.size();
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out.data() + i, _mm256_max_pd(_mm256_loadu_pd(in.data() + i), zero));
  }
  for (; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void magnitude_avx2(std::span<const std::complex<double>> in, std::span<double> out) {
  const std::size_t n = in.size();
  const double* p = reinterpret_cast<const double*>(in.data());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(p + 2 * i);
    const __m256d b = _mm256_loadu_pd(p + 2 * i + 4);
    // hadd interleaves lanes as [c0, c2, c1, c3]; restore order before sqrt.
    const __m256d s = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
    const __m256d ordered = _mm256_permute4x64_pd(s, 0xD8);
    _mm256_storeu_pd(out.data() + i, _mm256_sqrt_pd(ordered));
  }
  for (; i < n; ++i) {
    const double re = in[i].real();
    const double im = in[i].imag();
    out[i] = std::sqrt(re * re + im * im);
  }
}

void causal_convolve_avx2(std::span<const double> in, std::span<const double> kernel,
                          std::span<double> out) {
  const std::size_t n = in.size();
  const std::size_t taps = kernel.size();
  if (taps == 0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  // Outputs before taps-1 see a truncated history; the scalar loop handles them.
  const std::size_t head = std::min(n, taps - 1);
  causal_convolve_scalar(in.first(head), kernel, out.first(head));

  const double* x = in.data();
  std::size_t i = head;
  for (; i + 16 <= n; i += 16) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    for (std::size_t j = 0; j < taps; ++j) {
      const __m256d k = _mm256_broadcast_sd(kernel.data() + j);
      const double* base = x + i - j;
      acc0 = _mm256_fmadd_pd(k, _mm256_loadu_pd(base), acc0);
      acc1 = _mm256_fmadd_pd(k, _mm256_loadu_pd(base + 4), acc1);
      acc2 = _mm256_fmadd_pd(k, _mm256_loadu_pd(base + 8), acc2);
      acc3 = _mm256_fmadd_pd(k, _mm256_loadu_pd(base + 12), acc3);
    }
    _mm256_storeu_pd(out.data() + i, acc0);
    _mm256_storeu_pd(out.data() + i + 4, acc1);
    _mm256_storeu_pd(out.data() + i + 8, acc2);
    _mm256_storeu_pd(out.data() + i + 12, acc3);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < taps; ++j) {
      acc = _mm256_fmadd_pd(_mm256_broadcast_sd(kernel.data() + j),
                            _mm256_loadu_pd(x + i - j), acc);
    }
    _mm256_storeu_pd(out.data() + i, acc);
  }
  for (; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < taps; ++j) acc += kernel[j] * x[i - j];
    out[i] = acc;
  }
}

double residual_energy_avx2(std::span<const double> values, std::span<const double> weights,
                            double q) {
  const std::size_t n = values.size();
  const double half = 0.5 * q;
  const __m256d vq = _mm256_set1_pd(q);
  const __m256d vhalf = _mm256_set1_pd(half);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d t0 = _mm256_add_pd(_mm256_loadu_pd(values.data() + i), vhalf);
    const __m256d t1 = _mm256_add_pd(_mm256_loadu_pd(values.data() + i + 4), vhalf);
    const __m256d f0 = _mm256_floor_pd(_mm256_div_pd(t0, vq));
    const __m256d f1 = _mm256_floor_pd(_mm256_div_pd(t1, vq));
    const __m256d r0 = _mm256_sub_pd(_mm256_fnmadd_pd(vq, f0, t0), vhalf);
    const __m256d r1 = _mm256_sub_pd(_mm256_fnmadd_pd(vq, f1, t1), vhalf);
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(weights.data() + i), _mm256_mul_pd(r0, r0), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(weights.data() + i + 4), _mm256_mul_pd(r1, r1), acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double t = values[i] + half;
    const double r = t - q * std::floor(t / q) - half;
    acc += weights[i] * (r * r);
  }
  return acc;
}

PairMoments pair_moments_avx2(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  __m256d s[8];
  for (auto& v : s) v = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(x.data() + i);
    const __m256d b = _mm256_loadu_pd(y.data() + i);
    const __m256d aa = _mm256_mul_pd(a, a);
    const __m256d bb = _mm256_mul_pd(b, b);
    const __m256d ab = _mm256_mul_pd(a, b);
    s[0] = _mm256_add_pd(s[0], aa);
    s[1] = _mm256_add_pd(s[1], ab);
    s[2] = _mm256_add_pd(s[2], bb);
    s[3] = _mm256_fmadd_pd(aa, aa, s[3]);
    s[4] = _mm256_fmadd_pd(aa, ab, s[4]);
    s[5] = _mm256_fmadd_pd(aa, bb, s[5]);
    s[6] = _mm256_fmadd_pd(ab, bb, s[6]);
    s[7] = _mm256_fmadd_pd(bb, bb, s[7]);
  }
  PairMoments m{};
  for (int k = 0; k < 8; ++k) m[k] = hsum(s[k]);
  const PairMoments tail = pair_moments_scalar(x.subspan(i, n - i), y.subspan(i, n - i));
  for (int k = 0; k < 8; ++k) m[k] += tail[k];
  return m;
}

}  // namespace tatumkit::simd::detail
