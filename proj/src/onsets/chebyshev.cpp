// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "tatumkit/onsets.hpp"

namespace tatumkit::onsets {

namespace {

constexpr int kOrder = 6;
constexpr double kRippleDb = 0.05;

// Direct form II transposed over one section, carrying state in z.
void run_section(const Biquad& s, std::vector<double>& x, double z1, double z2) {
  for (double& v : x) {
    const double in = v;
    const double out = s.b[0] * in + z1;
    z1 = s.b[1] * in - s.a[0] * out + z2;
    z2 = s.b[2] * in - s.a[1] * out;
    v = out;
  }
}

void run_cascade(std::span<const Biquad> sections, std::vector<double>& x) {
  // Steady-state start for a constant input equal to the first sample.
  double level = x.front();
  for (const Biquad& s : sections) {
    const double dc = (s.b[0] + s.b[1] + s.b[2]) / (1.0 + s.a[0] + s.a[1]);
    const double out = dc * level;
    const double z2 = s.b[2] * level - s.a[1] * out;
    const double z1 = s.b[1] * level - s.a[0] * out + z2;
    run_section(s, x, z1, z2);
    level = out;
  }
}

}  // namespace

std::vector<Biquad> chebyshev1_lowpass(double cutoff) {
  if (!(cutoff > 0.0 && cutoff < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "cutoff must lie in (0, 1) of Nyquist");
  }
  const double eps = std::sqrt(std::pow(10.0, kRippleDb / 10.0) - 1.0);
  const double mu = std::asinh(1.0 / eps) / kOrder;
  // Bilinear transform with s = (1 - z^-1) / (1 + z^-1); prewarped edge.
  const double warped = std::tan(std::numbers::pi * cutoff / 2.0);

  std::vector<Biquad> sections;
  for (int k = 1; k <= kOrder / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k - 1.0) / (2.0 * kOrder);
    const std::complex<double> pole(-std::sinh(mu) * std::sin(theta),
                                    std::cosh(mu) * std::cos(theta));
    const std::complex<double> p = pole * warped;
    const double a1 = -2.0 * p.real();
    const double a0 = std::norm(p);
    // Denominator of s^2 + a1 s + a0 after substitution, times (1 + z^-1)^2.
    const double d0 = 1.0 + a1 + a0;
    const double d1 = 2.0 * a0 - 2.0;
    const double d2 = 1.0 - a1 + a0;
    Biquad s;
    s.a = {d1 / d0, d2 / d0};
    const double gain = (1.0 + s.a[0] + s.a[1]) / 4.0;
    s.b = {gain, 2.0 * gain, gain};
    sections.push_back(s);
  }
  return sections;
}

double response_magnitude(std::span<const Biquad> sections, double omega) {
  const std::complex<double> z1 = std::polar(1.0, -omega);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h(1.0, 0.0);
  for (const Biquad& s : sections) {
    h *= (s.b[0] + s.b[1] * z1 + s.b[2] * z2) / (1.0 + s.a[0] * z1 + s.a[1] * z2);
  }
  return std::abs(h);
}

std::vector<double> filtfilt(std::span<const Biquad> sections, std::span<const double> signal) {
  const std::size_t n = signal.size();
  if (n == 0 || sections.empty()) return {signal.begin(), signal.end()};

  const std::size_t pad = std::min<std::size_t>(3 * (2 * sections.size() + 1), n - 1);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * signal[0] - signal[i]);
  ext.insert(ext.end(), signal.begin(), signal.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * signal[n - 1] - signal[n - 1 - i]);

  run_cascade(sections, ext);
  std::reverse(ext.begin(), ext.end());
  run_cascade(sections, ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace tatumkit::onsets
