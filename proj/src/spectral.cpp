// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "tatumkit/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "tatumkit/error.hpp"
#include "tatumkit/simd.hpp"

namespace tatumkit::spectral {

namespace {

// FFTW planning touches global state; execution on plan-owned buffers does not.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    real_ = fftw_alloc_real(n);
    complex_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, complex_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), complex_, real_, FFTW_ESTIMATE);
  }

  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(real_);
    fftw_free(complex_);
  }

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::span<double> time() { return {real_, n_}; }
  std::span<std::complex<double>> freq() {
    return {reinterpret_cast<std::complex<double>*>(complex_), n_ / 2 + 1};
  }

  void forward() { fftw_execute(forward_); }
  /// Unnormalized: the result is n times the true inverse.
  void inverse() { fftw_execute(inverse_); }

 private:
  std::size_t n_;
  double* real_ = nullptr;
  fftw_complex* complex_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

WindowKind window_kind_from_string(std::string_view name) {
  if (name == "hann") return WindowKind::Hann;
  if (name == "hamming") return WindowKind::Hamming;
  if (name == "rectangular" || name == "rect") return WindowKind::Rectangular;
  throw Error(ErrorCode::InvalidConfig, "unknown window '" + std::string(name) + "'");
}

std::string_view to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::Hann: return "hann";
    case WindowKind::Hamming: return "hamming";
    case WindowKind::Rectangular: return "rectangular";
  }
  return "hann";
}

std::vector<double> make_window(WindowKind kind, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (kind == WindowKind::Rectangular) return w;
  const double a = kind == WindowKind::Hann ? 0.5 : 0.54;
  for (std::size_t n = 0; n < length; ++n) {
    const double phase = 2.0 * std::numbers::pi * (static_cast<double>(n) + 0.5) / length;
    w[n] = a - (1.0 - a) * std::cos(phase);
  }
  return w;
}

bool satisfies_cola(std::span<const double> window, std::size_t hop, double tolerance) {
  if (hop == 0 || hop > window.size()) return false;
  std::vector<double> sums(hop, 0.0);
  for (std::size_t n = 0; n < window.size(); ++n) sums[n % hop] += window[n];
  const auto [lo, hi] = std::minmax_element(sums.begin(), sums.end());
  return *hi > 0.0 && (*hi - *lo) <= tolerance * *hi;
}

void validate(const StftConfig& config) {
  if (!is_power_of_two(config.window_length)) {
    throw Error(ErrorCode::InvalidConfig, "window length must be a power of two");
  }
  if (config.hop == 0 || config.hop > config.window_length) {
    throw Error(ErrorCode::InvalidConfig, "hop must satisfy 0 < hop <= window length");
  }
  const auto window = make_window(config.window, config.window_length);
  if (!satisfies_cola(window, config.hop)) {
    throw Error(ErrorCode::InvalidConfig,
                "window '" + std::string(to_string(config.window)) +
                    "' is not constant-overlap-add at hop " + std::to_string(config.hop));
  }
}

std::size_t frame_count(std::size_t length, const StftConfig& config) {
  const std::size_t w = config.window_length;
  if (length <= w) return 1;
  return 1 + (length - w + config.hop - 1) / config.hop;
}

Spectrogram stft(std::span<const double> signal, std::uint32_t sample_rate,
                 const StftConfig& config) {
  validate(config);
  const std::size_t w = config.window_length;
  const std::size_t m = frame_count(signal.size(), config);
  const std::size_t bins = w / 2 + 1;
  const auto window = make_window(config.window, w);

  Spectrogram spec;
  spec.config = config;
  spec.sample_rate = sample_rate;
  spec.original_length = signal.size();
  spec.bins.resize(static_cast<Eigen::Index>(bins), static_cast<Eigen::Index>(m));

  RealFft fft(w);
  for (std::size_t t = 0; t < m; ++t) {
    const std::size_t start = t * config.hop;
    auto frame = fft.time();
    for (std::size_t i = 0; i < w; ++i) {
      const std::size_t idx = start + i;
      frame[i] = idx < signal.size() ? signal[idx] * window[i] : 0.0;
    }
    fft.forward();
    const auto out = fft.freq();
    std::copy(out.begin(), out.end(), spec.bins.col(static_cast<Eigen::Index>(t)).data());
  }
  return spec;
}

Spectrogram stft(const audio::AudioBuffer& signal, const StftConfig& config) {
  if (signal.channel_count() != 1) {
    throw Error(ErrorCode::InvalidArgument, "stft expects a mono signal");
  }
  return stft(signal.channel(0), signal.sample_rate(), config);
}

audio::AudioBuffer istft(const Spectrogram& spec) {
  const auto& config = spec.config;
  validate(config);
  const std::size_t w = config.window_length;
  if (static_cast<std::size_t>(spec.bins.rows()) != w / 2 + 1) {
    throw Error(ErrorCode::InvalidConfig, "bin count does not match window length");
  }
  if (spec.sample_rate == 0) throw Error(ErrorCode::InvalidConfig, "spectrogram has no sample rate");
  const std::size_t m = static_cast<std::size_t>(spec.bins.cols());
  const std::size_t span = m == 0 ? 0 : (m - 1) * config.hop + w;
  const auto window = make_window(config.window, w);

  std::vector<double> acc(span, 0.0);
  std::vector<double> norm(span, 0.0);
  RealFft fft(w);
  const double scale = 1.0 / static_cast<double>(w);
  for (std::size_t t = 0; t < m; ++t) {
    const auto col = spec.bins.col(static_cast<Eigen::Index>(t));
    auto freq = fft.freq();
    std::copy(col.data(), col.data() + col.size(), freq.begin());
    fft.inverse();
    const auto frame = fft.time();
    const std::size_t start = t * config.hop;
    for (std::size_t i = 0; i < w; ++i) {
      acc[start + i] += frame[i] * scale * window[i];
      norm[start + i] += window[i] * window[i];
    }
  }

  std::vector<double> out(spec.original_length, 0.0);
  const std::size_t n = std::min(out.size(), span);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = norm[i] > 0.0 ? acc[i] / norm[i] : 0.0;
  }
  return audio::AudioBuffer(std::move(out), spec.sample_rate);
}

Eigen::MatrixXd magnitude(const Eigen::MatrixXcd& bins) {
  Eigen::MatrixXd mag(bins.rows(), bins.cols());
  const std::size_t count = static_cast<std::size_t>(bins.size());
  simd::active().magnitude(std::span<const std::complex<double>>(bins.data(), count),
                           std::span<double>(mag.data(), count));
  return mag;
}

Eigen::MatrixXd magnitude(const Spectrogram& spec) { return magnitude(spec.bins); }

Spectrogram with_magnitude(const Spectrogram& spec, const Eigen::MatrixXd& magnitudes) {
  if (magnitudes.rows() != spec.bins.rows() || magnitudes.cols() != spec.bins.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "magnitude matrix does not match spectrogram");
  }
  Spectrogram out = spec;
  for (Eigen::Index j = 0; j < spec.bins.cols(); ++j) {
    for (Eigen::Index i = 0; i < spec.bins.rows(); ++i) {
      const std::complex<double> z = spec.bins(i, j);
      const double r = std::abs(z);
      out.bins(i, j) = r > 0.0 ? z * (magnitudes(i, j) / r) : std::complex<double>(magnitudes(i, j), 0.0);
    }
  }
  return out;
}

}  // namespace tatumkit::spectral
