// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tatumkit/audio_io.hpp"

namespace tatumkit::spectral {

/// Raised-cosine family tapers. Hann and Hamming are sampled at half-sample
/// offsets, w[n] = a - (1 - a) cos(2 pi (n + 1/2) / N), which keeps them
/// periodic (constant overlap-add at N/2 and N/4) while avoiding the exact
/// zero at n = 0 that would make the first sample unrecoverable.
enum class WindowKind { Hann, Hamming, Rectangular };

WindowKind window_kind_from_string(std::string_view name);
std::string_view to_string(WindowKind kind);

struct StftConfig {
  std::size_t window_length = 1024;
  std::size_t hop = 512;
  WindowKind window = WindowKind::Hann;
};

std::vector<double> make_window(WindowKind kind, std::size_t length);

/// True when the shifted copies of the window sum to a constant at this hop.
bool satisfies_cola(std::span<const double> window, std::size_t hop, double tolerance = 1e-9);

/// Throws InvalidConfig for a non power-of-two window, hop outside
/// (0, window_length], or a window that is not COLA at the hop.
void validate(const StftConfig& config);

/// Frames needed to cover `length` samples: the signal is zero-padded at the
/// tail to the next frame boundary (and to one full window when shorter).
std::size_t frame_count(std::size_t length, const StftConfig& config);

struct Spectrogram {
  /// n = window_length / 2 + 1 rows (bins) by m columns (frames).
  Eigen::MatrixXcd bins;
  StftConfig config;
  std::uint32_t sample_rate = 0;
  std::size_t original_length = 0;

  Eigen::Index bin_count() const { return bins.rows(); }
  Eigen::Index frame_count() const { return bins.cols(); }
};

Spectrogram stft(std::span<const double> signal, std::uint32_t sample_rate,
                 const StftConfig& config = {});

/// Mono input required; stereo buffers should go through audio::to_mono first.
Spectrogram stft(const audio::AudioBuffer& signal, const StftConfig& config = {});

/// Weighted overlap-add inverse, normalized per sample by the summed squared
/// window, truncated to original_length.
audio::AudioBuffer istft(const Spectrogram& spec);

Eigen::MatrixXd magnitude(const Eigen::MatrixXcd& bins);
Eigen::MatrixXd magnitude(const Spectrogram& spec);

/// Copy of `spec` whose bins carry `magnitudes` with the original per-bin
/// phase. Bins with zero modulus take phase zero.
Spectrogram with_magnitude(const Spectrogram& spec, const Eigen::MatrixXd& magnitudes);

}  // namespace tatumkit::spectral
