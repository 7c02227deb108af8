// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace tatumkit::audio {

/// Uniformly sampled PCM signal. Channels are stored planar: all of channel
/// 0, then all of channel 1. Amplitudes are nominally in [-1, 1].
class AudioBuffer {
 public:
  AudioBuffer() = default;

  /// Mono buffer.
  AudioBuffer(std::vector<double> samples, std::uint32_t sample_rate);

  /// Planar multi-channel buffer; samples.size() must be a multiple of channels.
  AudioBuffer(std::vector<double> samples, std::uint32_t sample_rate, std::uint16_t channels);

  std::uint32_t sample_rate() const noexcept { return sample_rate_; }
  std::uint16_t channel_count() const noexcept { return channels_; }
  std::size_t frames() const noexcept { return channels_ ? samples_.size() / channels_ : 0; }
  bool empty() const noexcept { return samples_.empty(); }
  double duration_s() const noexcept {
    return sample_rate_ ? static_cast<double>(frames()) / sample_rate_ : 0.0;
  }

  std::span<const double> channel(std::size_t c) const;
  std::span<double> channel(std::size_t c);

  const std::vector<double>& samples() const noexcept { return samples_; }

 private:
  std::vector<double> samples_;
  std::uint32_t sample_rate_ = 0;
  std::uint16_t channels_ = 1;
};

enum class SampleFormat { Pcm16, Float32 };

AudioBuffer read_wav(const std::filesystem::path& path);

/// Parse an in-memory RIFF/WAVE image (used for HTTP uploads).
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);

void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
               SampleFormat format = SampleFormat::Pcm16);

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer,
                                     SampleFormat format = SampleFormat::Pcm16);

/// Stereo is averaged per sample, (L + R) / 2. Mono input is returned as is.
AudioBuffer to_mono(const AudioBuffer& buffer);

}  // namespace tatumkit::audio
