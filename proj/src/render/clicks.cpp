// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tatumkit/render.hpp"

namespace tatumkit::render {

audio::AudioBuffer make_click(std::uint32_t sample_rate, double frequency_hz, double length_s) {
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(length_s * sample_rate)));
  const double tau = length_s / 5.0;
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    s[i] = 0.8 * std::exp(-t / tau) * std::sin(2.0 * std::numbers::pi * frequency_hz * t);
  }
  return audio::AudioBuffer(std::move(s), sample_rate);
}

audio::AudioBuffer render_clicks(const onsets::OnsetList& onsets, const audio::AudioBuffer& sample,
                                 double duration_s, std::uint32_t sample_rate,
                                 Diagnostics* diagnostics) {
  if (sample.empty() || sample.channel_count() != 1) {
    throw Error(ErrorCode::InvalidArgument, "click sample must be a non-empty mono buffer");
  }
  if (sample_rate == 0 || !(duration_s >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "duration and sample rate must be valid");
  }
  const auto length = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  std::vector<double> out(length, 0.0);
  const auto src = sample.channel(0);

  double loudest = 0.0;
  for (double l : onsets.loudness) loudest = std::max(loudest, l);

  for (std::size_t i = 0; i < onsets.times.size(); ++i) {
    const long long start = std::llround(onsets.times[i] * sample_rate);
    if (start < 0 || static_cast<std::size_t>(start) >= length) continue;
    const double gain = loudest > 0.0 && i < onsets.loudness.size() ? onsets.loudness[i] / loudest : 1.0;
    const std::size_t n = std::min(src.size(), length - static_cast<std::size_t>(start));
    for (std::size_t j = 0; j < n; ++j) out[static_cast<std::size_t>(start) + j] += gain * src[j];
  }

  std::size_t clipped = 0;
  for (double& v : out) {
    if (v > 1.0 || v < -1.0) {
      v = std::clamp(v, -1.0, 1.0);
      ++clipped;
    }
  }
  if (clipped > 0 && diagnostics != nullptr) {
    diagnostics->push_back({ErrorCode::Clipped, std::to_string(clipped) + " samples clipped to [-1, 1]"});
  }
  return audio::AudioBuffer(std::move(out), sample_rate);
}

}  // namespace tatumkit::render
