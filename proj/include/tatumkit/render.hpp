// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tatumkit/audio_io.hpp"
#include "tatumkit/error.hpp"
#include "tatumkit/onsets.hpp"
#include "tatumkit/tatum.hpp"

namespace tatumkit::render {

enum class VelocityMap {
  Linear,  // clamp(round(127 * loudness / max), 1, 127)
  Fixed,
};

struct MidiRenderConfig {
  std::uint16_t ppq = 480;
  double tempo_bpm = 120.0;
  std::uint8_t note_number = 38;
  std::uint8_t channel = 9;
  std::uint32_t note_length_ticks = 60;
  VelocityMap velocity_map = VelocityMap::Linear;
  std::uint8_t fixed_velocity = 100;
};

void validate(const MidiRenderConfig& config);

std::uint32_t time_to_tick(double time_s, const MidiRenderConfig& config);
std::vector<std::uint8_t> velocities(const onsets::OnsetList& onsets, const MidiRenderConfig& config);

/// Format-0 file: tempo meta event, one note on/off pair per onset, end of
/// track. Each note is cut short at the next onset so notes never overlap.
std::vector<std::uint8_t> to_midi(const onsets::OnsetList& onsets, const MidiRenderConfig& config = {});

/// A short decaying sine, handy as a default click.
audio::AudioBuffer make_click(std::uint32_t sample_rate, double frequency_hz = 1500.0,
                              double length_s = 0.03);

/// Output has exactly round(duration_s * sample_rate) samples. Placements
/// are scaled by loudness relative to the loudest onset and summed; the
/// result is clipped to [-1, 1] with a Clipped diagnostic.
audio::AudioBuffer render_clicks(const onsets::OnsetList& onsets, const audio::AudioBuffer& sample,
                                 double duration_s, std::uint32_t sample_rate,
                                 Diagnostics* diagnostics = nullptr);

std::string onsets_csv(const onsets::OnsetList& onsets);
std::string trajectory_csv(const tatum::PulseTrajectory& trajectory);

/// Inverse of the writers above. Throws InvalidArgument on malformed text.
onsets::OnsetList parse_onsets_csv(std::string_view text);
tatum::PulseTrajectory parse_trajectory_csv(std::string_view text);

/// Writes bytes verbatim. Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view bytes);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace tatumkit::render
