// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "tatumkit/render.hpp"

namespace tatumkit::render {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_vlq(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::uint8_t buf[5];
  int n = 0;
  buf[n++] = static_cast<std::uint8_t>(v & 0x7F);
  while ((v >>= 7) != 0) buf[n++] = static_cast<std::uint8_t>(0x80 | (v & 0x7F));
  while (n > 0) out.push_back(buf[--n]);
}

struct Event {
  std::uint32_t tick;
  int order;  // note-offs sort ahead of note-ons on the same tick
  std::uint8_t status;
  std::uint8_t data1;
  std::uint8_t data2;
};

}  // namespace

void validate(const MidiRenderConfig& c) {
  if (c.ppq == 0 || c.ppq > 0x7FFF) throw Error(ErrorCode::InvalidConfig, "ppq must lie in [1, 32767]");
  if (!(c.tempo_bpm > 0.0)) throw Error(ErrorCode::InvalidConfig, "tempo_bpm must be positive");
  const double us_per_beat = 60e6 / c.tempo_bpm;
  if (us_per_beat >= 16777216.0 || us_per_beat < 1.0) {
    throw Error(ErrorCode::InvalidConfig, "tempo_bpm out of the representable range");
  }
  if (c.note_number > 127) throw Error(ErrorCode::InvalidConfig, "note_number must lie in [0, 127]");
  if (c.channel > 15) throw Error(ErrorCode::InvalidConfig, "channel must lie in [0, 15]");
  if (c.note_length_ticks == 0) throw Error(ErrorCode::InvalidConfig, "note_length_ticks must be positive");
  if (c.fixed_velocity < 1 || c.fixed_velocity > 127) {
    throw Error(ErrorCode::InvalidConfig, "fixed_velocity must lie in [1, 127]");
  }
}

std::uint32_t time_to_tick(double time_s, const MidiRenderConfig& config) {
  const double ticks = std::max(0.0, time_s) * config.tempo_bpm / 60.0 * config.ppq;
  return static_cast<std::uint32_t>(std::llround(ticks));
}

std::vector<std::uint8_t> velocities(const onsets::OnsetList& onsets, const MidiRenderConfig& config) {
  std::vector<std::uint8_t> out(onsets.size(), config.fixed_velocity);
  if (config.velocity_map == VelocityMap::Fixed) return out;
  double loudest = 0.0;
  for (double l : onsets.loudness) loudest = std::max(loudest, l);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (loudest <= 0.0) {
      out[i] = 127;
      continue;
    }
    const double v = std::round(127.0 * onsets.loudness[i] / loudest);
    out[i] = static_cast<std::uint8_t>(std::clamp(v, 1.0, 127.0));
  }
  return out;
}

std::vector<std::uint8_t> to_midi(const onsets::OnsetList& onsets, const MidiRenderConfig& config) {
  validate(config);
  if (onsets.loudness.size() != onsets.times.size()) {
    throw Error(ErrorCode::DimensionMismatch, "onset times and loudness differ in length");
  }
  const std::vector<std::uint8_t> vel = velocities(onsets, config);
  const auto on_status = static_cast<std::uint8_t>(0x90 | config.channel);
  const auto off_status = static_cast<std::uint8_t>(0x80 | config.channel);

  std::vector<std::uint32_t> ticks(onsets.size());
  for (std::size_t i = 0; i < ticks.size(); ++i) ticks[i] = time_to_tick(onsets.times[i], config);

  std::vector<Event> events;
  events.reserve(2 * ticks.size());
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    std::uint32_t off = ticks[i] + config.note_length_ticks;
    if (i + 1 < ticks.size()) off = std::min(off, std::max(ticks[i], ticks[i + 1]));
    events.push_back({ticks[i], 1, on_status, config.note_number, vel[i]});
    events.push_back({off, 0, off_status, config.note_number, 0});
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return std::tie(a.tick, a.order) < std::tie(b.tick, b.order);
  });

  std::vector<std::uint8_t> track;
  put_vlq(track, 0);
  const auto tempo = static_cast<std::uint32_t>(std::llround(60e6 / config.tempo_bpm));
  track.insert(track.end(), {0xFF, 0x51, 0x03, static_cast<std::uint8_t>(tempo >> 16),
                             static_cast<std::uint8_t>(tempo >> 8), static_cast<std::uint8_t>(tempo)});
  std::uint32_t now = 0;
  for (const Event& e : events) {
    put_vlq(track, e.tick - now);
    now = e.tick;
    track.insert(track.end(), {e.status, e.data1, e.data2});
  }
  put_vlq(track, 0);
  track.insert(track.end(), {0xFF, 0x2F, 0x00});

  std::vector<std::uint8_t> out{'M', 'T', 'h', 'd'};
  put_u32(out, 6);
  put_u16(out, 0);
  put_u16(out, 1);
  put_u16(out, config.ppq);
  out.insert(out.end(), {'M', 'T', 'r', 'k'});
  put_u32(out, static_cast<std::uint32_t>(track.size()));
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

}  // namespace tatumkit::render
