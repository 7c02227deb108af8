// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "tatumkit/service/config.hpp"

#include <fstream>
#include <functional>
#include <string>
#include <unordered_map>

namespace tatumkit::service {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

double number(const json& v, const std::string& key) {
  if (!v.is_number()) bad("'" + key + "' must be a number");
  return v.get<double>();
}

std::size_t count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) bad("'" + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

std::string text(const json& v, const std::string& key) {
  if (!v.is_string()) bad("'" + key + "' must be a string");
  return v.get<std::string>();
}

using Setter = std::function<void(const json&)>;

void overlay(const json& j, const char* what, const std::unordered_map<std::string, Setter>& setters) {
  if (j.is_null()) return;
  if (!j.is_object()) bad(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) bad("unknown " + std::string(what) + " key '" + key + "'");
    it->second(value);
  }
}

template <typename T>
T bounded(std::size_t v, const std::string& key, std::size_t hi) {
  if (v > hi) bad("'" + key + "' exceeds " + std::to_string(hi));
  return static_cast<T>(v);
}

}  // namespace

const onsets::OnsetConfig& PipelineConfig::onsets_for(std::size_t stream) const {
  const auto it = stream_onsets.find(stream);
  return it == stream_onsets.end() ? onsets : it->second;
}

void PipelineConfig::validate() const {
  spectral::validate(isa.stft);
  if (isa.components < 1) bad("components must be at least 1");
  if (isa.retained < 0) bad("retained must be non-negative");
  onsets::validate(onsets);
  for (const auto& [index, c] : stream_onsets) onsets::validate(c);
  tatum::validate(tatum);
  render::validate(midi);
}

json to_json(const spectral::StftConfig& c) {
  return {{"window_length", c.window_length},
          {"hop", c.hop},
          {"window", std::string(spectral::to_string(c.window))}};
}

json to_json(const onsets::OnsetConfig& c) {
  return {{"decimation_factor", c.decimation_factor},
          {"smoothing_window_ms", c.smoothing_window_ms},
          {"threshold", c.threshold},
          {"min_spacing_s", c.min_spacing_s},
          {"loudness_window_ms", c.loudness_window_ms},
          {"min_relative_loudness", c.min_relative_loudness},
          {"log_floor", c.log_floor},
          {"detection", onsets::to_string(c.detection)}};
}

json to_json(const tatum::TatumConfig& c) {
  return {{"frame_s", c.frame_s},
          {"decay", c.decay},
          {"histogram_rate", c.histogram_rate},
          {"max_ioi_s", c.max_ioi_s},
          {"min_q_s", c.min_q_s},
          {"minima_rel_tolerance", c.minima_rel_tolerance}};
}

json to_json(const render::MidiRenderConfig& c) {
  return {{"ppq", c.ppq},
          {"tempo_bpm", c.tempo_bpm},
          {"note_number", c.note_number},
          {"channel", c.channel},
          {"note_length_ticks", c.note_length_ticks},
          {"velocity_map", c.velocity_map == render::VelocityMap::Linear ? "linear" : "fixed"},
          {"fixed_velocity", c.fixed_velocity}};
}

json to_json(const PipelineConfig& c) {
  json per_stream = json::object();
  for (const auto& [index, oc] : c.stream_onsets) per_stream[std::to_string(index)] = to_json(oc);
  return {{"components", c.isa.components},
          {"retained", c.isa.retained},
          {"basis", c.isa.basis == separate::IsaBasis::Temporal ? "temporal" : "spectral"},
          {"stft", to_json(c.isa.stft)},
          {"onsets", to_json(c.onsets)},
          {"stream_onsets", per_stream},
          {"tatum", to_json(c.tatum)},
          {"midi", to_json(c.midi)}};
}

void apply_json(spectral::StftConfig& c, const json& j) {
  overlay(j, "stft", {
      {"window_length", [&](const json& v) { c.window_length = count(v, "window_length"); }},
      {"hop", [&](const json& v) { c.hop = count(v, "hop"); }},
      {"window", [&](const json& v) { c.window = spectral::window_kind_from_string(text(v, "window")); }},
  });
}

void apply_json(onsets::OnsetConfig& c, const json& j) {
  overlay(j, "onsets", {
      {"decimation_factor", [&](const json& v) { c.decimation_factor = count(v, "decimation_factor"); }},
      {"R", [&](const json& v) { c.decimation_factor = count(v, "R"); }},
      {"smoothing_window_ms", [&](const json& v) { c.smoothing_window_ms = number(v, "smoothing_window_ms"); }},
      {"threshold", [&](const json& v) { c.threshold = number(v, "threshold"); }},
      {"min_spacing_s", [&](const json& v) { c.min_spacing_s = number(v, "min_spacing_s"); }},
      {"loudness_window_ms", [&](const json& v) { c.loudness_window_ms = number(v, "loudness_window_ms"); }},
      {"min_relative_loudness", [&](const json& v) { c.min_relative_loudness = number(v, "min_relative_loudness"); }},
      {"log_floor", [&](const json& v) { c.log_floor = number(v, "log_floor"); }},
      {"detection", [&](const json& v) { c.detection = onsets::detection_from_string(text(v, "detection")); }},
      {"preset", [&](const json& v) {
         const std::string name = text(v, "preset");
         if (name == "separated") {
           c = onsets::separated_stream_preset();
         } else if (name == "default") {
           c = onsets::OnsetConfig{};
         } else {
           bad("unknown onset preset '" + name + "'");
         }
       }},
  });
}

void apply_json(tatum::TatumConfig& c, const json& j) {
  overlay(j, "tatum", {
      {"frame_s", [&](const json& v) { c.frame_s = number(v, "frame_s"); }},
      {"decay", [&](const json& v) { c.decay = number(v, "decay"); }},
      {"histogram_rate", [&](const json& v) { c.histogram_rate = number(v, "histogram_rate"); }},
      {"max_ioi_s", [&](const json& v) { c.max_ioi_s = number(v, "max_ioi_s"); }},
      {"min_q_s", [&](const json& v) { c.min_q_s = number(v, "min_q_s"); }},
      {"minima_rel_tolerance", [&](const json& v) { c.minima_rel_tolerance = number(v, "minima_rel_tolerance"); }},
  });
}

void apply_json(render::MidiRenderConfig& c, const json& j) {
  overlay(j, "midi", {
      {"ppq", [&](const json& v) { c.ppq = bounded<std::uint16_t>(count(v, "ppq"), "ppq", 0x7FFF); }},
      {"tempo_bpm", [&](const json& v) { c.tempo_bpm = number(v, "tempo_bpm"); }},
      {"note_number", [&](const json& v) { c.note_number = bounded<std::uint8_t>(count(v, "note_number"), "note_number", 127); }},
      {"channel", [&](const json& v) { c.channel = bounded<std::uint8_t>(count(v, "channel"), "channel", 15); }},
      {"note_length_ticks", [&](const json& v) { c.note_length_ticks = bounded<std::uint32_t>(count(v, "note_length_ticks"), "note_length_ticks", 0x0FFFFFFF); }},
      {"velocity_map", [&](const json& v) {
         const std::string name = text(v, "velocity_map");
         if (name == "linear") {
           c.velocity_map = render::VelocityMap::Linear;
         } else if (name == "fixed") {
           c.velocity_map = render::VelocityMap::Fixed;
         } else {
           bad("unknown velocity_map '" + name + "'");
         }
       }},
      {"fixed_velocity", [&](const json& v) { c.fixed_velocity = bounded<std::uint8_t>(count(v, "fixed_velocity"), "fixed_velocity", 127); }},
  });
}

void apply_json(PipelineConfig& c, const json& j) {
  overlay(j, "config", {
      {"components", [&](const json& v) { c.isa.components = count(v, "components"); }},
      {"retained", [&](const json& v) { c.isa.retained = static_cast<Eigen::Index>(count(v, "retained")); }},
      {"basis", [&](const json& v) {
         const std::string name = text(v, "basis");
         if (name == "temporal") {
           c.isa.basis = separate::IsaBasis::Temporal;
         } else if (name == "spectral") {
           c.isa.basis = separate::IsaBasis::Spectral;
         } else {
           bad("unknown basis '" + name + "'");
         }
       }},
      {"stft", [&](const json& v) { apply_json(c.isa.stft, v); }},
      {"onsets", [&](const json& v) { apply_json(c.onsets, v); }},
      {"stream_onsets", [&](const json& v) {
         if (!v.is_object()) bad("stream_onsets must map stream indices to objects");
         for (const auto& [key, value] : v.items()) {
           std::size_t index = 0;
           try {
             std::size_t used = 0;
             index = std::stoul(key, &used);
             if (used != key.size()) throw std::invalid_argument(key);
           } catch (const std::exception&) {
             bad("stream_onsets key '" + key + "' is not a stream index");
           }
           auto [it, inserted] = c.stream_onsets.try_emplace(index, c.onsets);
           apply_json(it->second, value);
         }
       }},
      {"tatum", [&](const json& v) { apply_json(c.tatum, v); }},
      {"midi", [&](const json& v) { apply_json(c.midi, v); }},
  });
}

PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    bad("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  apply_json(base, j);
  base.validate();
  return base;
}

}  // namespace tatumkit::service
