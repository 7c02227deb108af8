// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "tatumkit/error.hpp"
#include "tatumkit/service/commands.hpp"
#include "tatumkit/service/config.hpp"
#include "tatumkit/service/http_service.hpp"

namespace {

using tatumkit::Error;
using tatumkit::ErrorCode;
namespace svc = tatumkit::service;

// Every tunable as an optional flag so unset flags leave file values alone.
struct Flags {
  std::optional<std::string> config_file;

  std::optional<std::size_t> components;
  std::optional<long> retained;
  std::optional<std::string> basis;
  std::optional<std::size_t> window_length;
  std::optional<std::size_t> hop;

  std::optional<std::string> onset_preset;
  std::optional<double> threshold;
  std::optional<double> min_spacing;
  std::optional<std::size_t> decimation;
  std::optional<double> smoothing_ms;
  std::optional<double> loudness_ms;
  std::optional<double> min_relative_loudness;
  std::optional<double> log_floor;
  std::optional<std::string> detection;

  std::optional<double> frame_s;
  std::optional<double> decay;
  std::optional<double> histogram_rate;
  std::optional<double> max_ioi;
  std::optional<double> min_q;
  std::optional<double> tolerance;

  std::optional<int> ppq;
  std::optional<double> tempo;
  std::optional<int> note;
  std::optional<int> channel;
  std::optional<std::string> velocity_map;
};

void add_config_flag(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_file, "JSON config file (flags take precedence)")->check(CLI::ExistingFile);
}

void add_isa_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--components", f.components, "Number of separated streams")->group("Separation");
  cmd->add_option("--retained", f.retained, "Dimensions kept before rotation (0: same as components)")
      ->group("Separation");
  cmd->add_option("--basis", f.basis, "temporal or spectral")->group("Separation");
  cmd->add_option("--window-length", f.window_length, "STFT window length in samples")->group("Separation");
  cmd->add_option("--hop", f.hop, "STFT hop in samples")->group("Separation");
}

void add_onset_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--onset-preset", f.onset_preset, "default or separated")->group("Onsets");
  cmd->add_option("--threshold", f.threshold, "Peak threshold on the normalized novelty signal")->group("Onsets");
  cmd->add_option("--min-spacing", f.min_spacing, "Minimum onset spacing in seconds")->group("Onsets");
  cmd->add_option("-R,--decimation", f.decimation, "Decimation factor (0: automatic)")->group("Onsets");
  cmd->add_option("--smoothing-ms", f.smoothing_ms, "Envelope smoothing window")->group("Onsets");
  cmd->add_option("--loudness-ms", f.loudness_ms, "Loudness window")->group("Onsets");
  cmd->add_option("--min-relative-loudness", f.min_relative_loudness, "Loudness gate relative to the loudest onset")
      ->group("Onsets");
  cmd->add_option("--log-floor", f.log_floor, "Relative floor inside the log difference")->group("Onsets");
  cmd->add_option("--detection", f.detection, "rdf or fod")->group("Onsets");
}

void add_tatum_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--frame", f.frame_s, "Analysis frame in seconds")->group("Tatum");
  cmd->add_option("--decay", f.decay, "Histogram decay per frame")->group("Tatum");
  cmd->add_option("--histogram-rate", f.histogram_rate, "Histogram bins per second")->group("Tatum");
  cmd->add_option("--max-ioi", f.max_ioi, "Longest interval counted, in seconds")->group("Tatum");
  cmd->add_option("--min-q", f.min_q, "Shortest pulse considered, in seconds")->group("Tatum");
  cmd->add_option("--minima-tolerance", f.tolerance, "Relative tolerance for accepting a larger minimum")
      ->group("Tatum");
}

void add_midi_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--ppq", f.ppq, "MIDI ticks per quarter note")->group("MIDI");
  cmd->add_option("--tempo", f.tempo, "MIDI tempo in BPM")->group("MIDI");
  cmd->add_option("--note", f.note, "MIDI note number")->group("MIDI");
  cmd->add_option("--channel", f.channel, "MIDI channel 0-15")->group("MIDI");
  cmd->add_option("--velocity", f.velocity_map, "linear or fixed")->group("MIDI");
}

template <typename T>
void put(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

svc::PipelineConfig resolve(const Flags& f) {
  svc::PipelineConfig config;
  if (f.config_file) config = svc::load_config_file(*f.config_file);

  nlohmann::json top = nlohmann::json::object();
  put(top, "components", f.components);
  if (f.retained) {
    if (*f.retained < 0) throw Error(ErrorCode::InvalidConfig, "--retained must be non-negative");
    top["retained"] = *f.retained;
  }
  put(top, "basis", f.basis);
  nlohmann::json stft = nlohmann::json::object();
  put(stft, "window_length", f.window_length);
  put(stft, "hop", f.hop);
  if (!stft.empty()) top["stft"] = stft;

  nlohmann::json onsets = nlohmann::json::object();
  put(onsets, "threshold", f.threshold);
  put(onsets, "min_spacing_s", f.min_spacing);
  put(onsets, "decimation_factor", f.decimation);
  put(onsets, "smoothing_window_ms", f.smoothing_ms);
  put(onsets, "loudness_window_ms", f.loudness_ms);
  put(onsets, "min_relative_loudness", f.min_relative_loudness);
  put(onsets, "log_floor", f.log_floor);
  put(onsets, "detection", f.detection);

  nlohmann::json tatum = nlohmann::json::object();
  put(tatum, "frame_s", f.frame_s);
  put(tatum, "decay", f.decay);
  put(tatum, "histogram_rate", f.histogram_rate);
  put(tatum, "max_ioi_s", f.max_ioi);
  put(tatum, "min_q_s", f.min_q);
  put(tatum, "minima_rel_tolerance", f.tolerance);
  if (!tatum.empty()) top["tatum"] = tatum;

  nlohmann::json midi = nlohmann::json::object();
  put(midi, "ppq", f.ppq);
  put(midi, "tempo_bpm", f.tempo);
  put(midi, "note_number", f.note);
  put(midi, "channel", f.channel);
  put(midi, "velocity_map", f.velocity_map);
  if (!midi.empty()) top["midi"] = midi;

  svc::apply_json(config, top);

  // Onset flags win over the file for the shared defaults and every per-stream override.
  nlohmann::json onset_layer = nlohmann::json::object();
  if (f.onset_preset) onset_layer["preset"] = *f.onset_preset;
  svc::apply_json(config.onsets, onset_layer);
  svc::apply_json(config.onsets, onsets);
  for (auto& [index, oc] : config.stream_onsets) {
    svc::apply_json(oc, onset_layer);
    svc::apply_json(oc, onsets);
  }
  config.validate();
  return config;
}

std::string resolve_dir(const std::optional<std::string>& flag, const char* what) {
  if (flag) return *flag;
  if (const char* env = std::getenv("TATUMKIT_OUT_DIR"); env != nullptr && *env != '\0') return env;
  throw Error(ErrorCode::InvalidArgument, std::string("no ") + what + " given and TATUMKIT_OUT_DIR is unset");
}

void report(const svc::CommandOutput& out) {
  for (const auto& d : out.diagnostics) {
    std::cerr << "warning: " << tatumkit::to_string(d.code) << ": " << d.message << "\n";
  }
  for (const auto& p : out.files) std::cout << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tatumkit: source separation, onset detection and tatum estimation for percussive audio"};
  app.require_subcommand(1);
  Flags flags;

  std::string input;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> stream;
  std::optional<double> duration;
  std::string format = "midi";
  std::optional<std::string> click_sample;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::string> persist;

  auto* analyze = app.add_subcommand("analyze", "Separate, detect onsets and estimate the tatum for each stream");
  analyze->add_option("input", input, "Input WAV file")->required();
  analyze->add_option("-o,--out", out_dir, "Output directory (default: $TATUMKIT_OUT_DIR)");
  add_config_flag(analyze, flags);
  add_isa_flags(analyze, flags);
  add_onset_flags(analyze, flags);
  add_tatum_flags(analyze, flags);
  add_midi_flags(analyze, flags);

  auto* separate = app.add_subcommand("separate", "Write stream_<i>.wav for each separated stream");
  separate->add_option("input", input, "Input WAV file")->required();
  separate->add_option("-o,--out", out_dir, "Output directory (default: $TATUMKIT_OUT_DIR)");
  add_config_flag(separate, flags);
  add_isa_flags(separate, flags);

  auto* onsets = app.add_subcommand("onsets", "Detect onsets on stream WAVs in a directory");
  onsets->add_option("-d,--dir", out_dir, "Working directory (default: $TATUMKIT_OUT_DIR)");
  onsets->add_option("--stream", stream, "Only this stream index");
  add_config_flag(onsets, flags);
  add_onset_flags(onsets, flags);

  auto* tatum = app.add_subcommand("tatum", "Estimate the pulse trajectory from onset CSVs in a directory");
  tatum->add_option("-d,--dir", out_dir, "Working directory (default: $TATUMKIT_OUT_DIR)");
  tatum->add_option("--stream", stream, "Only this stream index");
  tatum->add_option("--duration", duration, "Analysis length in seconds (default: stream WAV length)");
  add_config_flag(tatum, flags);
  add_tatum_flags(tatum, flags);

  auto* render = app.add_subcommand("render", "Render onset CSVs as MIDI or click audio");
  render->add_option("-d,--dir", out_dir, "Working directory (default: $TATUMKIT_OUT_DIR)");
  render->add_option("--stream", stream, "Only this stream index");
  render->add_option("--format", format, "midi or clicks")->check(CLI::IsMember({"midi", "clicks"}));
  render->add_option("--click-sample", click_sample, "Mono WAV placed at each onset")->check(CLI::ExistingFile);
  add_config_flag(render, flags);
  add_midi_flags(render, flags);

  auto* serve = app.add_subcommand("serve", "Run the HTTP analysis service");
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--persist", persist, "Mirror every session under this directory");
  add_config_flag(serve, flags);
  add_isa_flags(serve, flags);
  add_onset_flags(serve, flags);
  add_tatum_flags(serve, flags);
  add_midi_flags(serve, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    const svc::PipelineConfig config = resolve(flags);
    if (analyze->parsed()) {
      report(svc::analyze(input, resolve_dir(out_dir, "--out"), config));
    } else if (separate->parsed()) {
      report(svc::separate_to_dir(input, resolve_dir(out_dir, "--out"), config));
    } else if (onsets->parsed()) {
      report(svc::onsets_in_dir(resolve_dir(out_dir, "--dir"), config, stream));
    } else if (tatum->parsed()) {
      report(svc::tatum_in_dir(resolve_dir(out_dir, "--dir"), config, stream, duration));
    } else if (render->parsed()) {
      const auto fmt = format == "clicks" ? svc::RenderFormat::Clicks : svc::RenderFormat::Midi;
      std::optional<std::filesystem::path> sample;
      if (click_sample) sample = *click_sample;
      report(svc::render_in_dir(resolve_dir(out_dir, "--dir"), config, fmt, stream, sample));
    } else if (serve->parsed()) {
      std::optional<std::filesystem::path> dir;
      if (persist) dir = *persist;
      svc::HttpService service(config, dir);
      const int bound = service.bind(host, port);
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
      service.listen();
    }
  } catch (const Error& e) {
    std::cerr << "error: " << tatumkit::to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
