// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "tatumkit/service/commands.hpp"

#include <algorithm>
#include <regex>
#include <string_view>

#include "tatumkit/audio_io.hpp"
#include "tatumkit/onsets.hpp"
#include "tatumkit/render.hpp"
#include "tatumkit/separate.hpp"
#include "tatumkit/service/session.hpp"
#include "tatumkit/tatum.hpp"

namespace tatumkit::service {

namespace fs = std::filesystem;

namespace {

// Collects outputs in memory; commit() writes them to temporaries and only
// renames once every temporary is on disk.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string bytes) { entries_.push_back({name, std::move(bytes)}); }
  void add(const std::string& name, const std::vector<std::uint8_t>& bytes) {
    add(name, std::string(bytes.begin(), bytes.end()));
  }

  std::vector<fs::path> commit() {
    std::error_code ec;
    const bool created = !fs::exists(dir_);
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir_.string() + "': " + ec.message());
    std::vector<fs::path> temps;
    std::vector<fs::path> finals;
    try {
      for (const auto& [name, bytes] : entries_) {
        temps.push_back(dir_ / (name + ".partial"));
        render::write_file(temps.back(), bytes);
      }
      for (std::size_t i = 0; i < entries_.size(); ++i) {
        const fs::path target = dir_ / entries_[i].first;
        fs::rename(temps[i], target);
        finals.push_back(target);
      }
    } catch (...) {
      for (const auto& p : temps) fs::remove(p, ec);
      for (const auto& p : finals) fs::remove(p, ec);
      if (created) fs::remove(dir_, ec);  // only succeeds when empty
      throw;
    }
    return finals;
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::vector<std::size_t> select_streams(const fs::path& dir, const std::string& suffix,
                                        std::optional<std::size_t> stream) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::MissingIntermediate, "directory '" + dir.string() + "' does not exist");
  }
  if (stream) {
    if (!fs::exists(dir / (stream_stem(*stream) + suffix))) {
      throw Error(ErrorCode::MissingIntermediate,
                  "missing " + (dir / (stream_stem(*stream) + suffix)).string());
    }
    return {*stream};
  }
  auto found = discover_streams(dir, suffix);
  if (found.empty()) {
    throw Error(ErrorCode::MissingIntermediate, "no stream_*" + suffix + " files in '" + dir.string() + "'");
  }
  return found;
}

audio::AudioBuffer read_input(const fs::path& input) {
  return audio::to_mono(audio::read_wav(input));
}

separate::IsaResult run_separation(const audio::AudioBuffer& mono, const PipelineConfig& config,
                                   CommandOutput& out) {
  separate::IsaResult result = separate::isa_separate(mono, config.isa);
  out.diagnostics.insert(out.diagnostics.end(), result.diagnostics.begin(), result.diagnostics.end());
  return result;
}

}  // namespace

std::string stream_stem(std::size_t index) { return "stream_" + std::to_string(index); }

std::vector<std::size_t> discover_streams(const fs::path& dir, const std::string& suffix) {
  std::vector<std::size_t> found;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return found;
  const std::regex pattern("stream_(0|[1-9][0-9]{0,8})" + std::regex_replace(suffix, std::regex(R"([.])"), R"(\.)"));
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) found.push_back(std::stoul(m[1].str()));
  }
  std::sort(found.begin(), found.end());
  return found;
}

CommandOutput separate_to_dir(const fs::path& input, const fs::path& out_dir, const PipelineConfig& config) {
  config.validate();
  CommandOutput out;
  const auto mono = read_input(input);
  const auto result = run_separation(mono, config, out);
  OutputSet files(out_dir);
  for (std::size_t i = 0; i < result.streams.size(); ++i) {
    files.add(stream_stem(i) + ".wav", audio::encode_wav(result.streams[i].audio, audio::SampleFormat::Float32));
  }
  out.files = files.commit();
  return out;
}

CommandOutput analyze(const fs::path& input, const fs::path& out_dir, const PipelineConfig& config) {
  config.validate();
  CommandOutput out;
  const auto mono = read_input(input);
  const auto result = run_separation(mono, config, out);
  const double duration = mono.duration_s();

  OutputSet files(out_dir);
  nlohmann::json streams = nlohmann::json::array();
  for (std::size_t i = 0; i < result.streams.size(); ++i) {
    const auto& s = result.streams[i];
    const std::string stem = stream_stem(i);
    const auto found = onsets::detect_onsets(s.audio, config.onsets_for(i));
    const auto traj = tatum::trajectory(found, duration, config.tatum);
    files.add(stem + ".wav", audio::encode_wav(s.audio, audio::SampleFormat::Float32));
    files.add(stem + ".onsets.csv", render::onsets_csv(found));
    files.add(stem + ".pulse.csv", render::trajectory_csv(traj));
    files.add(stem + ".mid", render::to_midi(found, config.midi));

    nlohmann::json last = nullptr;
    for (auto it = traj.pulse_s.rbegin(); it != traj.pulse_s.rend(); ++it) {
      if (*it) {
        last = **it;
        break;
      }
    }
    streams.push_back({{"index", i},
                       {"energy", s.energy},
                       {"checksum", checksum(s.audio)},
                       {"onset_count", found.size()},
                       {"estimate_count", traj.estimate_count()},
                       {"final_pulse_s", last}});
  }
  nlohmann::json summary = {{"input_checksum", checksum(mono)},
                            {"sample_rate", mono.sample_rate()},
                            {"duration_s", duration},
                            {"config", to_json(config)},
                            {"streams", streams}};
  files.add("analysis.json", summary.dump(2) + "\n");
  out.files = files.commit();
  return out;
}

CommandOutput onsets_in_dir(const fs::path& dir, const PipelineConfig& config, std::optional<std::size_t> stream) {
  config.validate();
  CommandOutput out;
  OutputSet files(dir);
  for (std::size_t i : select_streams(dir, ".wav", stream)) {
    const auto audio = audio::to_mono(audio::read_wav(dir / (stream_stem(i) + ".wav")));
    files.add(stream_stem(i) + ".onsets.csv", render::onsets_csv(onsets::detect_onsets(audio, config.onsets_for(i))));
  }
  out.files = files.commit();
  return out;
}

CommandOutput tatum_in_dir(const fs::path& dir, const PipelineConfig& config, std::optional<std::size_t> stream,
                           std::optional<double> duration_s) {
  config.validate();
  if (duration_s && !(*duration_s >= 0.0)) throw Error(ErrorCode::InvalidArgument, "duration must be non-negative");
  CommandOutput out;
  OutputSet files(dir);
  for (std::size_t i : select_streams(dir, ".onsets.csv", stream)) {
    const std::string stem = stream_stem(i);
    const auto found = render::parse_onsets_csv(render::read_file(dir / (stem + ".onsets.csv")));
    double duration = 0.0;
    if (duration_s) {
      duration = *duration_s;
    } else if (fs::exists(dir / (stem + ".wav"))) {
      duration = audio::read_wav(dir / (stem + ".wav")).duration_s();
    } else {
      throw Error(ErrorCode::MissingIntermediate,
                  "missing " + (dir / (stem + ".wav")).string() + " for the analysis length; pass a duration");
    }
    files.add(stem + ".pulse.csv", render::trajectory_csv(tatum::trajectory(found, duration, config.tatum)));
  }
  out.files = files.commit();
  return out;
}

CommandOutput render_in_dir(const fs::path& dir, const PipelineConfig& config, RenderFormat format,
                            std::optional<std::size_t> stream, const std::optional<fs::path>& click_sample) {
  config.validate();
  CommandOutput out;
  std::optional<audio::AudioBuffer> sample;
  if (click_sample) sample = audio::to_mono(audio::read_wav(*click_sample));
  OutputSet files(dir);
  for (std::size_t i : select_streams(dir, ".onsets.csv", stream)) {
    const std::string stem = stream_stem(i);
    const auto found = render::parse_onsets_csv(render::read_file(dir / (stem + ".onsets.csv")));
    if (format == RenderFormat::Midi) {
      files.add(stem + ".mid", render::to_midi(found, config.midi));
      continue;
    }
    const fs::path wav = dir / (stem + ".wav");
    if (!fs::exists(wav)) throw Error(ErrorCode::MissingIntermediate, "missing " + wav.string());
    const auto source = audio::read_wav(wav);
    const auto click = sample ? *sample : render::make_click(source.sample_rate());
    const auto clicks = render::render_clicks(found, click, source.duration_s(), source.sample_rate(), &out.diagnostics);
    files.add(stem + ".clicks.wav", audio::encode_wav(clicks, audio::SampleFormat::Float32));
  }
  out.files = files.commit();
  return out;
}

}  // namespace tatumkit::service
