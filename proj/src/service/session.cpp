// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "tatumkit/service/session.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>

#include "tatumkit/render.hpp"

namespace tatumkit::service {

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Created: return "created";
    case Stage::Loaded: return "loaded";
    case Stage::Separated: return "separated";
    case Stage::OnsetsReady: return "onsets_ready";
    case Stage::Interpreted: return "interpreted";
  }
  return "unknown";
}

std::string checksum(const audio::AudioBuffer& buffer) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : buffer.samples()) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::pair<double, double>> waveform_envelope(const audio::AudioBuffer& buffer,
                                                         std::size_t points) {
  if (points == 0) throw Error(ErrorCode::InvalidArgument, "points must be positive");
  if (buffer.channel_count() != 1) throw Error(ErrorCode::InvalidArgument, "waveform needs a mono stream");
  const auto x = buffer.channel(0);
  const std::size_t n = x.size();
  const std::size_t buckets = std::min(points, n);
  std::vector<std::pair<double, double>> out;
  out.reserve(buckets);
  for (std::size_t b = 0; b < buckets; ++b) {
    const std::size_t lo = b * n / buckets;
    const std::size_t hi = (b + 1) * n / buckets;
    const auto [mn, mx] = std::minmax_element(x.begin() + static_cast<std::ptrdiff_t>(lo),
                                              x.begin() + static_cast<std::ptrdiff_t>(hi));
    out.emplace_back(*mn, *mx);
  }
  return out;
}

Session::Session(std::string id, PipelineConfig defaults) : id_(std::move(id)), config_(std::move(defaults)) {}

Stage Session::stage_locked() const {
  if (!source_) return Stage::Created;
  if (streams_.empty()) return Stage::Loaded;
  bool any_onsets = false;
  for (const auto& s : streams_) {
    if (s.trajectory) return Stage::Interpreted;
    any_onsets = any_onsets || s.onsets.has_value();
  }
  return any_onsets ? Stage::OnsetsReady : Stage::Separated;
}

const StreamState& Session::stream_locked(std::size_t stream) const {
  if (streams_.empty()) throw Error(ErrorCode::StageOrder, "session has not been separated yet");
  if (stream >= streams_.size()) {
    throw Error(ErrorCode::NotFound, "stream " + std::to_string(stream) + " does not exist");
  }
  return streams_[stream];
}

void Session::load(audio::AudioBuffer audio) {
  if (audio.empty()) throw Error(ErrorCode::EmptyInput, "uploaded audio has no samples");
  audio::AudioBuffer mono = audio.channel_count() == 1 ? std::move(audio) : audio::to_mono(audio);
  std::lock_guard lock(mutex_);
  source_ = std::move(mono);
  streams_.clear();
  ++revision_;
}

void Session::separate(const separate::IsaConfig& config) {
  std::lock_guard lock(mutex_);
  if (!source_) throw Error(ErrorCode::StageOrder, "no audio uploaded for this session");
  spectral::validate(config.stft);
  separate::IsaResult result = separate::isa_separate(*source_, config);
  std::vector<StreamState> streams;
  streams.reserve(result.streams.size());
  for (auto& s : result.streams) {
    StreamState st;
    st.checksum = checksum(s.audio);
    st.stream = std::move(s);
    streams.push_back(std::move(st));
  }
  streams_ = std::move(streams);
  config_.isa = config;
  config_.stream_onsets.clear();
  ++revision_;
}

const onsets::OnsetList& Session::detect(std::size_t stream, const onsets::OnsetConfig& config) {
  onsets::validate(config);
  std::lock_guard lock(mutex_);
  stream_locked(stream);
  StreamState& st = streams_[stream];
  st.onsets = onsets::detect_onsets(st.stream.audio, config);
  st.trajectory.reset();
  config_.stream_onsets[stream] = config;
  ++revision_;
  return *st.onsets;
}

const tatum::PulseTrajectory& Session::interpret(std::size_t stream, const tatum::TatumConfig& config) {
  tatum::validate(config);
  std::lock_guard lock(mutex_);
  stream_locked(stream);
  StreamState& st = streams_[stream];
  if (!st.onsets) {
    throw Error(ErrorCode::StageOrder, "onsets for stream " + std::to_string(stream) + " have not been detected");
  }
  st.trajectory = tatum::trajectory(*st.onsets, source_->duration_s(), config);
  config_.tatum = config;
  ++revision_;
  return *st.trajectory;
}

Stage Session::stage() const {
  std::lock_guard lock(mutex_);
  return stage_locked();
}

std::uint64_t Session::revision() const {
  std::lock_guard lock(mutex_);
  return revision_;
}

std::size_t Session::stream_count() const {
  std::lock_guard lock(mutex_);
  return streams_.size();
}

PipelineConfig Session::config() const {
  std::lock_guard lock(mutex_);
  return config_;
}

audio::AudioBuffer Session::stream_audio(std::size_t stream) const {
  std::lock_guard lock(mutex_);
  return stream_locked(stream).stream.audio;
}

std::string Session::stream_checksum(std::size_t stream) const {
  std::lock_guard lock(mutex_);
  return stream_locked(stream).checksum;
}

onsets::OnsetList Session::stream_onsets(std::size_t stream) const {
  std::lock_guard lock(mutex_);
  const StreamState& st = stream_locked(stream);
  if (!st.onsets) {
    throw Error(ErrorCode::StageOrder, "onsets for stream " + std::to_string(stream) + " have not been detected");
  }
  return *st.onsets;
}

tatum::PulseTrajectory Session::stream_trajectory(std::size_t stream) const {
  std::lock_guard lock(mutex_);
  const StreamState& st = stream_locked(stream);
  if (!st.trajectory) {
    throw Error(ErrorCode::StageOrder, "no trajectory for stream " + std::to_string(stream) + " yet");
  }
  return *st.trajectory;
}

nlohmann::json Session::summary() const {
  std::lock_guard lock(mutex_);
  nlohmann::json j = {{"session_id", id_},
                      {"stage", std::string(to_string(stage_locked()))},
                      {"revision", revision_}};
  if (source_) {
    j["sample_rate"] = source_->sample_rate();
    j["frames"] = source_->frames();
    j["duration_s"] = source_->duration_s();
  }
  nlohmann::json streams = nlohmann::json::array();
  for (std::size_t i = 0; i < streams_.size(); ++i) {
    const auto& st = streams_[i];
    streams.push_back({{"index", i},
                       {"energy", st.stream.energy},
                       {"checksum", st.checksum},
                       {"has_onsets", st.onsets.has_value()},
                       {"has_trajectory", st.trajectory.has_value()}});
  }
  j["streams"] = streams;
  return j;
}

void Session::persist(const std::filesystem::path& dir) const {
  const nlohmann::json meta = summary();
  std::lock_guard lock(mutex_);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
  if (source_) audio::write_wav(*source_, dir / "source.wav", audio::SampleFormat::Float32);
  for (std::size_t i = 0; i < streams_.size(); ++i) {
    const auto& st = streams_[i];
    const std::string stem = "stream_" + std::to_string(i);
    audio::write_wav(st.stream.audio, dir / (stem + ".wav"), audio::SampleFormat::Float32);
    if (st.onsets) {
      render::write_file(dir / (stem + ".onsets.csv"), render::onsets_csv(*st.onsets));
      render::write_file(dir / (stem + ".mid"), render::to_midi(*st.onsets, config_.midi));
    }
    if (st.trajectory) {
      render::write_file(dir / (stem + ".pulse.csv"), render::trajectory_csv(*st.trajectory));
    }
  }
  nlohmann::json full = meta;
  full["config"] = to_json(config_);
  render::write_file(dir / "session.json", full.dump(2) + "\n");
}

}  // namespace tatumkit::service
