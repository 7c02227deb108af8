// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tatumkit/audio_io.hpp"
#include "tatumkit/onsets.hpp"
#include "tatumkit/separate.hpp"
#include "tatumkit/service/config.hpp"
#include "tatumkit/tatum.hpp"

namespace tatumkit::service {

enum class Stage { Created, Loaded, Separated, OnsetsReady, Interpreted };

std::string_view to_string(Stage stage);

/// 64-bit FNV-1a over the little-endian bytes of the samples, as 16 hex digits.
std::string checksum(const audio::AudioBuffer& buffer);

/// Min/max pairs over `points` equal buckets; fewer when the stream is shorter.
std::vector<std::pair<double, double>> waveform_envelope(const audio::AudioBuffer& buffer,
                                                         std::size_t points);

struct StreamState {
  separate::SeparatedStream stream;
  std::string checksum;
  std::optional<onsets::OnsetList> onsets;
  std::optional<tatum::PulseTrajectory> trajectory;
};

/// One analysis in progress. Mutations take the session lock; results of a
/// stage are only reachable after that stage ran. Stage-order violations
/// throw StageOrder, bad stream indices NotFound.
class Session {
 public:
  Session(std::string id, PipelineConfig defaults);

  const std::string& id() const noexcept { return id_; }

  void load(audio::AudioBuffer audio);
  void separate(const separate::IsaConfig& config);
  const onsets::OnsetList& detect(std::size_t stream, const onsets::OnsetConfig& config);
  const tatum::PulseTrajectory& interpret(std::size_t stream, const tatum::TatumConfig& config);

  Stage stage() const;
  std::uint64_t revision() const;
  std::size_t stream_count() const;

  /// Copies taken under the lock.
  PipelineConfig config() const;
  audio::AudioBuffer stream_audio(std::size_t stream) const;
  std::string stream_checksum(std::size_t stream) const;
  onsets::OnsetList stream_onsets(std::size_t stream) const;
  tatum::PulseTrajectory stream_trajectory(std::size_t stream) const;
  nlohmann::json summary() const;

  /// Writes source and every available result under `dir`.
  void persist(const std::filesystem::path& dir) const;

 private:
  Stage stage_locked() const;
  const StreamState& stream_locked(std::size_t stream) const;

  mutable std::mutex mutex_;
  std::string id_;
  PipelineConfig config_;
  std::optional<audio::AudioBuffer> source_;
  std::vector<StreamState> streams_;
  std::uint64_t revision_ = 0;
};

}  // namespace tatumkit::service
