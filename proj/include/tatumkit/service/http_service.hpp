// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>

#include "tatumkit/service/config.hpp"
#include "tatumkit/service/session.hpp"

namespace tatumkit::service {

/// In-memory sessions keyed by an opaque id, optionally mirrored to
/// <persist_dir>/<id>/ after every mutation.
class SessionStore {
 public:
  explicit SessionStore(PipelineConfig defaults,
                        std::optional<std::filesystem::path> persist_dir = std::nullopt);

  std::shared_ptr<Session> create();
  /// Throws NotFound.
  std::shared_ptr<Session> find(const std::string& id) const;
  std::size_t size() const;
  void persist(const Session& session) const;
  const PipelineConfig& defaults() const noexcept { return defaults_; }

 private:
  PipelineConfig defaults_;
  std::optional<std::filesystem::path> persist_dir_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mt19937_64 rng_;
};

/// HTTP status for a module error.
int http_status(ErrorCode code);

/// JSON-over-HTTP front end for a SessionStore.
///
///   POST /sessions                               body: WAV bytes or empty
///   PUT  /sessions/{id}/audio                    body: WAV bytes
///   GET  /sessions/{id}
///   POST /sessions/{id}/separate                 {components, retained, basis, stft}
///   GET  /sessions/{id}/streams/{i}/waveform     ?points=N
///   POST /sessions/{id}/streams/{i}/onsets       onset config keys
///   GET  /sessions/{id}/streams/{i}/onsets
///   POST /sessions/{id}/streams/{i}/tatum        {config: {...}} or tatum keys
///   GET  /sessions/{id}/streams/{i}/trajectory
///   GET  /sessions/{id}/streams/{i}/export       ?format=midi|wav|csv|clicks[&what=onsets|trajectory]
class HttpService {
 public:
  explicit HttpService(PipelineConfig defaults,
                       std::optional<std::filesystem::path> persist_dir = std::nullopt);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Returns the bound port; port 0 picks a free one. Throws IoError.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();
  /// Blocks until the server accepts connections.
  void wait_until_ready() const;

  SessionStore& store() noexcept { return store_; }

 private:
  struct Impl;
  SessionStore store_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tatumkit::service
