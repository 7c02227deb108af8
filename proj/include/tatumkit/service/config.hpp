// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>

#include "json.hpp"

#include "tatumkit/onsets.hpp"
#include "tatumkit/render.hpp"
#include "tatumkit/separate.hpp"
#include "tatumkit/spectral.hpp"
#include "tatumkit/tatum.hpp"

namespace tatumkit::service {

/// Every tunable of the pipeline in one place. Layers apply in the order
/// built-ins, config file, command-line flags / request bodies.
struct PipelineConfig {
  separate::IsaConfig isa;
  onsets::OnsetConfig onsets;
  std::map<std::size_t, onsets::OnsetConfig> stream_onsets;  // per-stream overrides
  tatum::TatumConfig tatum;
  render::MidiRenderConfig midi;

  const onsets::OnsetConfig& onsets_for(std::size_t stream) const;
  void validate() const;
};

nlohmann::json to_json(const spectral::StftConfig& c);
nlohmann::json to_json(const onsets::OnsetConfig& c);
nlohmann::json to_json(const tatum::TatumConfig& c);
nlohmann::json to_json(const render::MidiRenderConfig& c);
nlohmann::json to_json(const PipelineConfig& c);

/// Overlay the keys present in `j`; absent keys keep their current value.
/// Unknown keys and wrongly typed values throw InvalidConfig.
void apply_json(spectral::StftConfig& c, const nlohmann::json& j);
void apply_json(onsets::OnsetConfig& c, const nlohmann::json& j);
void apply_json(tatum::TatumConfig& c, const nlohmann::json& j);
void apply_json(render::MidiRenderConfig& c, const nlohmann::json& j);
void apply_json(PipelineConfig& c, const nlohmann::json& j);

/// Throws NotFound / InvalidConfig.
PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base = {});

}  // namespace tatumkit::service
