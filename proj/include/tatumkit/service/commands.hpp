// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tatumkit/error.hpp"
#include "tatumkit/service/config.hpp"

// File-based pipeline stages. Every stage reads and writes plain files in one
// directory, named stream_<i>.wav, stream_<i>.onsets.csv, stream_<i>.pulse.csv
// and stream_<i>.mid. Outputs of a stage appear all together or not at all.
namespace tatumkit::service {

struct CommandOutput {
  std::vector<std::filesystem::path> files;  // in write order
  Diagnostics diagnostics;
};

std::string stream_stem(std::size_t index);

/// Stream indices i for which `dir`/stream_<i><suffix> exists, ascending.
std::vector<std::size_t> discover_streams(const std::filesystem::path& dir, const std::string& suffix);

/// Separation, onsets and tatum for every stream, plus analysis.json.
CommandOutput analyze(const std::filesystem::path& input, const std::filesystem::path& out_dir,
                      const PipelineConfig& config);

CommandOutput separate_to_dir(const std::filesystem::path& input, const std::filesystem::path& out_dir,
                              const PipelineConfig& config);

/// Reads stream_<i>.wav. Without `stream` every stream in the directory is processed.
CommandOutput onsets_in_dir(const std::filesystem::path& dir, const PipelineConfig& config,
                            std::optional<std::size_t> stream = std::nullopt);

/// Reads stream_<i>.onsets.csv. The analysis length comes from `duration_s`
/// or else from stream_<i>.wav; with neither available MissingIntermediate
/// is thrown.
CommandOutput tatum_in_dir(const std::filesystem::path& dir, const PipelineConfig& config,
                           std::optional<std::size_t> stream = std::nullopt,
                           std::optional<double> duration_s = std::nullopt);

enum class RenderFormat { Midi, Clicks };

/// Midi writes stream_<i>.mid; Clicks writes stream_<i>.clicks.wav using
/// `click_sample` (a synthetic click when absent) at the stream's rate and length.
CommandOutput render_in_dir(const std::filesystem::path& dir, const PipelineConfig& config,
                            RenderFormat format, std::optional<std::size_t> stream = std::nullopt,
                            const std::optional<std::filesystem::path>& click_sample = std::nullopt);

}  // namespace tatumkit::service
