// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tatumkit {

enum class ErrorCode {
  NotFound,
  UnsupportedFormat,
  CorruptHeader,
  IoError,
  InvalidArgument,
  InvalidConfig,
  DimensionMismatch,
  EmptyInput,
  RankDeficient,
  DegenerateContrast,
  BinningMismatch,
  InsufficientData,
  TooShort,
  InvalidFactor,
  WindowTooLong,
  EmptyHistogram,
  MissingIntermediate,
  StageOrder,
  Clipped,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception type thrown by every module. The code identifies the contract
/// violation; what() carries a human readable diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// A non-fatal condition. Operations that can degrade gracefully (rank
/// clamping, flat ICA contrast, clipping) report these instead of throwing.
struct Diagnostic {
  ErrorCode code;
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

inline bool has_diagnostic(const Diagnostics& diags, ErrorCode code) {
  for (const auto& d : diags) {
    if (d.code == code) return true;
  }
  return false;
}

}  // namespace tatumkit
