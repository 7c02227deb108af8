// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "tatumkit/error.hpp"

namespace tatumkit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptHeader: return "CorruptHeader";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DegenerateContrast: return "DegenerateContrast";
    case ErrorCode::BinningMismatch: return "BinningMismatch";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::InvalidFactor: return "InvalidFactor";
    case ErrorCode::WindowTooLong: return "WindowTooLong";
    case ErrorCode::EmptyHistogram: return "EmptyHistogram";
    case ErrorCode::MissingIntermediate: return "MissingIntermediate";
    case ErrorCode::StageOrder: return "StageOrder";
    case ErrorCode::Clipped: return "Clipped";
  }
  return "Unknown";
}

}  // namespace tatumkit
