// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tatumkit/error.hpp"
#include "tatumkit/onsets.hpp"

// Lowest-level pulse estimation from inter-onset intervals.
namespace tatumkit::tatum {

struct TatumConfig {
  double frame_s = 0.5;
  double decay = 0.8;
  double histogram_rate = 1000.0;  // bins per second
  double max_ioi_s = 1.0;
  double min_q_s = 0.05;
  double minima_rel_tolerance = 0.15;

  std::size_t bin_count() const;
  double bin_width() const { return 1.0 / histogram_rate; }
};

void validate(const TatumConfig& config);

std::uint64_t exact_gcd(std::span<const std::uint64_t> values);

std::vector<double> iois(std::span<const double> onset_times);
std::vector<double> iois(const onsets::OnsetList& onsets);

class IoiHistogram {
 public:
  IoiHistogram(std::size_t bins, double bin_width);
  static IoiHistogram for_config(const TatumConfig& config);

  std::size_t size() const noexcept { return counts_.size(); }
  double bin_width() const noexcept { return bin_width_; }
  std::span<const double> counts() const noexcept { return counts_; }
  double mass() const noexcept { return mass_; }

  void scale(double factor);
  /// Returns false when the value falls outside the histogram.
  bool add(double ioi_s, double weight = 1.0);
  void add_bin(std::size_t k, double weight = 1.0);

 private:
  std::vector<double> counts_;
  double bin_width_;
  double mass_ = 0.0;
};

/// Decays the old counts, then adds one count per IOI that lands in range.
IoiHistogram accumulate_frame(IoiHistogram hist, std::span<const double> frame_iois,
                              const TatumConfig& config);

/// Mass-normalized squared residual of every bin index modulo q.
double error_function(const IoiHistogram& hist, std::size_t q);

std::optional<std::size_t> pick_tatum(const IoiHistogram& hist, const TatumConfig& config);

struct PulseTrajectory {
  std::vector<double> frame_times;              // frame end times
  std::vector<std::optional<double>> pulse_s;   // empty while the histogram is empty

  std::size_t estimate_count() const;
};

PulseTrajectory trajectory(std::span<const double> onset_times, double duration_s,
                           const TatumConfig& config = {});
PulseTrajectory trajectory(const onsets::OnsetList& onsets, double duration_s,
                           const TatumConfig& config = {});

}  // namespace tatumkit::tatum
