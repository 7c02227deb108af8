// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "tatumkit/tatum.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tatumkit/simd.hpp"

namespace tatumkit::tatum {

std::size_t TatumConfig::bin_count() const {
  return static_cast<std::size_t>(std::llround(max_ioi_s * histogram_rate));
}

void validate(const TatumConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  if (!(c.frame_s > 0.0)) fail("frame_s must be positive");
  if (!(c.decay > 0.0 && c.decay <= 1.0)) fail("decay must lie in (0, 1]");
  if (!(c.histogram_rate > 0.0)) fail("histogram_rate must be positive");
  if (!(c.max_ioi_s > 0.0)) fail("max_ioi_s must be positive");
  if (!(c.min_q_s >= 0.0)) fail("min_q_s must be non-negative");
  if (!(c.minima_rel_tolerance >= 0.0)) fail("minima_rel_tolerance must be non-negative");
  if (c.bin_count() < 2) fail("max_ioi_s * histogram_rate must give at least two bins");
}

std::uint64_t exact_gcd(std::span<const std::uint64_t> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "gcd of an empty set");
  std::uint64_t g = 0;
  for (std::uint64_t v : values) {
    if (v == 0) throw Error(ErrorCode::InvalidArgument, "gcd inputs must be positive");
    g = std::gcd(g, v);
  }
  return g;
}

std::vector<double> iois(std::span<const double> onset_times) {
  std::vector<double> out;
  if (onset_times.size() < 2) return out;
  out.reserve(onset_times.size() - 1);
  for (std::size_t i = 1; i < onset_times.size(); ++i) out.push_back(onset_times[i] - onset_times[i - 1]);
  return out;
}

std::vector<double> iois(const onsets::OnsetList& onsets) { return iois(onsets.times); }

IoiHistogram::IoiHistogram(std::size_t bins, double bin_width)
    : counts_(bins, 0.0), bin_width_(bin_width) {
  if (bins == 0 || !(bin_width > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "histogram needs bins and a positive bin width");
  }
}

IoiHistogram IoiHistogram::for_config(const TatumConfig& config) {
  validate(config);
  return IoiHistogram(config.bin_count(), config.bin_width());
}

void IoiHistogram::scale(double factor) {
  for (double& c : counts_) c *= factor;
  mass_ *= factor;
}

bool IoiHistogram::add(double ioi_s, double weight) {
  if (!(ioi_s >= 0.0)) return false;
  const double pos = std::round(ioi_s / bin_width_);
  if (pos >= static_cast<double>(counts_.size())) return false;
  add_bin(static_cast<std::size_t>(pos), weight);
  return true;
}

void IoiHistogram::add_bin(std::size_t k, double weight) {
  if (k >= counts_.size()) throw Error(ErrorCode::InvalidArgument, "bin index out of range");
  if (!(weight >= 0.0)) throw Error(ErrorCode::InvalidArgument, "weights must be non-negative");
  counts_[k] += weight;
  mass_ += weight;
}

IoiHistogram accumulate_frame(IoiHistogram hist, std::span<const double> frame_iois,
                              const TatumConfig& config) {
  hist.scale(config.decay);
  for (double ioi : frame_iois) {
    if (ioi <= config.max_ioi_s) hist.add(ioi);
  }
  return hist;
}

namespace {

// Empty bins contribute nothing, so e(q) only visits occupied ones.
struct Occupied {
  std::vector<double> index;
  std::vector<double> weight;
  double mass = 0.0;

  explicit Occupied(const IoiHistogram& hist) : mass(hist.mass()) {
    const auto counts = hist.counts();
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (counts[k] > 0.0) {
        index.push_back(static_cast<double>(k));
        weight.push_back(counts[k]);
      }
    }
  }

  double error(std::size_t q) const {
    return simd::active().residual_energy(index, weight, static_cast<double>(q)) / mass;
  }
};

}  // namespace

double error_function(const IoiHistogram& hist, std::size_t q) {
  if (q < 1) throw Error(ErrorCode::InvalidArgument, "q must be at least one bin");
  if (!(hist.mass() > 0.0)) throw Error(ErrorCode::EmptyHistogram, "histogram has no mass");
  return Occupied(hist).error(q);
}

std::optional<std::size_t> pick_tatum(const IoiHistogram& hist, const TatumConfig& config) {
  if (!(hist.mass() > 0.0)) throw Error(ErrorCode::EmptyHistogram, "histogram has no mass");
  const std::size_t m = hist.size();
  const std::size_t q_lo = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(config.min_q_s / hist.bin_width())));
  if (q_lo >= m) return std::nullopt;

  // e[q] for q in [0, m]; e[0] stands in as an unbounded left neighbour.
  const Occupied occupied(hist);
  std::vector<double> e(m + 1, std::numeric_limits<double>::infinity());
  for (std::size_t q = std::max<std::size_t>(1, q_lo - 1); q <= m; ++q) e[q] = occupied.error(q);

  std::vector<std::size_t> minima;
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t q = q_lo; q < m; ++q) {
    if (e[q] < e[q - 1] && e[q] <= e[q + 1]) {
      minima.push_back(q);
      lowest = std::min(lowest, e[q]);
    }
  }
  if (minima.empty()) return std::nullopt;

  const double gate = (1.0 + config.minima_rel_tolerance) * lowest;
  std::optional<std::size_t> best;
  for (std::size_t q : minima) {
    if (e[q] <= gate) best = q;
  }
  return best;
}

std::size_t PulseTrajectory::estimate_count() const {
  std::size_t n = 0;
  for (const auto& p : pulse_s) n += p.has_value() ? 1 : 0;
  return n;
}

PulseTrajectory trajectory(std::span<const double> onset_times, double duration_s,
                           const TatumConfig& config) {
  validate(config);
  PulseTrajectory out;
  if (!(duration_s > 0.0)) return out;
  const std::size_t frames =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(duration_s / config.frame_s - 1e-9)));

  std::vector<std::vector<double>> per_frame(frames);
  for (std::size_t i = 1; i < onset_times.size(); ++i) {
    const double later = onset_times[i];
    if (later < 0.0) continue;
    const auto f = static_cast<std::size_t>(std::floor(later / config.frame_s));
    if (f >= frames) continue;
    per_frame[f].push_back(later - onset_times[i - 1]);
  }

  IoiHistogram hist = IoiHistogram::for_config(config);
  for (std::size_t f = 0; f < frames; ++f) {
    hist = accumulate_frame(std::move(hist), per_frame[f], config);
    out.frame_times.push_back(static_cast<double>(f + 1) * config.frame_s);
    std::optional<double> pulse;
    if (hist.mass() > 0.0) {
      if (auto q = pick_tatum(hist, config)) pulse = static_cast<double>(*q) * hist.bin_width();
    }
    out.pulse_s.push_back(pulse);
  }
  return out;
}

PulseTrajectory trajectory(const onsets::OnsetList& onsets, double duration_s,
                           const TatumConfig& config) {
  return trajectory(onsets.times, duration_s, config);
}

}  // namespace tatumkit::tatum
