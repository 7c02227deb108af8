// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tatumkit/onsets.hpp"
#include "tatumkit/simd.hpp"

namespace tatumkit::onsets {

namespace {

constexpr double kEnvelopeRate = 2205.0;
constexpr double kMinimumFloor = 1e-300;

std::size_t window_taps(double sample_rate, double window_ms) {
  return static_cast<std::size_t>(std::llround(window_ms * sample_rate / 1000.0));
}

double positive_max(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, v);
  return m;
}

std::vector<double> unit_max(std::vector<double> x) {
  const double m = positive_max(x);
  if (m > 0.0) {
    for (double& v : x) v /= m;
  }
  return x;
}

}  // namespace

std::string to_string(Detection d) { return d == Detection::Rdf ? "rdf" : "fod"; }

Detection detection_from_string(const std::string& name) {
  if (name == "rdf") return Detection::Rdf;
  if (name == "fod") return Detection::Fod;
  throw Error(ErrorCode::InvalidConfig, "unknown detection function '" + name + "'");
}

OnsetConfig separated_stream_preset() {
  OnsetConfig c;
  c.smoothing_window_ms = 50.0;
  c.loudness_window_ms = 50.0;
  c.log_floor = 0.1;
  return c;
}

void validate(const OnsetConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  if (!(c.smoothing_window_ms > 0.0)) fail("smoothing_window_ms must be positive");
  if (!(c.loudness_window_ms > 0.0)) fail("loudness_window_ms must be positive");
  if (!(c.threshold >= 0.0)) fail("threshold must be non-negative");
  if (!(c.min_spacing_s >= 0.0)) fail("min_spacing_s must be non-negative");
  if (!(c.log_floor > 0.0)) fail("log_floor must be positive");
  if (!(c.min_relative_loudness >= 0.0 && c.min_relative_loudness <= 1.0)) {
    fail("min_relative_loudness must lie in [0, 1]");
  }
}

std::size_t effective_factor(const OnsetConfig& config, std::uint32_t sample_rate) {
  if (config.decimation_factor > 0) return config.decimation_factor;
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(sample_rate) / kEnvelopeRate)));
}

std::vector<double> half_wave_rectify(std::span<const double> signal) {
  std::vector<double> out(signal.size());
  simd::active().half_wave_rectify(signal, out);
  return out;
}

Decimated decimate(std::span<const double> signal, double sample_rate, std::size_t factor) {
  if (factor < 1) throw Error(ErrorCode::InvalidFactor, "decimation factor must be >= 1");
  if (factor == 1) return {{signal.begin(), signal.end()}, sample_rate};

  const auto sections = chebyshev1_lowpass(0.8 / static_cast<double>(factor));
  const std::vector<double> filtered = filtfilt(sections, signal);
  Decimated out;
  out.sample_rate = sample_rate / static_cast<double>(factor);
  out.samples.reserve((signal.size() + factor - 1) / factor);
  for (std::size_t i = 0; i < filtered.size(); i += factor) out.samples.push_back(filtered[i]);
  return out;
}

std::vector<double> smoothing_window(std::size_t length) {
  std::vector<double> w(length);
  const double denom = static_cast<double>(length + 1);
  double sum = 0.0;
  for (std::size_t n = 0; n < length; ++n) {
    w[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n + 1) / denom));
    sum += w[n];
  }
  for (double& v : w) v /= sum;
  return w;
}

std::vector<double> smooth(std::span<const double> signal, double sample_rate, double window_ms) {
  if (!(window_ms > 0.0)) throw Error(ErrorCode::InvalidArgument, "window_ms must be positive");
  const std::size_t taps = std::max<std::size_t>(1, window_taps(sample_rate, window_ms));
  if (taps > signal.size()) {
    throw Error(ErrorCode::WindowTooLong, "smoothing window of " + std::to_string(taps) +
                                              " samples exceeds signal of " +
                                              std::to_string(signal.size()));
  }
  const std::vector<double> w = smoothing_window(taps);
  std::vector<double> out(signal.size());
  simd::active().causal_convolve(signal, w, out);
  return out;
}

std::vector<double> fod(std::span<const double> envelope, double dt) {
  std::vector<double> out(envelope.size(), 0.0);
  for (std::size_t t = 1; t < envelope.size(); ++t) out[t] = (envelope[t] - envelope[t - 1]) / dt;
  return out;
}

std::vector<double> rdf_absolute(std::span<const double> envelope, double dt, double epsilon) {
  std::vector<double> out(envelope.size(), 0.0);
  if (envelope.empty()) return out;
  double prev = std::log(envelope[0] + epsilon);
  for (std::size_t t = 1; t < envelope.size(); ++t) {
    const double cur = std::log(envelope[t] + epsilon);
    out[t] = (cur - prev) / dt;
    prev = cur;
  }
  return out;
}

std::vector<double> rdf(std::span<const double> envelope, double dt, double relative_floor) {
  const double floor = relative_floor * positive_max(envelope);
  return rdf_absolute(envelope, dt, floor > 0.0 ? floor : kMinimumFloor);
}

std::vector<std::size_t> detect_peaks(std::span<const double> x, double threshold) {
  std::vector<std::size_t> peaks;
  const std::size_t n = x.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i] > x[i - 1]) {
      // Walk across a plateau and require a strict descent after it.
      std::size_t j = i;
      while (j + 1 < n && x[j + 1] == x[i]) ++j;
      if (j + 1 < n && x[j + 1] < x[i] && x[i] >= threshold) peaks.push_back(i);
      i = j + 1;
    } else {
      ++i;
    }
  }
  return peaks;
}

std::vector<double> loudness_window(double sample_rate, double window_ms) {
  const std::size_t nominal = std::max<std::size_t>(1, window_taps(sample_rate, window_ms));
  const std::size_t half = nominal / 2;
  const double sigma = static_cast<double>(nominal) / 6.0;
  std::vector<double> g(2 * half + 1);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double d = (static_cast<double>(j) - static_cast<double>(half)) / sigma;
    g[j] = std::exp(-0.5 * d * d);
  }
  return g;
}

double loudness_at(std::span<const double> fod_signal, std::size_t peak_index, double sample_rate,
                   double window_ms) {
  if (peak_index >= fod_signal.size()) {
    throw Error(ErrorCode::InvalidArgument, "peak index outside the signal");
  }
  const std::vector<double> g = loudness_window(sample_rate, window_ms);
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(g.size() / 2);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(fod_signal.size());
  const std::ptrdiff_t first = static_cast<std::ptrdiff_t>(peak_index) - half;
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, first);
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, first + static_cast<std::ptrdiff_t>(g.size()));
  if (hi <= lo) return 0.0;
  const double dot = simd::active().dot(fod_signal.subspan(static_cast<std::size_t>(lo),
                                                           static_cast<std::size_t>(hi - lo)),
                                        std::span<const double>(g).subspan(
                                            static_cast<std::size_t>(lo - first),
                                            static_cast<std::size_t>(hi - lo)));
  return std::max(0.0, dot);
}

OnsetList prune(std::span<const Candidate> candidates, double min_spacing_s,
                double threshold_loudness) {
  OnsetList out;
  for (const Candidate& c : candidates) {
    if (c.loudness < threshold_loudness) continue;
    if (!out.times.empty() && c.time_s - out.times.back() < min_spacing_s) {
      if (c.loudness > out.loudness.back()) {
        out.times.back() = c.time_s;
        out.loudness.back() = c.loudness;
      }
      continue;
    }
    out.times.push_back(c.time_s);
    out.loudness.push_back(c.loudness);
  }
  return out;
}

EnvelopeTrace trace_envelope(const audio::AudioBuffer& stream, const OnsetConfig& config) {
  validate(config);
  if (stream.channel_count() != 1) {
    throw Error(ErrorCode::InvalidArgument, "onset detection expects a mono stream");
  }
  const double rate = static_cast<double>(stream.sample_rate());
  if (stream.frames() < std::max<std::size_t>(1, window_taps(rate, config.smoothing_window_ms))) {
    throw Error(ErrorCode::TooShort, "stream is shorter than the smoothing window");
  }

  EnvelopeTrace trace;
  trace.factor = effective_factor(config, stream.sample_rate());
  const std::vector<double> rectified = half_wave_rectify(stream.channel(0));
  Decimated dec = decimate(rectified, rate, trace.factor);
  trace.rate = dec.sample_rate;
  try {
    trace.envelope = smooth(dec.samples, dec.sample_rate, config.smoothing_window_ms);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::WindowTooLong) throw;
    throw Error(ErrorCode::TooShort, e.what());
  }
  // The filter can ring slightly below zero around sharp edges.
  for (double& v : trace.envelope) v = std::max(0.0, v);

  const double dt = 1.0 / trace.rate;
  trace.fod = fod(trace.envelope, dt);
  trace.novelty = unit_max(config.detection == Detection::Rdf ? rdf(trace.envelope, dt, config.log_floor) : trace.fod);
  return trace;
}

OnsetList detect_onsets(const audio::AudioBuffer& stream, const OnsetConfig& config) {
  const EnvelopeTrace trace = trace_envelope(stream, config);
  OnsetList result;
  result.config_used = config;
  if (positive_max(trace.envelope) <= 0.0) return result;

  const std::vector<std::size_t> peaks = detect_peaks(trace.novelty, config.threshold);
  std::vector<Candidate> candidates;
  candidates.reserve(peaks.size());
  double loudest = 0.0;
  const double rate = static_cast<double>(stream.sample_rate());
  for (std::size_t idx : peaks) {
    const double l = loudness_at(trace.fod, idx, trace.rate, config.loudness_window_ms);
    candidates.push_back({static_cast<double>(idx * trace.factor) / rate, l});
    loudest = std::max(loudest, l);
  }
  OnsetList pruned = prune(candidates, config.min_spacing_s, config.min_relative_loudness * loudest);
  pruned.config_used = config;
  return pruned;
}

}  // namespace tatumkit::onsets
