// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tatumkit/audio_io.hpp"
#include "tatumkit/error.hpp"

namespace tatumkit::onsets {

/// Which novelty signal is peak-picked.
enum class Detection {
  Rdf,  // log-difference of the envelope
  Fod,  // plain first-order difference
};

std::string to_string(Detection d);
Detection detection_from_string(const std::string& name);

struct OnsetConfig {
  std::size_t decimation_factor = 0;  // 0 picks round(rate / 2205)
  double smoothing_window_ms = 200.0;
  double threshold = 0.3;              // on the max-normalized novelty signal
  double min_spacing_s = 0.05;
  double loudness_window_ms = 200.0;
  double min_relative_loudness = 0.0;  // fraction of the loudest candidate
  double log_floor = 1e-6;             // RDF floor relative to the envelope maximum
  Detection detection = Detection::Rdf;
};

/// Shorter smoothing and a log floor near the leakage level that a
/// separation typically leaves between events; the built-in defaults suit
/// clean single-source material.
OnsetConfig separated_stream_preset();

/// Throws InvalidConfig on out-of-range fields.
void validate(const OnsetConfig& config);

/// Concrete factor used for a stream at `sample_rate`.
std::size_t effective_factor(const OnsetConfig& config, std::uint32_t sample_rate);

struct OnsetList {
  std::vector<double> times;     // seconds at the original rate, strictly increasing
  std::vector<double> loudness;  // non-negative, aligned with times
  OnsetConfig config_used;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
};

/// One biquad in direct form II transposed, a0 normalized to 1.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 2> a{};  // a1, a2
};

/// Order-6 Chebyshev type I lowpass, 0.05 dB ripple, as three biquads.
/// `cutoff` is the ripple-band edge as a fraction of Nyquist, in (0, 1).
/// The cascade is scaled to exactly unit gain at DC.
std::vector<Biquad> chebyshev1_lowpass(double cutoff);

/// Complex response of a biquad cascade at `omega` radians/sample; returns |H|.
double response_magnitude(std::span<const Biquad> sections, double omega);

/// Forward-backward filtering with odd-extension padding and steady-state
/// initial conditions.
std::vector<double> filtfilt(std::span<const Biquad> sections, std::span<const double> signal);

std::vector<double> half_wave_rectify(std::span<const double> signal);

struct Decimated {
  std::vector<double> samples;
  double sample_rate = 0.0;
};

/// Zero-phase anti-alias filter at 0.8 of the new Nyquist, then every R-th
/// sample. Throws InvalidFactor for R < 1.
Decimated decimate(std::span<const double> signal, double sample_rate, std::size_t factor);

/// Symmetric Hann (no zero endpoints) of `length` taps, unit sum.
std::vector<double> smoothing_window(std::size_t length);

/// Causal convolution with the unit-sum Hann of round(window_ms*rate/1000)
/// taps, trimmed to the input length. Throws WindowTooLong.
std::vector<double> smooth(std::span<const double> signal, double sample_rate, double window_ms);

std::vector<double> fod(std::span<const double> envelope, double dt);

/// Log-difference with the absolute floor `epsilon` added inside both logarithms.
std::vector<double> rdf_absolute(std::span<const double> envelope, double dt, double epsilon);
/// Floor set to `relative_floor` times the envelope maximum.
std::vector<double> rdf(std::span<const double> envelope, double dt, double relative_floor = 1e-6);

/// Strict local maxima at or above `threshold`; a plateau reports its first index.
std::vector<std::size_t> detect_peaks(std::span<const double> signal, double threshold);

/// Unit-peak Gaussian of odd length near round(ms*rate/1000), sigma = length/6.
std::vector<double> loudness_window(double sample_rate, double window_ms);

double loudness_at(std::span<const double> fod_signal, std::size_t peak_index, double sample_rate,
                   double window_ms);

struct Candidate {
  double time_s = 0.0;
  double loudness = 0.0;
};

/// Drops candidates below `threshold_loudness`, then scans left to right
/// keeping the louder of any pair closer than `min_spacing_s` (earlier on ties).
OnsetList prune(std::span<const Candidate> candidates, double min_spacing_s,
                double threshold_loudness);

/// Intermediate signals of the detection chain, at the decimated rate.
struct EnvelopeTrace {
  std::size_t factor = 1;
  double rate = 0.0;
  std::vector<double> envelope;
  std::vector<double> fod;
  std::vector<double> novelty;  // RDF or FOD, normalized to unit max
};

EnvelopeTrace trace_envelope(const audio::AudioBuffer& stream, const OnsetConfig& config);

/// Throws TooShort when the stream is shorter than the smoothing window.
OnsetList detect_onsets(const audio::AudioBuffer& stream, const OnsetConfig& config = {});

}  // namespace tatumkit::onsets
