// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic signals and scoring helpers shared by the unit and acceptance tests.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "tatumkit/audio_io.hpp"

namespace tatumkit::testing {

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double amplitude = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

/// Noise bursts with exponential decay, tau seconds, at the given times.
inline audio::AudioBuffer click_track(const std::vector<double>& times, double duration_s, std::uint32_t rate,
                                      double tau_s = 0.01, std::uint64_t seed = 7) {
  const auto n = static_cast<std::size_t>(std::llround(duration_s * rate));
  std::vector<double> x(n, 0.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto len = static_cast<std::size_t>(std::llround(8 * tau_s * rate));
  for (double t : times) {
    const auto start = static_cast<std::size_t>(std::llround(t * rate));
    for (std::size_t k = 0; k < len && start + k < n; ++k) {
      x[start + k] += 0.8 * u(rng) * std::exp(-static_cast<double>(k) / (tau_s * rate));
    }
  }
  return audio::AudioBuffer(std::move(x), rate);
}

struct DrumMix {
  audio::AudioBuffer mixture;
  audio::AudioBuffer kick;
  audio::AudioBuffer hats;
  std::vector<double> kick_times;
  std::vector<double> hat_times;
};

/// Two percussive stems in disjoint bands: decaying sine kicks between 60 and
/// 120 Hz on a 0.5 s grid from 0.25 s, and band-limited 4-8 kHz noise bursts
/// on a 0.25 s grid from 0.125 s.
inline DrumMix drum_mix(std::uint64_t seed, double duration_s = 8.0, std::uint32_t rate = 22050) {
  const auto n = static_cast<std::size_t>(std::llround(duration_s * rate));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<double> kick(n, 0.0);
  std::vector<double> hats(n, 0.0);
  DrumMix mix;

  const double kick_freq = 70.0 + 30.0 * u01(rng);
  for (double t = 0.25; t < duration_s - 0.25; t += 0.5) {
    mix.kick_times.push_back(t);
    const auto start = static_cast<std::size_t>(std::llround(t * rate));
    const auto len = static_cast<std::size_t>(0.25 * rate);
    for (std::size_t k = 0; k < len && start + k < n; ++k) {
      const double tt = static_cast<double>(k) / rate;
      kick[start + k] += 0.7 * std::sin(2 * std::numbers::pi * kick_freq * tt) * std::exp(-tt / 0.05);
    }
  }
  for (double t = 0.125; t < duration_s - 0.125; t += 0.25) {
    mix.hat_times.push_back(t);
    const auto start = static_cast<std::size_t>(std::llround(t * rate));
    const auto len = static_cast<std::size_t>(0.04 * rate);
    constexpr int partials = 64;
    std::vector<double> freq(partials);
    std::vector<double> phase(partials);
    for (int p = 0; p < partials; ++p) {
      freq[p] = 4000.0 + 4000.0 * u01(rng);
      phase[p] = 2 * std::numbers::pi * u01(rng);
    }
    for (std::size_t k = 0; k < len && start + k < n; ++k) {
      const double tt = static_cast<double>(k) / rate;
      double s = 0.0;
      for (int p = 0; p < partials; ++p) s += std::sin(2 * std::numbers::pi * freq[p] * tt + phase[p]);
      hats[start + k] += 0.5 * (s / 8.0) * std::exp(-tt / 0.008);
    }
  }
  std::vector<double> sum(n);
  for (std::size_t i = 0; i < n; ++i) sum[i] = kick[i] + hats[i];
  mix.mixture = audio::AudioBuffer(std::move(sum), rate);
  mix.kick = audio::AudioBuffer(std::move(kick), rate);
  mix.hats = audio::AudioBuffer(std::move(hats), rate);
  return mix;
}

struct Score {
  std::size_t hits = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// One-to-one greedy matching of detections to truth within `tolerance_s`.
inline Score score_onsets(const std::vector<double>& detected, const std::vector<double>& truth,
                          double tolerance_s) {
  std::vector<bool> used(detected.size(), false);
  Score s;
  for (double t : truth) {
    std::size_t best = detected.size();
    double best_err = tolerance_s;
    for (std::size_t i = 0; i < detected.size(); ++i) {
      const double err = std::abs(detected[i] - t);
      if (!used[i] && err <= best_err) {
        best = i;
        best_err = err;
      }
    }
    if (best < detected.size()) {
      used[best] = true;
      ++s.hits;
    }
  }
  s.precision = detected.empty() ? 0.0 : static_cast<double>(s.hits) / detected.size();
  s.recall = truth.empty() ? 0.0 : static_cast<double>(s.hits) / truth.size();
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return saa > 0 && sbb > 0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "tk") {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace tatumkit::testing
