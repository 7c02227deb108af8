// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "tatumkit/error.hpp"
#include "tatumkit/onsets.hpp"

using namespace tatumkit;
using namespace tatumkit::onsets;
using tatumkit::testing::click_track;
using tatumkit::testing::score_onsets;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

double chebyshev_poly(int n, double x) {
  if (std::abs(x) <= 1.0) return std::cos(n * std::acos(x));
  return std::cosh(n * std::acosh(std::abs(x))) * ((x < 0 && n % 2) ? -1.0 : 1.0);
}

// Prewarped analog prototype response, rescaled to unit gain at DC.
double reference_magnitude(double cutoff, double omega) {
  const double eps2 = std::pow(10.0, 0.05 / 10.0) - 1.0;
  const double x = std::tan(omega / 2) / std::tan(std::numbers::pi * cutoff / 2);
  const double t = chebyshev_poly(6, x);
  return std::sqrt((1.0 + eps2) / (1.0 + eps2 * t * t));
}

std::vector<double> sine(std::size_t n, double cycles_per_sample, double amp = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2 * std::numbers::pi * cycles_per_sample * i);
  return x;
}

}  // namespace

TEST_SUITE("decimation filter") {
  TEST_CASE("cascade matches the analytic response") {
    for (double cutoff : {0.8, 0.4, 0.08, 0.04}) {
      CAPTURE(cutoff);
      const auto sections = chebyshev1_lowpass(cutoff);
      CHECK(sections.size() == 3);
      CHECK(response_magnitude(sections, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
      for (int k = 1; k < 64; ++k) {
        const double omega = std::numbers::pi * k / 64.0;
        const double ref = reference_magnitude(cutoff, omega);
        CHECK(response_magnitude(sections, omega) == doctest::Approx(ref).epsilon(1e-6).scale(1e-9));
      }
    }
  }

  TEST_CASE("passband ripple stays within 0.05 dB above unit DC gain") {
    const auto sections = chebyshev1_lowpass(0.2);
    const double max_gain = std::pow(10.0, 0.05 / 20.0);
    double top = 0.0;
    for (int k = 0; k <= 200; ++k) {
      const double omega = std::numbers::pi * 0.2 * k / 200.0;
      const double g = response_magnitude(sections, omega);
      top = std::max(top, g);
      CHECK(g >= 1.0 - 1e-9);
      CHECK(g <= max_gain + 1e-9);
    }
    CHECK(top > max_gain - 1e-4);  // the ripple reaches its full height
    CHECK(code_of([] { chebyshev1_lowpass(1.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { chebyshev1_lowpass(0.0); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("filtfilt passes a constant and keeps passband phase") {
    const auto sections = chebyshev1_lowpass(0.1);
    const std::vector<double> c(500, 0.7);
    for (double v : filtfilt(sections, c)) CHECK(v == doctest::Approx(0.7).epsilon(1e-9));

    // Zero phase: the output is the input scaled by the squared magnitude.
    const auto x = sine(4000, 0.01);
    const auto y = filtfilt(sections, x);
    const double h = response_magnitude(sections, 2 * std::numbers::pi * 0.01);
    for (std::size_t i = 500; i < 3500; ++i) CHECK(std::abs(y[i] - h * h * x[i]) < 1e-3);
  }

  TEST_CASE("decimate keeps low content and removes aliases") {
    CHECK(code_of([] { decimate(std::vector<double>(10, 0.0), 100.0, 0); }) == ErrorCode::InvalidFactor);
    const std::vector<double> x = {1, 2, 3};
    const auto same = decimate(x, 100.0, 1);
    CHECK(same.samples == x);
    CHECK(same.sample_rate == 100.0);

    const auto low = decimate(sine(20001, 0.004), 44100.0, 20);
    CHECK(low.samples.size() == 1001);
    CHECK(low.sample_rate == doctest::Approx(2205.0));
    double peak = 0;
    for (std::size_t i = 200; i < 800; ++i) peak = std::max(peak, std::abs(low.samples[i]));
    CHECK(peak == doctest::Approx(1.0).epsilon(0.02));

    const auto high = decimate(sine(20001, 0.05), 44100.0, 20);  // twice the new Nyquist
    double leak = 0;
    for (std::size_t i = 200; i < 800; ++i) leak = std::max(leak, std::abs(high.samples[i]));
    CHECK(leak < 1e-3);
  }
}

TEST_SUITE("envelope") {
  TEST_CASE("smoothing window is a unit-sum symmetric hann without zero taps") {
    for (std::size_t n : {1ul, 2ul, 5ul, 441ul}) {
      const auto w = smoothing_window(n);
      double sum = 0;
      for (std::size_t i = 0; i < n; ++i) {
        sum += w[i];
        CHECK(w[i] > 0.0);
        CHECK(w[i] == doctest::Approx(w[n - 1 - i]));
      }
      CHECK(sum == doctest::Approx(1.0));
    }
    const auto w5 = smoothing_window(5);  // raw taps 0.25, 0.75, 1, 0.75, 0.25
    CHECK(w5[0] == doctest::Approx(0.25 / 3.0));
    CHECK(w5[2] == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("smoothing settles to a constant and rejects long windows") {
    const std::vector<double> c(1000, 2.0);
    const auto s = smooth(c, 1000.0, 100.0);
    CHECK(s.size() == c.size());
    CHECK(s[999] == doctest::Approx(2.0));
    CHECK(s[0] < 2.0);
    CHECK(code_of([] { smooth(std::vector<double>(10, 1.0), 1000.0, 100.0); }) == ErrorCode::WindowTooLong);
  }

  TEST_CASE("difference functions against direct formulas") {
    const std::vector<double> e = {1.0, 2.0, 4.0, 3.0};
    const auto d = fod(e, 0.5);
    CHECK(d == std::vector<double>{0.0, 2.0, 4.0, -2.0});
    const auto r = rdf_absolute(e, 0.5, 0.0);
    CHECK(r[0] == 0.0);
    CHECK(r[1] == doctest::Approx(std::log(2.0) / 0.5));
    CHECK(r[3] == doctest::Approx(std::log(0.75) / 0.5));
    const auto rf = rdf_absolute(e, 1.0, 1.0);
    CHECK(rf[1] == doctest::Approx(std::log(3.0 / 2.0)));
  }

  TEST_CASE("relative rdf is invariant to gain") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> e(300), scaled(300);
    for (std::size_t i = 0; i < e.size(); ++i) {
      e[i] = u(rng);
      scaled[i] = 1e-4 * e[i];
    }
    const auto a = rdf(e, 0.01, 1e-3);
    const auto b = rdf(scaled, 0.01, 1e-3);
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
  }
}

TEST_SUITE("peaks") {
  TEST_CASE("strict maxima, plateau start and threshold") {
    const std::vector<double> x = {0, 1, 0, 0.5, 0.5, 0.2, 0.9, 0.9, 1.0, 0.3, 0.7};
    CHECK(detect_peaks(x, 0.0) == std::vector<std::size_t>{1, 3, 8});
    CHECK(detect_peaks(x, 0.6) == std::vector<std::size_t>{1, 8});
    CHECK(detect_peaks(std::vector<double>{1, 1, 1}, 0.0).empty());
    CHECK(detect_peaks(std::vector<double>{}, 0.0).empty());
  }

  TEST_CASE("raising the threshold only removes peaks") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> x(200);
      for (auto& v : x) v = u(rng);
      auto prev = detect_peaks(x, 0.0);
      for (double thr = 0.1; thr <= 1.0; thr += 0.1) {
        const auto cur = detect_peaks(x, thr);
        CHECK(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
        prev = cur;
      }
    }
  }

  TEST_CASE("loudness window shape") {
    const auto g = loudness_window(2205.0, 200.0);
    CHECK(g.size() % 2 == 1);
    CHECK(g[g.size() / 2] == 1.0);
    CHECK(std::abs(static_cast<double>(g.size()) - 441.0) <= 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == doctest::Approx(g[g.size() - 1 - i]));
    const std::vector<double> f = {0, 0, 1, 0, 0};
    CHECK(loudness_at(f, 2, 1000.0, 3.0) == doctest::Approx(1.0));
    CHECK(loudness_at(std::vector<double>{-1, -1, -1}, 1, 1000.0, 3.0) == 0.0);
    CHECK(code_of([&] { loudness_at(f, 9, 1000.0, 3.0); }) == ErrorCode::InvalidArgument);
  }
}

TEST_SUITE("prune") {
  TEST_CASE("keeps the louder of close pairs, earlier on ties") {
    const std::vector<Candidate> c = {{0.0, 1.0}, {0.02, 2.0}, {0.2, 1.0}, {0.21, 1.0}, {0.5, 0.1}};
    const auto out = prune(c, 0.05, 0.0);
    CHECK(out.times == std::vector<double>{0.02, 0.2, 0.5});
    CHECK(out.loudness == std::vector<double>{2.0, 1.0, 0.1});
    const auto gated = prune(c, 0.05, 0.5);
    CHECK(gated.times == std::vector<double>{0.02, 0.2});
  }

  TEST_CASE("output is an increasing, spaced subset of the input") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Candidate> c;
      double t = 0;
      for (int i = 0; i < 60; ++i) {
        t += 0.005 + 0.1 * u(rng);
        c.push_back({t, u(rng)});
      }
      const double spacing = 0.1 * u(rng);
      const auto out = prune(c, spacing, 0.0);
      for (std::size_t i = 1; i < out.size(); ++i) CHECK(out.times[i] - out.times[i - 1] >= spacing);
      for (std::size_t i = 0; i < out.size(); ++i) {
        const auto it = std::find_if(c.begin(), c.end(), [&](const Candidate& x) { return x.time_s == out.times[i]; });
        REQUIRE(it != c.end());
        CHECK(it->loudness == out.loudness[i]);
      }
    }
  }
}

TEST_SUITE("detect_onsets") {
  TEST_CASE("configuration") {
    OnsetConfig c;
    CHECK(effective_factor(c, 44100) == 20);
    CHECK(effective_factor(c, 22050) == 10);
    CHECK(effective_factor(c, 8000) == 4);
    CHECK(effective_factor(c, 1000) == 1);
    c.decimation_factor = 3;
    CHECK(effective_factor(c, 44100) == 3);
    OnsetConfig bad;
    bad.threshold = -0.1;
    CHECK(code_of([&] { validate(bad); }) == ErrorCode::InvalidConfig);
    bad = {};
    bad.log_floor = 0.0;
    CHECK(code_of([&] { validate(bad); }) == ErrorCode::InvalidConfig);
    bad = {};
    bad.min_relative_loudness = 1.5;
    CHECK(code_of([&] { validate(bad); }) == ErrorCode::InvalidConfig);
    CHECK(detection_from_string(to_string(Detection::Fod)) == Detection::Fod);
  }

  TEST_CASE("click track onsets at default settings") {
    std::vector<double> truth;
    for (int k = 0; k < 8; ++k) truth.push_back(0.25 + 0.5 * k);
    for (std::uint32_t rate : {44100u, 22050u, 16000u}) {
      CAPTURE(rate);
      const auto audio = click_track(truth, 4.3, rate);
      const auto found = detect_onsets(audio);
      const auto s = score_onsets(found.times, truth, 0.01);
      CHECK(s.precision == 1.0);
      CHECK(s.recall == 1.0);
      for (std::size_t i = 1; i < found.size(); ++i) CHECK(found.times[i] > found.times[i - 1]);
      for (double l : found.loudness) CHECK(l >= 0.0);
    }
  }

  TEST_CASE("onset times do not depend on gain") {
    const auto a = click_track({0.3, 0.9, 1.4}, 2.0, 22050);
    std::vector<double> quiet = a.samples();
    for (auto& v : quiet) v *= 0.01;
    const auto loud_list = detect_onsets(a);
    const auto quiet_list = detect_onsets(audio::AudioBuffer(quiet, 22050));
    REQUIRE(loud_list.size() == quiet_list.size());
    for (std::size_t i = 0; i < loud_list.size(); ++i) {
      CHECK(loud_list.times[i] == doctest::Approx(quiet_list.times[i]).epsilon(1e-12));
      CHECK(quiet_list.loudness[i] == doctest::Approx(0.01 * loud_list.loudness[i]).epsilon(1e-6));
    }
  }

  TEST_CASE("shifting the input by whole envelope samples shifts the onsets") {
    const std::uint32_t rate = 22050;
    const auto a = click_track({0.5, 1.0, 1.5}, 2.5, rate);
    const std::size_t shift = 10 * 37;  // factor 10 at 22050 Hz
    std::vector<double> shifted(a.frames() + shift, 0.0);
    std::copy(a.samples().begin(), a.samples().end(), shifted.begin() + shift);
    const auto x = detect_onsets(a);
    const auto y = detect_onsets(audio::AudioBuffer(shifted, rate));
    REQUIRE(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(y.times[i] - x.times[i] == doctest::Approx(static_cast<double>(shift) / rate).epsilon(1e-9));
    }
  }

  TEST_CASE("higher thresholds never add onsets on a separated-style stem") {
    const auto mix = tatumkit::testing::drum_mix(21, 4.0);
    OnsetConfig c = separated_stream_preset();
    std::size_t prev = SIZE_MAX;
    for (double thr = 0.0; thr <= 1.0; thr += 0.05) {
      c.threshold = thr;
      const std::size_t n = detect_onsets(mix.hats, c).size();
      CHECK(n <= prev);
      prev = n;
    }
  }

  TEST_CASE("fod mode, silence and input errors") {
    OnsetConfig fod_cfg;
    fod_cfg.detection = Detection::Fod;
    const auto audio = click_track({0.5, 1.0}, 1.6, 22050);
    CHECK(detect_onsets(audio, fod_cfg).size() == 2);
    CHECK(detect_onsets(audio::AudioBuffer(std::vector<double>(22050, 0.0), 22050)).empty());
    CHECK(code_of([] { detect_onsets(audio::AudioBuffer(std::vector<double>(100, 0.1), 22050)); }) ==
          ErrorCode::TooShort);
    CHECK(code_of([] { detect_onsets(audio::AudioBuffer(std::vector<double>(40000, 0.1), 22050, 2)); }) ==
          ErrorCode::InvalidArgument);
  }

  TEST_CASE("trace exposes the intermediate signals") {
    const auto audio = click_track({0.5}, 1.0, 44100);
    const auto t = trace_envelope(audio, {});
    CHECK(t.factor == 20);
    CHECK(t.rate == doctest::Approx(2205.0));
    CHECK(t.envelope.size() == t.fod.size());
    CHECK(t.novelty.size() == t.fod.size());
    CHECK(*std::max_element(t.novelty.begin(), t.novelty.end()) == doctest::Approx(1.0));
    for (double v : t.envelope) CHECK(v >= 0.0);
  }
}
