// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "tatumkit/error.hpp"
#include "tatumkit/tatum.hpp"

using namespace tatumkit;
using namespace tatumkit::tatum;

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

// Squared distance of every bin index to its nearest multiple of q, weighted
// by the counts, over the total count.
double brute_force_e(std::span<const double> counts, std::size_t q) {
  double num = 0.0;
  double mass = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m * q <= k + q; ++m) {
      const double d = static_cast<double>(k) - static_cast<double>(m * q);
      best = std::min(best, d * d);
    }
    num += counts[k] * best;
    mass += counts[k];
  }
  return num / mass;
}

TatumConfig fine_config() {
  TatumConfig c;
  c.min_q_s = 0.001;
  return c;
}

}  // namespace

TEST_CASE("exact gcd and intervals") {
  const std::vector<std::uint64_t> v = {24, 48, 72};
  CHECK(exact_gcd(v) == 24);
  CHECK(exact_gcd(std::vector<std::uint64_t>{7, 13}) == 1);
  CHECK(code_of([] { exact_gcd(std::vector<std::uint64_t>{}); }) == ErrorCode::EmptyInput);
  CHECK(code_of([] { exact_gcd(std::vector<std::uint64_t>{3, 0}); }) == ErrorCode::InvalidArgument);
  CHECK(iois(std::vector<double>{1.0}).empty());
  const auto d = iois(std::vector<double>{0.5, 0.75, 1.5});
  REQUIRE(d.size() == 2);
  CHECK(d[0] == doctest::Approx(0.25));
  CHECK(d[1] == doctest::Approx(0.75));
}

TEST_CASE("config validation") {
  TatumConfig c;
  CHECK(c.bin_count() == 1000);
  CHECK_NOTHROW(validate(c));
  c.decay = 0.0;
  CHECK(code_of([&] { validate(c); }) == ErrorCode::InvalidConfig);
  c = {};
  c.max_ioi_s = 0.001;
  CHECK(code_of([&] { validate(c); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("histogram binning, range and decay") {
  IoiHistogram h(1000, 0.001);
  CHECK(h.add(0.2504));
  CHECK(h.counts()[250] == 1.0);
  CHECK(h.add(0.2496, 2.0));
  CHECK(h.counts()[250] == 3.0);
  CHECK_FALSE(h.add(0.9996));  // rounds to bin 1000
  CHECK_FALSE(h.add(-0.1));
  CHECK(h.mass() == 3.0);
  h.scale(0.5);
  CHECK(h.mass() == 1.5);
  CHECK(h.counts()[250] == 1.5);
  CHECK(code_of([&] { h.add_bin(1000); }) == ErrorCode::InvalidArgument);

  const TatumConfig c;
  IoiHistogram g = IoiHistogram::for_config(c);
  g = accumulate_frame(std::move(g), std::vector<double>{0.25, 0.5, 1.5}, c);
  CHECK(g.mass() == 2.0);
  g = accumulate_frame(std::move(g), std::vector<double>{0.25}, c);
  CHECK(g.mass() == doctest::Approx(0.8 * 2.0 + 1.0));
  CHECK(g.counts()[250] == doctest::Approx(1.8));
}

TEST_CASE("error function equals the brute-force oracle exactly") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> size(2, 120);
  std::uniform_int_distribution<int> count(0, 5);
  std::bernoulli_distribution occupied(0.2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto bins = static_cast<std::size_t>(size(rng));
    IoiHistogram h(bins, 0.001);
    for (std::size_t k = 0; k < bins; ++k) {
      if (occupied(rng)) h.add_bin(k, count(rng));
    }
    if (h.mass() == 0.0) h.add_bin(bins - 1);
    std::vector<double> counts(h.counts().begin(), h.counts().end());
    for (std::size_t q = 1; q <= bins + 2; ++q) {
      CAPTURE(q);
      CHECK(error_function(h, q) == brute_force_e(counts, q));
    }
  }
}

TEST_CASE("error function properties") {
  IoiHistogram h(200, 0.001);
  CHECK(code_of([&] { error_function(h, 3); }) == ErrorCode::EmptyHistogram);
  h.add_bin(36);
  h.add_bin(60, 2.0);
  CHECK(code_of([&] { error_function(h, 0); }) == ErrorCode::InvalidArgument);
  CHECK(error_function(h, 1) == 0.0);
  for (std::size_t q = 1; q < 200; ++q) {
    const double e = error_function(h, q);
    CHECK(e >= 0.0);
    CHECK((e == 0.0) == (36 % q == 0 && 60 % q == 0));
  }
}

TEST_CASE("pick_tatum returns the greatest common divisor of planted bins") {
  for (std::size_t t : {24ul, 96ul, 250ul}) {
    IoiHistogram h(1000, 0.001);
    for (std::size_t m = 1; m <= 3; ++m) h.add_bin(m * t);
    CHECK(error_function(h, t) == 0.0);
    CHECK(pick_tatum(h, fine_config()) == t);
  }

  std::mt19937_64 rng(19);
  std::uniform_int_distribution<std::size_t> pick_t(5, 150);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t t = pick_t(rng);
    IoiHistogram h(1000, 0.001);
    std::uniform_int_distribution<std::size_t> mult(1, 999 / t);
    std::uint64_t g = 0;
    while (g != 1) {
      const std::size_t m = mult(rng);
      h.add_bin(m * t, 1.0 + static_cast<double>(m % 3));
      g = std::gcd(g, static_cast<std::uint64_t>(m));
      if (h.mass() > 40) break;
    }
    if (g != 1) continue;
    CAPTURE(t);
    CHECK(pick_tatum(h, fine_config()) == t);
  }
}

TEST_CASE("minimum pulse bound and empty input") {
  IoiHistogram h(1000, 0.001);
  CHECK(code_of([&] { pick_tatum(h, TatumConfig{}); }) == ErrorCode::EmptyHistogram);
  h.add_bin(20);
  h.add_bin(40);
  h.add_bin(60);
  const auto q = pick_tatum(h, TatumConfig{});  // min_q 50 bins excludes 20
  REQUIRE(q.has_value());
  CHECK(*q >= 50);
  TatumConfig c;
  c.min_q_s = 2.0;
  CHECK_FALSE(pick_tatum(h, c).has_value());
}

TEST_CASE("trajectory frames and interval assignment") {
  const TatumConfig c;
  const auto empty = trajectory(std::vector<double>{}, 2.2, c);
  CHECK(empty.frame_times.size() == 5);
  CHECK(empty.frame_times.back() == doctest::Approx(2.5));
  CHECK(empty.estimate_count() == 0);
  CHECK(trajectory(std::vector<double>{}, 0.0, c).frame_times.empty());
  CHECK(trajectory(std::vector<double>{}, 2.0, c).frame_times.size() == 4);

  // The first interval ends at 0.55 s and so enters frame 1, not frame 0.
  const auto t = trajectory(std::vector<double>{0.3, 0.55, 0.8, 1.05}, 1.5, c);
  REQUIRE(t.pulse_s.size() == 3);
  CHECK_FALSE(t.pulse_s[0].has_value());
  REQUIRE(t.pulse_s[1].has_value());
  CHECK(*t.pulse_s[1] == doctest::Approx(0.25));
  CHECK(t.pulse_s[2] == t.pulse_s[1]);  // decay alone keeps the estimate
}

TEST_CASE("steady grids map to their period") {
  for (double period : {0.125, 0.25, 0.4, 0.5}) {
    std::vector<double> times;
    for (double x = 0.1; x < 10.0; x += period) times.push_back(x);
    const auto t = trajectory(times, 10.0, TatumConfig{});
    CHECK(t.estimate_count() <= 20);
    REQUIRE(t.pulse_s.back().has_value());
    CHECK(*t.pulse_s.back() == doctest::Approx(period).epsilon(0.004));
  }
}

TEST_CASE("subdivided rhythm resolves to the smallest shared unit") {
  // Long-short pattern of 0.375 + 0.125 s: the shared unit is 0.125 s.
  std::vector<double> times;
  for (double bar = 0.0; bar < 8.0; bar += 0.5) {
    times.push_back(bar);
    times.push_back(bar + 0.375);
  }
  const auto t = trajectory(times, 8.0, TatumConfig{});
  REQUIRE(t.pulse_s.back().has_value());
  CHECK(*t.pulse_s.back() == doctest::Approx(0.125).epsilon(0.01));
}
