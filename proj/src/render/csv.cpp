// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "tatumkit/render.hpp"

namespace tatumkit::render {

namespace {

constexpr std::string_view kOnsetHeader = "time_s,loudness";
constexpr std::string_view kPulseHeader = "frame_end_s,pulse_s";

void append_fixed(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  out += buf;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    pos = end + 1;
  }
  return lines;
}

double parse_number(std::string_view field, std::size_t line) {
  const std::string s(field);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw Error(ErrorCode::InvalidArgument,
                "line " + std::to_string(line) + ": '" + s + "' is not a number");
  }
  return v;
}

std::pair<std::string_view, std::string_view> two_fields(std::string_view line, std::size_t number) {
  const std::size_t comma = line.find(',');
  if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(number) + ": expected two fields");
  }
  return {line.substr(0, comma), line.substr(comma + 1)};
}

std::vector<std::string_view> body(std::string_view text, std::string_view header) {
  auto lines = split_lines(text);
  if (lines.empty() || lines.front() != header) {
    throw Error(ErrorCode::InvalidArgument, "expected header '" + std::string(header) + "'");
  }
  lines.erase(lines.begin());
  return lines;
}

}  // namespace

std::string onsets_csv(const onsets::OnsetList& onsets) {
  std::string out(kOnsetHeader);
  out += '\n';
  for (std::size_t i = 0; i < onsets.times.size(); ++i) {
    append_fixed(out, onsets.times[i]);
    out += ',';
    append_fixed(out, i < onsets.loudness.size() ? onsets.loudness[i] : 0.0);
    out += '\n';
  }
  return out;
}

std::string trajectory_csv(const tatum::PulseTrajectory& trajectory) {
  std::string out(kPulseHeader);
  out += '\n';
  for (std::size_t i = 0; i < trajectory.frame_times.size(); ++i) {
    append_fixed(out, trajectory.frame_times[i]);
    out += ',';
    if (i < trajectory.pulse_s.size() && trajectory.pulse_s[i]) append_fixed(out, *trajectory.pulse_s[i]);
    out += '\n';
  }
  return out;
}

onsets::OnsetList parse_onsets_csv(std::string_view text) {
  onsets::OnsetList list;
  std::size_t number = 1;
  for (std::string_view line : body(text, kOnsetHeader)) {
    ++number;
    const auto [t, l] = two_fields(line, number);
    list.times.push_back(parse_number(t, number));
    list.loudness.push_back(parse_number(l, number));
  }
  return list;
}

tatum::PulseTrajectory parse_trajectory_csv(std::string_view text) {
  tatum::PulseTrajectory traj;
  std::size_t number = 1;
  for (std::string_view line : body(text, kPulseHeader)) {
    ++number;
    const auto [t, p] = two_fields(line, number);
    traj.frame_times.push_back(parse_number(t, number));
    if (p.empty()) {
      traj.pulse_s.emplace_back();
    } else {
      traj.pulse_s.emplace_back(parse_number(p, number));
    }
  }
  return traj;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::NotFound, "no such file '" + path.string() + "'");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tatumkit::render
