// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "tatumkit/audio_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "tatumkit/error.hpp"

namespace tatumkit::audio {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

bool tag_is(const std::uint8_t* p, const char* tag) { return std::memcmp(p, tag, 4) == 0; }

struct FormatChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

FormatChunk parse_fmt(const std::uint8_t* p, std::uint32_t size) {
  if (size < 16) throw Error(ErrorCode::CorruptHeader, "fmt chunk shorter than 16 bytes");
  FormatChunk fmt;
  fmt.format = read_u16(p);
  fmt.channels = read_u16(p + 2);
  fmt.sample_rate = read_u32(p + 4);
  fmt.block_align = read_u16(p + 12);
  fmt.bits = read_u16(p + 14);
  if (fmt.format == kFormatExtensible) {
    if (size < 40) throw Error(ErrorCode::CorruptHeader, "extensible fmt chunk truncated");
    // First two bytes of the sub-format GUID carry the plain format code.
    fmt.format = read_u16(p + 24);
  }
  return fmt;
}

}  // namespace

AudioBuffer::AudioBuffer(std::vector<double> samples, std::uint32_t sample_rate)
    : AudioBuffer(std::move(samples), sample_rate, 1) {}

AudioBuffer::AudioBuffer(std::vector<double> samples, std::uint32_t sample_rate,
                         std::uint16_t channels)
    : samples_(std::move(samples)), sample_rate_(sample_rate), channels_(channels) {
  if (sample_rate_ == 0) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  if (channels_ == 0) throw Error(ErrorCode::InvalidArgument, "channel count must be positive");
  if (samples_.size() % channels_ != 0) {
    throw Error(ErrorCode::InvalidArgument, "sample count is not a multiple of channel count");
  }
}

std::span<const double> AudioBuffer::channel(std::size_t c) const {
  if (c >= channels_) throw Error(ErrorCode::InvalidArgument, "channel index out of range");
  return std::span<const double>(samples_).subspan(c * frames(), frames());
}

std::span<double> AudioBuffer::channel(std::size_t c) {
  if (c >= channels_) throw Error(ErrorCode::InvalidArgument, "channel index out of range");
  return std::span<double>(samples_).subspan(c * frames(), frames());
}

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes.data(), "RIFF") || !tag_is(bytes.data() + 8, "WAVE")) {
    throw Error(ErrorCode::CorruptHeader, "not a RIFF/WAVE stream");
  }

  FormatChunk fmt;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = bytes.size() - body;
    if (tag_is(chunk, "fmt ")) {
      if (size > available) throw Error(ErrorCode::CorruptHeader, "fmt chunk truncated");
      fmt = parse_fmt(chunk + 8, size);
      have_fmt = true;
    } else if (tag_is(chunk, "data")) {
      data = chunk + 8;
      // Streamed writers sometimes leave a bogus length; keep what is present.
      data_size = std::min<std::size_t>(size, available);
      break;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt) throw Error(ErrorCode::CorruptHeader, "missing fmt chunk");
  if (data == nullptr) throw Error(ErrorCode::CorruptHeader, "missing data chunk");
  if (fmt.sample_rate == 0) throw Error(ErrorCode::CorruptHeader, "sample rate is zero");
  if (fmt.channels < 1 || fmt.channels > 2) {
    throw Error(ErrorCode::UnsupportedFormat,
                "only mono and stereo are supported, got " + std::to_string(fmt.channels));
  }
  const bool pcm16 = fmt.format == kFormatPcm && fmt.bits == 16;
  const bool float32 = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!pcm16 && !float32) {
    throw Error(ErrorCode::UnsupportedFormat,
                "unsupported encoding (format " + std::to_string(fmt.format) + ", " +
                    std::to_string(fmt.bits) + " bits); expected PCM16 or Float32");
  }

  const std::size_t bytes_per_sample = fmt.bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  const std::size_t frames = data_size / frame_bytes;
  std::vector<double> samples(frames * fmt.channels);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      const std::uint8_t* p = data + f * frame_bytes + c * bytes_per_sample;
      double value;
      if (pcm16) {
        value = static_cast<std::int16_t>(read_u16(p)) / 32768.0;
      } else {
        value = std::bit_cast<float>(read_u32(p));
      }
      samples[c * frames + f] = value;
    }
  }
  return AudioBuffer(std::move(samples), fmt.sample_rate, fmt.channels);
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::NotFound, "no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer, SampleFormat format) {
  if (buffer.empty()) throw Error(ErrorCode::InvalidArgument, "cannot write an empty buffer");
  const std::uint16_t channels = buffer.channel_count();
  const std::uint16_t bits = format == SampleFormat::Pcm16 ? 16 : 32;
  const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bits / 8);
  const std::size_t frames = buffer.frames();
  const std::uint64_t data_bytes = static_cast<std::uint64_t>(frames) * block_align;
  if (data_bytes > 0xFFFFFFFFull - 36) {
    throw Error(ErrorCode::IoError, "buffer too large for a RIFF file");
  }

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, static_cast<std::uint32_t>(36 + data_bytes));
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, format == SampleFormat::Pcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, channels);
  put_u32(out, buffer.sample_rate());
  put_u32(out, buffer.sample_rate() * block_align);
  put_u16(out, block_align);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, static_cast<std::uint32_t>(data_bytes));

  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double x = buffer.channel(c)[f];
      if (format == SampleFormat::Pcm16) {
        const long q = std::lround(x * 32768.0);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L))));
      } else {
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
      }
    }
  }
  return out;
}

void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path, SampleFormat format) {
  const std::vector<std::uint8_t> bytes = encode_wav(buffer, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

AudioBuffer to_mono(const AudioBuffer& buffer) {
  if (buffer.channel_count() == 1) return buffer;
  if (buffer.channel_count() != 2) {
    throw Error(ErrorCode::UnsupportedFormat, "to_mono expects one or two channels");
  }
  const auto left = buffer.channel(0);
  const auto right = buffer.channel(1);
  std::vector<double> mono(buffer.frames());
  for (std::size_t i = 0; i < mono.size(); ++i) mono[i] = 0.5 * (left[i] + right[i]);
  return AudioBuffer(std::move(mono), buffer.sample_rate());
}

}  // namespace tatumkit::audio
