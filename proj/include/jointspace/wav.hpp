// Copyright (c) 2026, the jointspace authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "jointspace/dsp.hpp"
#include "jointspace/error.hpp"

namespace jointspace {

// WAV support: PCM 16/24/32-bit and 32-bit float, any channel count, any
// sample rate. Multi-channel audio is mixed down by channel mean. MP3/OGG/
// AIFF are deliberately unsupported.

enum class SampleFormat : std::uint8_t { pcm16, pcm24, pcm32, float32 };

struct WavInfo {
  double sample_rate = 0.0;
  std::uint16_t channels = 0;
  std::uint64_t frames = 0;  // samples per channel
  SampleFormat format = SampleFormat::pcm16;

  double duration_s() const {
    return sample_rate > 0.0 ? static_cast<double>(frames) / sample_rate : 0.0;
  }
};

namespace detail {

struct WavChunks {
  WavInfo info;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
  std::size_t data_offset = 0;
  std::size_t data_size = 0;
};

inline std::uint32_t rd_u32(const std::vector<char>& b, std::size_t off) {
  std::uint32_t v;
  std::memcpy(&v, b.data() + off, 4);
  return v;
}

inline std::uint16_t rd_u16(const std::vector<char>& b, std::size_t off) {
  std::uint16_t v;
  std::memcpy(&v, b.data() + off, 2);
  return v;
}

inline std::vector<char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return bytes;
}

inline WavChunks parse_wav(const std::vector<char>& b,
                           const std::filesystem::path& path) {
  auto fail = [&](const std::string& why) -> WavChunks {
    throw IoError("'" + path.string() + "': " + why);
  };
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 ||
      std::memcmp(b.data() + 8, "WAVE", 4) != 0)
    return fail("not a RIFF/WAVE file");

  WavChunks c;
  bool have_fmt = false, have_data = false;
  std::size_t off = 12;
  while (off + 8 <= b.size()) {
    char id[4];
    std::memcpy(id, b.data() + off, 4);
    const std::size_t size = rd_u32(b, off + 4);
    const std::size_t payload = off + 8;
    if (payload + size > b.size()) return fail("truncated chunk");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) return fail("fmt chunk too small");
      std::uint16_t format_tag = rd_u16(b, payload);
      c.info.channels = rd_u16(b, payload + 2);
      c.info.sample_rate = static_cast<double>(rd_u32(b, payload + 4));
      c.block_align = rd_u16(b, payload + 12);
      c.bits = rd_u16(b, payload + 14);
      if (format_tag == 0xFFFE) {  // WAVE_FORMAT_EXTENSIBLE
        if (size < 40) return fail("extensible fmt chunk too small");
        format_tag = rd_u16(b, payload + 24);  // first bytes of SubFormat GUID
      }
      if (format_tag == 1) {
        if (c.bits == 16) c.info.format = SampleFormat::pcm16;
        else if (c.bits == 24) c.info.format = SampleFormat::pcm24;
        else if (c.bits == 32) c.info.format = SampleFormat::pcm32;
        else return fail("unsupported PCM bit depth " + std::to_string(c.bits));
      } else if (format_tag == 3) {
        if (c.bits != 32) return fail("unsupported float bit depth");
        c.info.format = SampleFormat::float32;
      } else {
        return fail("unsupported format tag " + std::to_string(format_tag));
      }
      if (c.info.channels == 0) return fail("zero channels");
      if (c.info.sample_rate <= 0.0) return fail("zero sample rate");
      if (c.block_align != c.info.channels * (c.bits / 8))
        return fail("inconsistent block alignment");
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      c.data_offset = payload;
      c.data_size = size;
      have_data = true;
    }
    off = payload + size + (size % 2);  // chunks are word-aligned
  }
  if (!have_fmt) return fail("missing fmt chunk");
  if (!have_data) return fail("missing data chunk");
  c.info.frames = c.block_align > 0 ? c.data_size / c.block_align : 0;
  return c;
}

}  // namespace detail

// Header-only scan; does not decode samples.
inline WavInfo read_wav_info(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  return detail::parse_wav(bytes, path).info;
}

// Full decode with channel-mean mixdown to a mono double waveform.
inline Waveform read_wav(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  const auto c = detail::parse_wav(bytes, path);

  Waveform w;
  w.sample_rate = c.info.sample_rate;
  w.samples.resize(c.info.frames);
  const char* d = bytes.data() + c.data_offset;
  const std::size_t ch = c.info.channels;
  const std::size_t bytes_per = c.bits / 8;

  for (std::size_t f = 0; f < c.info.frames; ++f) {
    double acc = 0.0;
    for (std::size_t j = 0; j < ch; ++j) {
      const char* p = d + (f * ch + j) * bytes_per;
      switch (c.info.format) {
        case SampleFormat::pcm16: {
          std::int16_t v;
          std::memcpy(&v, p, 2);
          acc += static_cast<double>(v) / 32768.0;
          break;
        }
        case SampleFormat::pcm24: {
          std::int32_t v = (static_cast<std::uint8_t>(p[0])) |
                           (static_cast<std::uint8_t>(p[1]) << 8) |
                           (static_cast<std::uint8_t>(p[2]) << 16);
          if (v & 0x800000) v |= ~0xFFFFFF;  // sign extend
          acc += static_cast<double>(v) / 8388608.0;
          break;
        }
        case SampleFormat::pcm32: {
          std::int32_t v;
          std::memcpy(&v, p, 4);
          acc += static_cast<double>(v) / 2147483648.0;
          break;
        }
        case SampleFormat::float32: {
          float v;
          std::memcpy(&v, p, 4);
          acc += static_cast<double>(v);
          break;
        }
      }
    }
    w.samples[f] = acc / static_cast<double>(ch);
  }
  return w;
}

// Writes interleaved samples. Values are clamped to [-1, 1] for the PCM
// formats; float32 is written verbatim.
inline void write_wav(const std::filesystem::path& path,
                      std::span<const double> interleaved,
                      std::uint16_t channels, double sample_rate,
                      SampleFormat format = SampleFormat::pcm16) {
  if (channels == 0) throw InvalidParameter("write_wav: zero channels");
  if (sample_rate <= 0.0) throw InvalidParameter("write_wav: bad sample rate");
  if (interleaved.size() % channels != 0)
    throw InvalidParameter("write_wav: sample count not divisible by channels");

  const std::uint16_t format_tag = format == SampleFormat::float32 ? 3 : 1;
  const std::uint16_t bits = format == SampleFormat::pcm16   ? 16
                             : format == SampleFormat::pcm24 ? 24
                                                             : 32;
  const std::uint16_t block_align = channels * (bits / 8);
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(interleaved.size() * (bits / 8));
  const std::uint32_t rate = static_cast<std::uint32_t>(sample_rate);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create '" + path.string() + "'");
  auto w16 = [&](std::uint16_t v) { out.write(reinterpret_cast<char*>(&v), 2); };
  auto w32 = [&](std::uint32_t v) { out.write(reinterpret_cast<char*>(&v), 4); };

  out.write("RIFF", 4);
  w32(36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  w32(16);
  w16(format_tag);
  w16(channels);
  w32(rate);
  w32(rate * block_align);
  w16(block_align);
  w16(bits);
  out.write("data", 4);
  w32(data_size);

  for (double x : interleaved) {
    switch (format) {
      case SampleFormat::pcm16: {
        double v = std::clamp(x, -1.0, 1.0) * 32767.0;
        const std::int16_t s = static_cast<std::int16_t>(std::llround(v));
        out.write(reinterpret_cast<const char*>(&s), 2);
        break;
      }
      case SampleFormat::pcm24: {
        double v = std::clamp(x, -1.0, 1.0) * 8388607.0;
        const std::int32_t s = static_cast<std::int32_t>(std::llround(v));
        const char b[3] = {static_cast<char>(s & 0xFF),
                           static_cast<char>((s >> 8) & 0xFF),
                           static_cast<char>((s >> 16) & 0xFF)};
        out.write(b, 3);
        break;
      }
      case SampleFormat::pcm32: {
        double v = std::clamp(x, -1.0, 1.0) * 2147483647.0;
        const std::int32_t s = static_cast<std::int32_t>(std::llround(v));
        out.write(reinterpret_cast<const char*>(&s), 4);
        break;
      }
      case SampleFormat::float32: {
        const float f = static_cast<float>(x);
        out.write(reinterpret_cast<const char*>(&f), 4);
        break;
      }
    }
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace jointspace
