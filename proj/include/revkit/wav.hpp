// revkit/wav.hpp

// Copyright 2026  RevKit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef REVKIT_WAV_HPP_
#define REVKIT_WAV_HPP_

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "revkit/common.hpp"

namespace revkit {

constexpr int kCanonicalSampleRate = 16000;

struct Waveform {
  std::vector<float> samples;
  int sample_rate = kCanonicalSampleRate;

  std::size_t size() const { return samples.size(); }
  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

inline void check_waveform(const Waveform& w, const std::string& what) {
  require(w.sample_rate > 0, what, ": sample_rate must be positive");
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    require(std::isfinite(w.samples[i]), what, ": non-finite sample at index ",
            i);
  }
}

enum class WavEncoding { kPcm16, kFloat32 };

namespace detail {

inline void put_u16(std::ostream& os, std::uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  os.write(b, 2);
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

// -1.0 maps to -32768; positive values saturate at 32767.
inline std::int16_t float_to_pcm16(float x) {
  double scaled = std::lround(static_cast<double>(x) * 32768.0);
  if (scaled > 32767.0) scaled = 32767.0;
  if (scaled < -32768.0) scaled = -32768.0;
  return static_cast<std::int16_t>(scaled);
}

inline void write_wav(const Waveform& w, const std::string& path,
                      WavEncoding encoding) {
  check_waveform(w, "write_wav");
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "write_wav: cannot open '", path, "' for writing");

  const std::uint32_t num_samples = static_cast<std::uint32_t>(w.size());
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint16_t block_align = bits / 8;  // mono
  const std::uint32_t data_bytes = num_samples * block_align;
  const std::uint16_t format = encoding == WavEncoding::kPcm16 ? 1 : 3;

  os.write("RIFF", 4);
  detail::put_u32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  detail::put_u32(os, 16);
  detail::put_u16(os, format);
  detail::put_u16(os, 1);  // channels
  detail::put_u32(os, static_cast<std::uint32_t>(w.sample_rate));
  detail::put_u32(os, static_cast<std::uint32_t>(w.sample_rate) * block_align);
  detail::put_u16(os, block_align);
  detail::put_u16(os, bits);
  os.write("data", 4);
  detail::put_u32(os, data_bytes);

  if (encoding == WavEncoding::kPcm16) {
    for (float x : w.samples) {
      std::int16_t q = float_to_pcm16(x);
      detail::put_u16(os, static_cast<std::uint16_t>(q));
    }
  } else {
    for (float x : w.samples) {
      std::uint32_t bitsv;
      std::memcpy(&bitsv, &x, 4);
      detail::put_u32(os, bitsv);
    }
  }
  require(os.good(), "write_wav: write failed for '", path, "'");
}

inline Waveform read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "read_wav: cannot open '", path, "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  require(bytes.size() >= 12, "read_wav: '", path, "' too short for RIFF");
  require(std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
              std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          "read_wav: '", path, "' is not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t data_off = 0, data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* p = bytes.data() + pos;
    std::uint32_t chunk_len = detail::get_u32(p + 4);
    std::size_t body = pos + 8;
    if (std::memcmp(p, "fmt ", 4) == 0) {
      require(chunk_len >= 16 && body + 16 <= bytes.size(),
              "read_wav: malformed fmt chunk in '", path, "'");
      format = detail::get_u16(bytes.data() + body);
      channels = detail::get_u16(bytes.data() + body + 2);
      rate = detail::get_u32(bytes.data() + body + 4);
      bits = detail::get_u16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(p, "data", 4) == 0) {
      require(body + chunk_len <= bytes.size(),
              "read_wav: data chunk exceeds file size in '", path, "'");
      data_off = body;
      data_len = chunk_len;
      break;
    }
    pos = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  require(have_fmt, "read_wav: '", path, "' has no fmt chunk");
  require(data_off != 0, "read_wav: '", path, "' has no data chunk");
  require(channels == 1, "read_wav: '", path, "' has ", channels,
          " channels; only mono is supported");
  require(data_len > 0, "read_wav: '", path, "': empty audio");

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  if (format == 1 && bits == 16) {
    w.samples.resize(data_len / 2);
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
      std::int16_t q = static_cast<std::int16_t>(
          detail::get_u16(bytes.data() + data_off + 2 * i));
      w.samples[i] = static_cast<float>(q) / 32768.0f;
    }
  } else if (format == 3 && bits == 32) {
    w.samples.resize(data_len / 4);
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
      std::uint32_t bitsv = detail::get_u32(bytes.data() + data_off + 4 * i);
      float x;
      std::memcpy(&x, &bitsv, 4);
      w.samples[i] = x;
    }
  } else {
    fail("read_wav: '", path, "': unsupported encoding (format=", format,
         ", bits=", bits, "); only PCM16 and float32 are supported");
  }
  check_waveform(w, "read_wav");
  return w;
}

// Most of the toolkit assumes the canonical rate; callers that require it use
// this instead of resampling.
inline void check_canonical_rate(const Waveform& w, const std::string& what) {
  require(w.sample_rate == kCanonicalSampleRate, what, ": expected ",
          kCanonicalSampleRate, " Hz audio, got ", w.sample_rate, " Hz");
}

}  // namespace revkit

#endif  // REVKIT_WAV_HPP_
