// revkit/ir.hpp

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

#ifndef REVKIT_IR_HPP_
#define REVKIT_IR_HPP_

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "revkit/common.hpp"
#include "revkit/rng.hpp"
#include "revkit/wav.hpp"

namespace revkit {

struct ImpulseResponse {
  std::vector<float> taps;
  int sample_rate = kCanonicalSampleRate;
  // Index used as the time anchor for length-preserving convolution.  For
  // synthetic IRs this is the construction-time direct-path delay; for
  // estimated or externally loaded IRs it is the maximum-magnitude tap.
  std::size_t direct_path_index = 0;
};

inline void check_ir(const ImpulseResponse& ir, const std::string& what) {
  require(!ir.taps.empty(), what, ": IR has no taps");
  require(ir.sample_rate > 0, what, ": sample_rate must be positive");
  require(ir.direct_path_index < ir.taps.size(), what,
          ": direct_path_index ", ir.direct_path_index, " out of range [0, ",
          ir.taps.size(), ")");
  for (std::size_t i = 0; i < ir.taps.size(); ++i) {
    require(std::isfinite(ir.taps[i]), what, ": non-finite tap at index ", i);
  }
}

inline std::size_t peak_magnitude_index(const std::vector<float>& taps) {
  std::size_t best = 0;
  float best_mag = -1.0f;
  for (std::size_t i = 0; i < taps.size(); ++i) {
    float m = std::fabs(taps[i]);
    if (m > best_mag) {
      best_mag = m;
      best = i;
    }
  }
  return best;
}

// 6.91 = ln(1000): a 60 dB energy decay over t60 seconds means the amplitude
// envelope falls by a factor 1000.
constexpr double kDecayConstant = 6.907755278982137;  // ln(1e3)

// Unit direct tap at direct_delay followed by enveloped Gaussian noise.  The
// anchor index is the construction delay, not the (noise-dependent) strongest
// tap, so that same-length convolution stays time-aligned with the input.
inline ImpulseResponse synth_ir(double t60, std::size_t length,
                                int sample_rate, std::size_t direct_delay,
                                std::uint64_t seed) {
  require(t60 > 0.0, "synth_ir: t60 must be positive");
  require(length >= 1, "synth_ir: length must be >= 1");
  require(direct_delay < length, "synth_ir: direct_delay ", direct_delay,
          " must be < length ", length);
  require(sample_rate > 0, "synth_ir: sample_rate must be positive");

  ImpulseResponse ir;
  ir.sample_rate = sample_rate;
  ir.direct_path_index = direct_delay;
  ir.taps.assign(length, 0.0f);
  ir.taps[direct_delay] = 1.0f;
  Rng rng(seed);
  for (std::size_t i = direct_delay + 1; i < length; ++i) {
    double t = static_cast<double>(i - direct_delay) / sample_rate;
    ir.taps[i] =
        static_cast<float>(rng.gaussian() * std::exp(-kDecayConstant * t / t60));
  }
  return ir;
}

// IRs persist as float32 WAV plus a one-line sidecar holding the anchor index.
inline std::string ir_sidecar_path(const std::string& wav_path) {
  return wav_path + ".meta";
}

inline void save_ir(const ImpulseResponse& ir, const std::string& wav_path) {
  check_ir(ir, "save_ir");
  Waveform w;
  w.samples = ir.taps;
  w.sample_rate = ir.sample_rate;
  write_wav(w, wav_path, WavEncoding::kFloat32);
  std::ofstream os(ir_sidecar_path(wav_path));
  require(os.good(), "save_ir: cannot write '", ir_sidecar_path(wav_path),
          "'");
  os << "direct_path_index\t" << ir.direct_path_index << "\n";
}

inline ImpulseResponse load_ir(const std::string& wav_path) {
  Waveform w = read_wav(wav_path);
  ImpulseResponse ir;
  ir.taps = w.samples;
  ir.sample_rate = w.sample_rate;
  std::ifstream is(ir_sidecar_path(wav_path));
  if (is.good()) {
    std::string key;
    std::size_t idx = 0;
    is >> key >> idx;
    require(key == "direct_path_index" && !is.fail(), "load_ir: malformed '",
            ir_sidecar_path(wav_path), "'");
    ir.direct_path_index = idx;
  } else {
    ir.direct_path_index = peak_magnitude_index(ir.taps);
  }
  check_ir(ir, "load_ir");
  return ir;
}

}  // namespace revkit

#endif  // REVKIT_IR_HPP_
