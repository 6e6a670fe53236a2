// revkit/frames.hpp

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

#ifndef REVKIT_FRAMES_HPP_
#define REVKIT_FRAMES_HPP_

#include <cmath>
#include <vector>

#include "revkit/common.hpp"
#include "revkit/wav.hpp"

namespace revkit {

struct FrameSpec {
  double frame_len = 0.025;   // seconds
  double hop = 0.010;         // seconds
  double preemphasis = 0.97;

  std::size_t frame_samples(int sample_rate) const {
    return static_cast<std::size_t>(std::llround(frame_len * sample_rate));
  }
  std::size_t hop_samples(int sample_rate) const {
    return static_cast<std::size_t>(std::llround(hop * sample_rate));
  }
};

inline void check_frame_spec(const FrameSpec& s) {
  require(s.frame_len > 0.0, "FrameSpec: frame_len must be > 0");
  require(s.hop > 0.0 && s.hop <= s.frame_len,
          "FrameSpec: need 0 < hop <= frame_len");
  require(s.preemphasis >= 0.0 && s.preemphasis < 1.0,
          "FrameSpec: preemphasis must be in [0, 1)");
}

inline std::size_t num_frames(std::size_t num_samples, const FrameSpec& s,
                              int sample_rate) {
  check_frame_spec(s);
  const std::size_t flen = s.frame_samples(sample_rate);
  require(num_samples >= flen, "num_frames: waveform of ", num_samples,
          " samples is shorter than one ", flen, "-sample frame");
  return 1 + (num_samples - flen) / s.hop_samples(sample_rate);
}

// Frame t covers samples [t hop, t hop + frame_len); per-frame preemphasis
// (first sample differenced against itself) then a Hamming window.
inline std::vector<std::vector<double>> frame_signal(const Waveform& w,
                                                     const FrameSpec& s) {
  check_waveform(w, "frame_signal");
  const std::size_t flen = s.frame_samples(w.sample_rate);
  const std::size_t hop = s.hop_samples(w.sample_rate);
  const std::size_t count = num_frames(w.samples.size(), s, w.sample_rate);

  std::vector<double> window(flen);
  for (std::size_t i = 0; i < flen; ++i) {
    window[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i /
                                       static_cast<double>(flen - 1));
  }

  std::vector<std::vector<double>> frames(count);
  for (std::size_t t = 0; t < count; ++t) {
    const float* src = w.samples.data() + t * hop;
    std::vector<double>& f = frames[t];
    f.resize(flen);
    f[0] = src[0] - s.preemphasis * src[0];
    for (std::size_t i = 1; i < flen; ++i) {
      f[i] = src[i] - s.preemphasis * src[i - 1];
    }
    for (std::size_t i = 0; i < flen; ++i) f[i] *= window[i];
  }
  return frames;
}

}  // namespace revkit

#endif  // REVKIT_FRAMES_HPP_
