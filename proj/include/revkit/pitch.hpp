// revkit/pitch.hpp

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

// Pitch and probability-of-voicing via the normalized cross-correlation
// function over an extended analysis window.

#ifndef REVKIT_PITCH_HPP_
#define REVKIT_PITCH_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "revkit/common.hpp"
#include "revkit/frames.hpp"
#include "revkit/wav.hpp"

namespace revkit {

struct PitchSpec {
  double f_min = 50.0;        // Hz
  double f_max = 400.0;       // Hz
  double window_len = 0.040;  // extended analysis window, seconds
  double silence_power = 1e-8;
};

struct PitchPov {
  double pitch = 0.0;  // Hz, 0 for unvoiced/silent
  double pov = 0.0;    // [0, 1]
};

// One (pitch, PoV) pair per frame of the 25/10 ms grid.  Each frame is
// analyzed over a 40 ms window centered on it (zero-padded at waveform
// edges) so that lags down to f_min fit.
inline std::vector<PitchPov> pitch_pov(const Waveform& w, const FrameSpec& fs,
                                       const PitchSpec& ps = PitchSpec()) {
  check_waveform(w, "pitch_pov");
  require(ps.f_min > 0.0 && ps.f_min < ps.f_max, "pitch_pov: bad pitch range");
  const int sr = w.sample_rate;
  const std::size_t flen = fs.frame_samples(sr);
  const std::size_t hop = fs.hop_samples(sr);
  const std::size_t count = num_frames(w.samples.size(), fs, sr);

  const std::size_t ext =
      static_cast<std::size_t>(std::llround(ps.window_len * sr));
  const std::size_t lag_min =
      static_cast<std::size_t>(std::llround(sr / ps.f_max));
  const std::size_t lag_max =
      static_cast<std::size_t>(std::llround(sr / ps.f_min));
  require(lag_min >= 1 && lag_max > lag_min, "pitch_pov: degenerate lag span");
  require(ext > lag_max, "pitch_pov: window too short for f_min lag");
  const std::size_t span = ext - lag_max;  // correlation summation length

  std::vector<PitchPov> out(count);
  std::vector<double> s(ext);
  for (std::size_t t = 0; t < count; ++t) {
    const long long center =
        static_cast<long long>(t * hop) + static_cast<long long>(flen) / 2;
    const long long start = center - static_cast<long long>(ext) / 2;
    double power = 0.0;
    for (std::size_t i = 0; i < ext; ++i) {
      long long idx = start + static_cast<long long>(i);
      s[i] = (idx >= 0 && idx < static_cast<long long>(w.samples.size()))
                 ? w.samples[idx]
                 : 0.0;
      power += s[i] * s[i];
    }
    if (power / ext < ps.silence_power) continue;  // stays (0, 0)

    // Cumulative squares make the per-lag energy terms O(1).
    std::vector<double> sq(ext + 1, 0.0);
    for (std::size_t i = 0; i < ext; ++i) sq[i + 1] = sq[i] + s[i] * s[i];
    const double e0 = sq[span] - sq[0];

    double best = -2.0;
    std::size_t best_lag = lag_min;
    for (std::size_t l = lag_min; l <= lag_max; ++l) {
      double dot = 0.0;
      for (std::size_t i = 0; i < span; ++i) dot += s[i] * s[i + l];
      double el = sq[l + span] - sq[l];
      double nccf = dot / std::sqrt(e0 * el + 1e-20);
      if (nccf > best) {
        best = nccf;
        best_lag = l;
      }
    }
    out[t].pitch = static_cast<double>(sr) / best_lag;
    out[t].pov = std::clamp(best, 0.0, 1.0);
  }
  return out;
}

}  // namespace revkit

#endif  // REVKIT_PITCH_HPP_
