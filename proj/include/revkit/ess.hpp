// revkit/ess.hpp

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

// Exponential sine sweep measurement: sweep generation, Farina inverse
// filter, and impulse response estimation by deconvolution.

#ifndef REVKIT_ESS_HPP_
#define REVKIT_ESS_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

#include "revkit/common.hpp"
#include "revkit/fft.hpp"
#include "revkit/ir.hpp"
#include "revkit/wav.hpp"

namespace revkit {

struct SweepSpec {
  double f_start = 20.0;     // Hz
  double f_end = 7900.0;     // Hz
  double duration = 10.0;    // seconds
  double amplitude = 0.5;
  int sample_rate = kCanonicalSampleRate;
};

inline void check_sweep_spec(const SweepSpec& s) {
  require(s.sample_rate > 0, "SweepSpec: sample_rate must be positive");
  require(s.f_start > 0.0, "SweepSpec: f_start must be > 0");
  require(s.f_start < s.f_end, "SweepSpec: f_start must be < f_end");
  require(s.f_end < 0.5 * s.sample_rate,
          "SweepSpec: f_end must be below Nyquist (", 0.5 * s.sample_rate,
          " Hz)");
  require(s.duration > 0.0, "SweepSpec: duration must be > 0");
  require(s.amplitude > 0.0 && s.amplitude <= 1.0,
          "SweepSpec: amplitude must be in (0, 1]");
}

inline std::size_t sweep_length(const SweepSpec& s) {
  return static_cast<std::size_t>(std::llround(s.duration * s.sample_rate));
}

// x(t) = A sin( (2 pi f1 T / ln r) (e^{t ln r / T} - 1) ),  r = f2/f1.
// Instantaneous frequency rises exponentially from f_start to f_end.
inline Waveform generate_ess(const SweepSpec& s) {
  check_sweep_spec(s);
  const double log_ratio = std::log(s.f_end / s.f_start);
  const double phase_scale = 2.0 * M_PI * s.f_start * s.duration / log_ratio;
  const std::size_t n = sweep_length(s);
  Waveform w;
  w.sample_rate = s.sample_rate;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / s.sample_rate;
    double phase = phase_scale * std::expm1(t * log_ratio / s.duration);
    w.samples[i] = static_cast<float>(s.amplitude * std::sin(phase));
  }
  return w;
}

// Inverse filter for sweep deconvolution.  Conceptually this is the
// time-reversed sweep with an e^{-t ln r / T} gain along the reversed axis
// (weighting instantaneous frequency f by f / f_end, which whitens the
// sweep's pink spectrum).  That construction only flattens to first order:
// the finite sweep leaves an erf-shaped transition at each band edge and
// ripple tied to the end-sample phase, a few-percent error floor no
// practical duration can remove.  So the filter is built by regularized
// inversion of the sweep spectrum instead, with a raised-cosine window
// confining the inversion to [f_start/2, min(Nyquist, 1.02 f_end)].  It
// stays numerically close to the classical filter in band but makes
// sweep (*) inverse a unit pulse across the whole swept range.
//
// `guard` extends the tap window by that many samples on each side of the
// nominal reversed-sweep support [-(n-1), 0]; the edge corrections spread a
// few seconds past the support, so deconvolution uses a generous guard while
// the public filter keeps the classical length.  Output length n + 2*guard,
// pulse peak at lag n-1+guard.  Double precision: the taps span a dynamic
// range of ~f_start/f_end, which float32 storage would bury.
inline std::vector<double> inverse_filter_taps(const SweepSpec& s,
                                               std::size_t guard = 0) {
  check_sweep_spec(s);
  Waveform sweep = generate_ess(s);
  const std::size_t n = sweep.samples.size();
  const std::size_t nfft = next_pow2(2 * (n + 2 * guard));
  std::vector<std::complex<double>> spec(nfft);
  for (std::size_t i = 0; i < n; ++i) spec[i] = sweep.samples[i];
  fft_inplace(spec, false);

  double max_mag2 = 0.0;
  for (const std::complex<double>& c : spec) {
    max_mag2 = std::max(max_mag2, std::norm(c));
  }
  require(max_mag2 > 0.0, "inverse_filter: degenerate sweep");
  const double eps = 1e-10 * max_mag2;

  const double nyquist = 0.5 * s.sample_rate;
  const double lo0 = 0.5 * s.f_start;
  const double lo1 = s.f_start;
  const double hi0 = s.f_end;
  const double hi1 = std::min(nyquist, 1.02 * s.f_end);
  auto band_weight = [&](double f) {
    if (f < lo0 || f > hi1) return 0.0;
    if (f < lo1) return 0.5 - 0.5 * std::cos(M_PI * (f - lo0) / (lo1 - lo0));
    if (f <= hi0) return 1.0;
    return 0.5 - 0.5 * std::cos(M_PI * (hi1 - f) / (hi1 - hi0));
  };

  for (std::size_t k = 0; k < nfft; ++k) {
    const std::size_t mirror = std::min(k, nfft - k);
    const double f =
        static_cast<double>(mirror) * s.sample_rate / static_cast<double>(nfft);
    spec[k] = std::conj(spec[k]) * band_weight(f) / (std::norm(spec[k]) + eps);
  }
  fft_inplace(spec, true);

  const std::size_t len = n + 2 * guard;
  std::vector<double> inv(len);
  for (std::size_t i = 0; i < len; ++i) {
    inv[i] = spec[(i + nfft - (n - 1) - guard) % nfft].real();
  }

  std::vector<double> sweep_d(sweep.samples.begin(), sweep.samples.end());
  std::vector<double> pulse = convolve(sweep_d, inv);
  double peak = 0.0;
  for (double v : pulse) peak = std::max(peak, std::fabs(v));
  require(peak > 0.0, "inverse_filter: degenerate sweep");
  for (double& v : inv) v /= peak;
  return inv;
}

inline Waveform inverse_filter(const SweepSpec& s) {
  std::vector<double> taps = inverse_filter_taps(s);
  Waveform out;
  out.sample_rate = s.sample_rate;
  out.samples.assign(taps.begin(), taps.end());
  return out;
}

// Deconvolves a sweep recording and crops ir_length samples starting at the
// global magnitude peak (the detected direct path).
inline ImpulseResponse estimate_ir(const Waveform& recording,
                                   const SweepSpec& s, std::size_t ir_length) {
  check_sweep_spec(s);
  check_waveform(recording, "estimate_ir");
  require(recording.sample_rate == s.sample_rate,
          "estimate_ir: recording rate ", recording.sample_rate,
          " does not match sweep rate ", s.sample_rate);
  require(recording.samples.size() >= sweep_length(s),
          "estimate_ir: recording shorter than the sweep");
  require(ir_length >= 1, "estimate_ir: ir_length must be >= 1");

  std::vector<double> rec_d(recording.samples.begin(),
                            recording.samples.end());
  std::vector<double> inv_d = inverse_filter_taps(s, sweep_length(s) / 2);
  std::vector<double> deconv = convolve(rec_d, inv_d);

  std::size_t peak_idx = 0;
  double peak = 0.0;
  for (std::size_t i = 0; i < deconv.size(); ++i) {
    double m = std::fabs(deconv[i]);
    if (m > peak) {
      peak = m;
      peak_idx = i;
    }
  }
  require(peak >= 1e-6, "estimate_ir: silent recording");

  ImpulseResponse ir;
  ir.sample_rate = s.sample_rate;
  ir.direct_path_index = 0;
  ir.taps.assign(ir_length, 0.0f);
  for (std::size_t i = 0; i < ir_length && peak_idx + i < deconv.size(); ++i) {
    ir.taps[i] = static_cast<float>(deconv[peak_idx + i]);
  }
  return ir;
}

}  // namespace revkit

#endif  // REVKIT_ESS_HPP_
