// revkit/mfcc.hpp

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

#ifndef REVKIT_MFCC_HPP_
#define REVKIT_MFCC_HPP_

#include <cmath>
#include <vector>

#include "revkit/common.hpp"
#include "revkit/fft.hpp"

namespace revkit {

constexpr int kNumMels = 23;
constexpr int kNumCeps = 13;
constexpr double kLogFloor = 1e-10;

inline double hz_to_mel(double hz) {
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

inline double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// Triangular mel filterbank over FFT bins 0..nfft/2, endpoints 0 Hz and
// Nyquist.  Each filter's weights are normalized to sum to 1, so a flat
// magnitude spectrum produces equal filter outputs.
class MelFilterbank {
 public:
  MelFilterbank(int n_mels, std::size_t nfft, int sample_rate)
      : n_mels_(n_mels), nfft_(nfft) {
    const double nyquist = sample_rate / 2.0;
    const double mel_hi = hz_to_mel(nyquist);
    std::vector<double> centers(n_mels + 2);
    for (int i = 0; i < n_mels + 2; ++i) {
      centers[i] = mel_to_hz(mel_hi * i / (n_mels + 1));
    }
    const double bin_hz = static_cast<double>(sample_rate) / nfft;
    weights_.assign(n_mels, std::vector<double>(nfft / 2 + 1, 0.0));
    for (int m = 0; m < n_mels; ++m) {
      double lo = centers[m], mid = centers[m + 1], hi = centers[m + 2];
      double sum = 0.0;
      for (std::size_t k = 0; k <= nfft / 2; ++k) {
        double f = k * bin_hz;
        double wgt = 0.0;
        if (f > lo && f < mid) {
          wgt = (f - lo) / (mid - lo);
        } else if (f >= mid && f < hi) {
          wgt = (hi - f) / (hi - mid);
        }
        weights_[m][k] = wgt;
        sum += wgt;
      }
      require(sum > 0.0, "MelFilterbank: filter ", m,
              " covers no FFT bins; nfft too small");
      for (std::size_t k = 0; k <= nfft / 2; ++k) weights_[m][k] /= sum;
    }
  }

  // Filter outputs for one frame's magnitude spectrum.
  std::vector<double> apply(const std::vector<double>& magnitude) const {
    require(magnitude.size() == nfft_ / 2 + 1,
            "MelFilterbank: spectrum size mismatch");
    std::vector<double> out(n_mels_, 0.0);
    for (int m = 0; m < n_mels_; ++m) {
      double acc = 0.0;
      const std::vector<double>& w = weights_[m];
      for (std::size_t k = 0; k < magnitude.size(); ++k) {
        acc += w[k] * magnitude[k];
      }
      out[m] = acc;
    }
    return out;
  }

  int n_mels() const { return n_mels_; }
  std::size_t nfft() const { return nfft_; }
  const std::vector<double>& filter(int m) const { return weights_[m]; }

 private:
  int n_mels_;
  std::size_t nfft_;
  std::vector<std::vector<double>> weights_;
};

// Orthonormal DCT-II matrix rows 0..n_ceps-1 over n_mels inputs.
inline std::vector<std::vector<double>> dct_matrix(int n_ceps, int n_mels) {
  std::vector<std::vector<double>> m(n_ceps, std::vector<double>(n_mels));
  for (int k = 0; k < n_ceps; ++k) {
    double scale = k == 0 ? std::sqrt(1.0 / n_mels) : std::sqrt(2.0 / n_mels);
    for (int n = 0; n < n_mels; ++n) {
      m[k][n] = scale * std::cos(M_PI * k * (2 * n + 1) / (2.0 * n_mels));
    }
  }
  return m;
}

// 13 cepstra per frame: magnitude spectrum -> 23 mel filters -> floored log
// -> orthonormal DCT-II, coefficients 0..12.
class MfccExtractor {
 public:
  MfccExtractor(std::size_t frame_len, int sample_rate, int n_mels = kNumMels,
                int n_ceps = kNumCeps)
      : nfft_(next_pow2(frame_len)),
        bank_(n_mels, nfft_, sample_rate),
        dct_(dct_matrix(n_ceps, n_mels)) {}

  std::vector<double> compute(const std::vector<double>& frame) const {
    std::vector<double> power = power_spectrum(frame, nfft_);
    std::vector<double> magnitude(power.size());
    for (std::size_t k = 0; k < power.size(); ++k) {
      magnitude[k] = std::sqrt(power[k]);
    }
    std::vector<double> mel = bank_.apply(magnitude);
    for (double& e : mel) e = std::log(std::max(e, kLogFloor));
    std::vector<double> ceps(dct_.size());
    for (std::size_t k = 0; k < dct_.size(); ++k) {
      double acc = 0.0;
      for (std::size_t n = 0; n < mel.size(); ++n) acc += dct_[k][n] * mel[n];
      ceps[k] = acc;
    }
    return ceps;
  }

  const MelFilterbank& filterbank() const { return bank_; }
  std::size_t nfft() const { return nfft_; }

 private:
  std::size_t nfft_;
  MelFilterbank bank_;
  std::vector<std::vector<double>> dct_;
};

}  // namespace revkit

#endif  // REVKIT_MFCC_HPP_
