// revkit/feature_pipeline.hpp

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

// Full frontend chain: framing -> MFCC + pitch/PoV -> deltas -> context
// window splicing -> mean/variance normalization.

#ifndef REVKIT_FEATURE_PIPELINE_HPP_
#define REVKIT_FEATURE_PIPELINE_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "revkit/archive.hpp"
#include "revkit/common.hpp"
#include "revkit/frames.hpp"
#include "revkit/mfcc.hpp"
#include "revkit/pitch.hpp"
#include "revkit/wav.hpp"

namespace revkit {

constexpr int kBaseDims = kNumCeps + 2;          // 13 MFCC + pitch + PoV
constexpr int kFeatureDims = 3 * kBaseDims;      // statics + deltas + deltas^2
constexpr int kDeltaHalfWindow = 2;
constexpr double kVarianceFloor = 1e-8;

struct ContextWindowSpec {
  int past = 8;
  int future = 8;

  int width() const { return past + future + 1; }
};

inline void check_window(const ContextWindowSpec& w) {
  require(w.past >= 0 && w.future >= 0,
          "ContextWindowSpec: negative frame counts");
}

// Regression deltas, half-window N=2, edges replicated:
// d_t = sum_n n (c_{t+n} - c_{t-n}) / (2 sum_n n^2).
inline FloatMatrix add_deltas(const FloatMatrix& f) {
  require(f.cols == kBaseDims, "add_deltas: expected ", kBaseDims,
          " columns, got ", f.cols);
  require(f.rows > 0, "add_deltas: empty feature matrix");
  const int T = static_cast<int>(f.rows);
  const int D = static_cast<int>(f.cols);
  double denom = 0.0;
  for (int n = 1; n <= kDeltaHalfWindow; ++n) denom += 2.0 * n * n;

  auto clamp_t = [T](int t) { return t < 0 ? 0 : (t >= T ? T - 1 : t); };
  auto regress = [&](const FloatMatrix& src, int t, int d) {
    double acc = 0.0;
    for (int n = 1; n <= kDeltaHalfWindow; ++n) {
      acc += n * (static_cast<double>(src.at(clamp_t(t + n), d)) -
                  src.at(clamp_t(t - n), d));
    }
    return acc / denom;
  };

  FloatMatrix delta;
  delta.rows = f.rows;
  delta.cols = f.cols;
  delta.data.resize(f.data.size());
  for (int t = 0; t < T; ++t) {
    for (int d = 0; d < D; ++d) {
      delta.at(t, d) = static_cast<float>(regress(f, t, d));
    }
  }

  FloatMatrix out;
  out.rows = f.rows;
  out.cols = static_cast<std::uint32_t>(3 * D);
  out.data.resize(static_cast<std::size_t>(out.rows) * out.cols);
  for (int t = 0; t < T; ++t) {
    for (int d = 0; d < D; ++d) {
      out.at(t, d) = f.at(t, d);
      out.at(t, D + d) = delta.at(t, d);
      out.at(t, 2 * D + d) = static_cast<float>(regress(delta, t, d));
    }
  }
  return out;
}

// Row t of the result concatenates rows t-P .. t+F (edges replicated).
inline FloatMatrix splice(const FloatMatrix& f, const ContextWindowSpec& w) {
  check_window(w);
  require(f.rows > 0, "splice: empty feature matrix");
  const int T = static_cast<int>(f.rows);
  const int D = static_cast<int>(f.cols);
  FloatMatrix out;
  out.rows = f.rows;
  out.cols = static_cast<std::uint32_t>(D * w.width());
  out.data.resize(static_cast<std::size_t>(out.rows) * out.cols);
  for (int t = 0; t < T; ++t) {
    float* dst = out.row(t);
    for (int k = -w.past; k <= w.future; ++k) {
      int src = t + k;
      src = src < 0 ? 0 : (src >= T ? T - 1 : src);
      const float* row = f.row(src);
      for (int d = 0; d < D; ++d) *dst++ = row[d];
    }
  }
  return out;
}

// Per-dimension mean/variance accumulated as (sum, sum of squares, count) so
// partial statistics merge deterministically.
class NormalizationStats {
 public:
  NormalizationStats() = default;
  explicit NormalizationStats(int dims)
      : sum_(dims, 0.0), sumsq_(dims, 0.0) {}

  void accumulate(const FloatMatrix& f) {
    ensure_dims(static_cast<int>(f.cols));
    for (std::uint32_t t = 0; t < f.rows; ++t) {
      const float* row = f.row(t);
      for (std::size_t d = 0; d < sum_.size(); ++d) {
        sum_[d] += row[d];
        sumsq_[d] += static_cast<double>(row[d]) * row[d];
      }
    }
    count_ += f.rows;
  }

  void accumulate_row(const float* row, int dims) {
    ensure_dims(dims);
    for (int d = 0; d < dims; ++d) {
      sum_[d] += row[d];
      sumsq_[d] += static_cast<double>(row[d]) * row[d];
    }
    ++count_;
  }

  void merge(const NormalizationStats& other) {
    if (other.count_ == 0) return;
    ensure_dims(static_cast<int>(other.sum_.size()));
    for (std::size_t d = 0; d < sum_.size(); ++d) {
      sum_[d] += other.sum_[d];
      sumsq_[d] += other.sumsq_[d];
    }
    count_ += other.count_;
  }

  int dims() const { return static_cast<int>(sum_.size()); }
  std::uint64_t count() const { return count_; }

  double mean(int d) const {
    require(count_ > 0, "NormalizationStats: no frames accumulated");
    return sum_[d] / static_cast<double>(count_);
  }

  double variance(int d) const {
    double m = mean(d);
    double v = sumsq_[d] / static_cast<double>(count_) - m * m;
    return v > 0.0 ? v : 0.0;
  }

  void apply_row(float* row) const {
    for (std::size_t d = 0; d < sum_.size(); ++d) {
      double m = mean(static_cast<int>(d));
      double sd =
          std::sqrt(std::max(variance(static_cast<int>(d)), kVarianceFloor));
      row[d] = static_cast<float>((row[d] - m) / sd);
    }
  }

  void apply(FloatMatrix& f) const {
    require(static_cast<int>(f.cols) == dims(),
            "NormalizationStats: dim mismatch (", f.cols, " vs ", dims(), ")");
    for (std::uint32_t t = 0; t < f.rows; ++t) apply_row(f.row(t));
  }

  // Stored as a 2 x dims f32 archive: row 0 mean, row 1 variance.
  void save(const std::string& path) const {
    require(count_ > 0, "NormalizationStats: no frames accumulated");
    FloatMatrix m;
    m.rows = 2;
    m.cols = static_cast<std::uint32_t>(dims());
    m.data.resize(2 * sum_.size());
    for (std::size_t d = 0; d < sum_.size(); ++d) {
      m.data[d] = static_cast<float>(mean(static_cast<int>(d)));
      m.data[sum_.size() + d] =
          static_cast<float>(variance(static_cast<int>(d)));
    }
    write_float_archive(m, path);
  }

  static NormalizationStats load(const std::string& path) {
    FloatMatrix m = read_float_archive(path);
    require(m.rows == 2, "NormalizationStats: '", path,
            "' must have 2 rows (mean, variance)");
    std::vector<double> mean(m.cols), var(m.cols);
    for (std::uint32_t d = 0; d < m.cols; ++d) {
      mean[d] = m.at(0, d);
      var[d] = m.at(1, d);
    }
    return from_moments(mean, var);
  }

  // Reconstructs equivalent sufficient statistics for a nominal count of 1.
  static NormalizationStats from_moments(const std::vector<double>& mean,
                                         const std::vector<double>& var) {
    require(mean.size() == var.size(),
            "NormalizationStats: mean/variance size mismatch");
    NormalizationStats s(static_cast<int>(mean.size()));
    s.count_ = 1;
    for (std::size_t d = 0; d < mean.size(); ++d) {
      s.sum_[d] = mean[d];
      s.sumsq_[d] = var[d] + mean[d] * mean[d];
    }
    return s;
  }

 private:
  void ensure_dims(int dims) {
    if (sum_.empty()) {
      sum_.assign(dims, 0.0);
      sumsq_.assign(dims, 0.0);
    } else {
      require(static_cast<int>(sum_.size()) == dims,
              "NormalizationStats: dim mismatch (", dims, " vs ", sum_.size(),
              ")");
    }
  }

  std::vector<double> sum_;
  std::vector<double> sumsq_;
  std::uint64_t count_ = 0;
};

// 45-dim per-frame features (statics + deltas) before splicing.
inline FloatMatrix compute_base_features(const Waveform& w,
                                         const FrameSpec& fs) {
  check_canonical_rate(w, "compute_base_features");
  std::vector<std::vector<double>> frames = frame_signal(w, fs);
  MfccExtractor mfcc(fs.frame_samples(w.sample_rate), w.sample_rate);
  std::vector<PitchPov> pitch = pitch_pov(w, fs);

  FloatMatrix base;
  base.rows = static_cast<std::uint32_t>(frames.size());
  base.cols = kBaseDims;
  base.data.resize(static_cast<std::size_t>(base.rows) * base.cols);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    std::vector<double> ceps = mfcc.compute(frames[t]);
    float* row = base.row(static_cast<std::uint32_t>(t));
    for (int d = 0; d < kNumCeps; ++d) row[d] = static_cast<float>(ceps[d]);
    row[kNumCeps] = static_cast<float>(pitch[t].pitch);
    row[kNumCeps + 1] = static_cast<float>(pitch[t].pov);
  }
  return add_deltas(base);
}

// Frame -> MFCC/pitch -> deltas -> splice -> optional normalization.
inline FloatMatrix extract_pipeline(const Waveform& w, const FrameSpec& fs,
                                    const ContextWindowSpec& win,
                                    const NormalizationStats* stats = nullptr) {
  FloatMatrix spliced = splice(compute_base_features(w, fs), win);
  if (stats) stats->apply(spliced);
  return spliced;
}

// Fingerprint of the frontend configuration, recorded in model files so a
// model is never fed features from a mismatched pipeline.
inline std::uint64_t feature_config_hash(const FrameSpec& fs,
                                         const ContextWindowSpec& win) {
  return fnv1a64(msg("sr=", kCanonicalSampleRate, ";frame=", fs.frame_len,
                     ";hop=", fs.hop, ";preemph=", fs.preemphasis,
                     ";mels=", kNumMels, ";ceps=", kNumCeps,
                     ";delta=", kDeltaHalfWindow, ";P=", win.past,
                     ";F=", win.future));
}

}  // namespace revkit

#endif  // REVKIT_FEATURE_PIPELINE_HPP_
