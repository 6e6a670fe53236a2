// revkit/contaminate.hpp

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

// Contamination: y(t) = x(t) * h(t) + alpha n(t), with alpha calibrated so
// the mix hits a target SNR.

#ifndef REVKIT_CONTAMINATE_HPP_
#define REVKIT_CONTAMINATE_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "revkit/common.hpp"
#include "revkit/fft.hpp"
#include "revkit/ir.hpp"
#include "revkit/manifest.hpp"
#include "revkit/rng.hpp"
#include "revkit/wav.hpp"

namespace revkit {

enum class TrimPolicy { kFull, kSameLength };

// SNR of a silent signal is reported as this floor instead of -inf.
constexpr double kSilentSnrDb = -120.0;

inline double mean_power(const std::vector<float>& samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (float s : samples) acc += static_cast<double>(s) * s;
  return acc / static_cast<double>(samples.size());
}

// Full linear convolution, or the |x|-sample window starting at the IR's
// anchor index so the output stays time-aligned with x.
inline Waveform convolve_ir(const Waveform& x, const ImpulseResponse& h,
                            TrimPolicy trim) {
  check_waveform(x, "convolve_ir");
  check_ir(h, "convolve_ir");
  require(!x.samples.empty(), "convolve_ir: empty input");
  require(x.sample_rate == h.sample_rate, "convolve_ir: sample rate mismatch (",
          x.sample_rate, " vs ", h.sample_rate, ")");

  std::vector<double> xd(x.samples.begin(), x.samples.end());
  std::vector<double> hd(h.taps.begin(), h.taps.end());
  std::vector<double> full = convolve(xd, hd);

  Waveform out;
  out.sample_rate = x.sample_rate;
  if (trim == TrimPolicy::kFull) {
    out.samples.assign(full.begin(), full.end());
  } else {
    out.samples.resize(x.samples.size());
    for (std::size_t i = 0; i < x.samples.size(); ++i) {
      std::size_t j = i + h.direct_path_index;
      out.samples[i] = j < full.size() ? static_cast<float>(full[j]) : 0.0f;
    }
  }
  return out;
}

inline double compute_snr(const Waveform& signal, const Waveform& noise) {
  require(!signal.samples.empty() && !noise.samples.empty(),
          "compute_snr: empty input");
  double ps = mean_power(signal.samples);
  double pn = mean_power(noise.samples);
  require(pn > 0.0, "compute_snr: zero-power noise");
  if (ps <= 0.0) return kSilentSnrDb;
  return std::max(10.0 * std::log10(ps / pn), kSilentSnrDb);
}

struct MixReport {
  double alpha = 0.0;
  double achieved_snr_db = 0.0;
  std::size_t noise_offset = 0;
};

// Adds noise (cyclically extended from `offset`) scaled to hit target_snr_db:
// alpha = sqrt( P_signal / (P_noise 10^(snr/10)) ).
inline Waveform mix_at_snr(const Waveform& reverbed, const Waveform& noise,
                           double target_snr_db, std::size_t offset,
                           MixReport* report = nullptr) {
  check_waveform(reverbed, "mix_at_snr");
  check_waveform(noise, "mix_at_snr");
  require(!reverbed.samples.empty(), "mix_at_snr: empty signal");
  require(!noise.samples.empty(), "mix_at_snr: empty noise");
  require(reverbed.sample_rate == noise.sample_rate,
          "mix_at_snr: sample rate mismatch");
  require(std::isfinite(target_snr_db), "mix_at_snr: non-finite target SNR");

  const std::size_t n = reverbed.samples.size();
  Waveform segment;
  segment.sample_rate = noise.sample_rate;
  segment.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    segment.samples[i] = noise.samples[(offset + i) % noise.samples.size()];
  }

  double ps = mean_power(reverbed.samples);
  double pn = mean_power(segment.samples);
  require(pn > 0.0, "mix_at_snr: zero-power noise");
  require(ps > 0.0, "mix_at_snr: zero-power signal");
  double alpha = std::sqrt(ps / (pn * std::pow(10.0, target_snr_db / 10.0)));

  Waveform out;
  out.sample_rate = reverbed.sample_rate;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.samples[i] = static_cast<float>(
        reverbed.samples[i] + alpha * static_cast<double>(segment.samples[i]));
  }
  if (report) {
    report->alpha = alpha;
    report->noise_offset = offset;
    Waveform scaled;
    scaled.sample_rate = segment.sample_rate;
    scaled.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      scaled.samples[i] = static_cast<float>(alpha * segment.samples[i]);
    }
    report->achieved_snr_db = compute_snr(reverbed, scaled);
  }
  return out;
}

struct ContaminationSpec {
  ImpulseResponse ir;
  bool has_noise = false;
  Waveform noise;
  double target_snr_db = 10.0;
  double snr_jitter_db = 0.0;  // uniform +-jitter around the target
  std::uint64_t noise_offset_seed = 0;
  TrimPolicy trim = TrimPolicy::kSameLength;
};

struct UtteranceMix {
  std::string utterance_id;
  double target_snr_db = 0.0;
  MixReport report;
};

// Convolves every utterance (and mixes noise when present) into out_dir,
// returning the retagged manifest.  Audio is written as float32 WAV.
inline Manifest contaminate_corpus(const Manifest& manifest,
                                   const PhoneSet& phones,
                                   const ContaminationSpec& spec,
                                   const std::string& out_dir,
                                   std::vector<UtteranceMix>* mixes = nullptr) {
  check_ir(spec.ir, "contaminate_corpus");
  std::filesystem::create_directories(out_dir);
  double noise_power =
      spec.has_noise ? mean_power(spec.noise.samples) : 0.0;
  Condition tag = spec.has_noise ? Condition::kRevNoise : Condition::kRev;

  Manifest out;
  for (const ManifestRecord& rec : manifest.records) {
    try {
      Waveform x = read_wav(rec.audio_path);
      require(x.sample_rate == spec.ir.sample_rate,
              "sample rate mismatch with IR");
      Waveform y = convolve_ir(x, spec.ir, spec.trim);

      UtteranceMix mix;
      mix.utterance_id = rec.utterance_id;
      mix.target_snr_db = spec.target_snr_db;
      if (spec.has_noise && noise_power > 0.0) {
        std::size_t offset =
            derive_seed(spec.noise_offset_seed, rec.utterance_id) %
            spec.noise.samples.size();
        if (spec.snr_jitter_db > 0.0) {
          Rng jitter(derive_seed(spec.noise_offset_seed,
                                 msg("snr:", rec.utterance_id)));
          mix.target_snr_db +=
              jitter.uniform(-spec.snr_jitter_db, spec.snr_jitter_db);
        }
        y = mix_at_snr(y, spec.noise, mix.target_snr_db, offset, &mix.report);
      } else if (spec.has_noise) {
        // Zero-amplitude noise track: alpha = 0, pure reverberation.
        mix.report.alpha = 0.0;
        mix.report.achieved_snr_db = std::numeric_limits<double>::infinity();
        mix.report.noise_offset = 0;
      }
      if (mixes && spec.has_noise) mixes->push_back(mix);

      ManifestRecord out_rec = rec;
      out_rec.condition = tag;
      out_rec.audio_path =
          (std::filesystem::path(out_dir) / (rec.utterance_id + ".wav"))
              .string();
      write_wav(y, out_rec.audio_path, WavEncoding::kFloat32);
      out.records.push_back(std::move(out_rec));
    } catch (const std::exception& e) {
      fail("contaminate_corpus: utterance '", rec.utterance_id,
           "': ", e.what());
    }
  }

  save_manifest(out, phones,
                (std::filesystem::path(out_dir) / "manifest.tsv").string());
  return out;
}

inline void append_mix_report(const std::vector<UtteranceMix>& mixes,
                              const std::string& path) {
  std::ofstream os(path, std::ios::app);
  require(os.good(), "append_mix_report: cannot open '", path, "'");
  for (const UtteranceMix& m : mixes) {
    os << m.utterance_id << '\t' << m.target_snr_db << '\t' << m.report.alpha
       << '\t' << m.report.achieved_snr_db << '\t' << m.report.noise_offset
       << '\n';
  }
}

}  // namespace revkit

#endif  // REVKIT_CONTAMINATE_HPP_
