// revkit/synth_corpus.hpp

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

// Synthetic speech-like corpus: each phone is a fixed two-formant recipe with
// per-instance jitter, utterances concatenate enveloped phone segments with
// leading/trailing silence, and oracle frame-state labels fall out of the
// construction.

#ifndef REVKIT_SYNTH_CORPUS_HPP_
#define REVKIT_SYNTH_CORPUS_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "revkit/archive.hpp"
#include "revkit/common.hpp"
#include "revkit/fft.hpp"
#include "revkit/frames.hpp"
#include "revkit/hmm.hpp"
#include "revkit/manifest.hpp"
#include "revkit/rng.hpp"
#include "revkit/wav.hpp"

namespace revkit {

struct SyntheticCorpusSpec {
  int content_phones = 10;
  int utterances = 100;
  int min_phones = 5;
  int max_phones = 15;
  double min_duration = 0.060;      // per content phone, seconds
  double max_duration = 0.200;
  double sil_min_duration = 0.100;  // leading/trailing silence
  double sil_max_duration = 0.200;
  double attack_decay = 0.010;      // raised-cosine ramps, seconds
  double noise_level = 0.05;        // in-phone noise, relative to formants
  double sil_noise_level = 0.05;    // silence floor noise
  double freq_jitter = 0.04;        // relative, per instance
  double master_amplitude = 0.25;
  std::uint64_t seed = 1;
  std::string id_prefix = "utt";
  int sample_rate = kCanonicalSampleRate;
};

// Silence is entry 0; content phones are p01..pNN.
inline PhoneSet synthetic_phone_set(int content_phones) {
  require(content_phones >= 1, "synthetic_phone_set: need >= 1 content phone");
  std::vector<std::string> symbols;
  symbols.push_back("sil");
  for (int i = 1; i <= content_phones; ++i) {
    std::string n = std::to_string(i);
    symbols.push_back(msg("p", n.size() < 2 ? "0" : "", n));
  }
  return PhoneSet(std::move(symbols));
}

struct PhoneRecipe {
  double f1 = 0.0, f2 = 0.0;  // formant frequencies, Hz
  double a1 = 1.0, a2 = 0.7;  // relative amplitudes
};

// Deterministic recipe table keyed by the phone's index in the PhoneSet
// (content phones start at 1; 0 is silence).
inline PhoneRecipe phone_recipe(int phone_index) {
  require(phone_index >= 1, "phone_recipe: silence has no recipe");
  PhoneRecipe r;
  r.f1 = 250.0 + 65.0 * phone_index;
  r.f2 = 850.0 + 145.0 * phone_index;
  r.a1 = 1.0;
  r.a2 = 0.55 + 0.03 * (phone_index % 5);
  return r;
}

struct PhoneSegment {
  int phone = 0;
  std::size_t start = 0;  // samples
  std::size_t end = 0;
};

// One utterance's audio plus its construction-time segmentation.
struct SynthUtterance {
  Waveform audio;
  std::vector<int> transcript;
  std::vector<PhoneSegment> segments;
};

inline SynthUtterance synth_utterance(const SyntheticCorpusSpec& spec,
                                      Rng& rng) {
  const int sr = spec.sample_rate;
  SynthUtterance u;
  u.audio.sample_rate = sr;

  int n_phones = spec.min_phones +
                 static_cast<int>(rng.index(spec.max_phones - spec.min_phones + 1));
  std::vector<int> phones;
  phones.push_back(0);  // leading silence
  for (int i = 0; i < n_phones; ++i) {
    phones.push_back(1 + static_cast<int>(rng.index(spec.content_phones)));
  }
  phones.push_back(0);  // trailing silence
  u.transcript = phones;

  const std::size_t ramp =
      static_cast<std::size_t>(std::llround(spec.attack_decay * sr));
  for (int phone : phones) {
    double dur = phone == 0
                     ? rng.uniform(spec.sil_min_duration, spec.sil_max_duration)
                     : rng.uniform(spec.min_duration, spec.max_duration);
    std::size_t n = static_cast<std::size_t>(std::llround(dur * sr));
    PhoneSegment seg;
    seg.phone = phone;
    seg.start = u.audio.samples.size();
    seg.end = seg.start + n;

    std::vector<float> wave(n);
    if (phone == 0) {
      for (std::size_t i = 0; i < n; ++i) {
        wave[i] = static_cast<float>(spec.sil_noise_level * rng.gaussian());
      }
    } else {
      PhoneRecipe r = phone_recipe(phone);
      double f1 = r.f1 * (1.0 + rng.uniform(-spec.freq_jitter, spec.freq_jitter));
      double f2 = r.f2 * (1.0 + rng.uniform(-spec.freq_jitter, spec.freq_jitter));
      double phase1 = rng.uniform(0.0, 2.0 * M_PI);
      double phase2 = rng.uniform(0.0, 2.0 * M_PI);
      double amp = rng.uniform(0.7, 1.0);
      for (std::size_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / sr;
        double v = r.a1 * std::sin(2.0 * M_PI * f1 * t + phase1) +
                   r.a2 * std::sin(2.0 * M_PI * f2 * t + phase2) +
                   spec.noise_level * rng.gaussian();
        double env = 1.0;
        if (ramp > 0 && i < ramp) {
          env = 0.5 - 0.5 * std::cos(M_PI * i / static_cast<double>(ramp));
        } else if (ramp > 0 && n - 1 - i < ramp) {
          env = 0.5 - 0.5 * std::cos(M_PI * (n - 1 - i) /
                                     static_cast<double>(ramp));
        }
        wave[i] = static_cast<float>(amp * env * v);
      }
    }
    u.audio.samples.insert(u.audio.samples.end(), wave.begin(), wave.end());
    u.segments.push_back(seg);
  }

  for (float& s : u.audio.samples) {
    s = static_cast<float>(s * spec.master_amplitude);
  }
  return u;
}

// Frame-state labels from the construction: a frame belongs to the segment
// containing its center sample, and each segment splits into thirds over the
// phone's three states.
inline std::vector<std::uint32_t> oracle_labels(
    const SynthUtterance& u, const FrameSpec& fs = FrameSpec()) {
  const int sr = u.audio.sample_rate;
  const std::size_t flen = fs.frame_samples(sr);
  const std::size_t hop = fs.hop_samples(sr);
  const std::size_t T = num_frames(u.audio.samples.size(), fs, sr);
  std::vector<std::uint32_t> labels(T);
  std::size_t seg = 0;
  for (std::size_t t = 0; t < T; ++t) {
    std::size_t center = t * hop + flen / 2;
    while (seg + 1 < u.segments.size() && center >= u.segments[seg].end) ++seg;
    const PhoneSegment& s = u.segments[seg];
    std::size_t len = s.end - s.start;
    int third = static_cast<int>(kStatesPerPhone * (center - s.start) / len);
    if (third >= kStatesPerPhone) third = kStatesPerPhone - 1;
    labels[t] = static_cast<std::uint32_t>(hmm_state(s.phone, third));
  }
  return labels;
}

// Writes WAVs, oracle label archives, a phones file, and the manifest.
// Deterministic in the seed: every utterance draws from its own stream.
inline Manifest synth_corpus(const SyntheticCorpusSpec& spec,
                             const std::string& out_dir) {
  require(spec.utterances >= 1, "synth_corpus: need >= 1 utterance");
  require(spec.min_phones >= 1 && spec.min_phones <= spec.max_phones,
          "synth_corpus: bad phones-per-utterance range");
  PhoneSet phones = synthetic_phone_set(spec.content_phones);
  for (int i = 1; i <= spec.content_phones; ++i) {
    require(phone_recipe(i).f2 < 0.5 * spec.sample_rate,
            "synth_corpus: formant above Nyquist for phone ", i);
  }

  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "wav");
  fs::create_directories(fs::path(out_dir) / "labels");
  phones.save((fs::path(out_dir) / "phones.txt").string());

  Manifest manifest;
  for (int i = 0; i < spec.utterances; ++i) {
    std::string num = std::to_string(i + 1);
    std::string id = msg(spec.id_prefix, std::string(4 - std::min<std::size_t>(
                                             4, num.size()), '0'), num);
    Rng rng(derive_seed(spec.seed, id));
    SynthUtterance u = synth_utterance(spec, rng);

    ManifestRecord rec;
    rec.utterance_id = id;
    rec.transcript = u.transcript;
    rec.condition = Condition::kClean;
    rec.audio_path = (fs::path(out_dir) / "wav" / (id + ".wav")).string();
    rec.oracle_labels_path =
        (fs::path(out_dir) / "labels" / (id + ".rvk")).string();
    write_wav(u.audio, rec.audio_path, WavEncoding::kFloat32);
    write_u32_archive(oracle_labels(u), rec.oracle_labels_path);
    manifest.records.push_back(std::move(rec));
  }
  save_manifest(manifest, phones,
                (fs::path(out_dir) / "manifest.tsv").string());
  return manifest;
}

// Seeded 1/f noise, used as the background track for the noisy condition.
inline Waveform make_pink_noise(std::size_t length, int sample_rate,
                                std::uint64_t seed, double rms = 0.1) {
  require(length >= 2, "make_pink_noise: length too short");
  const std::size_t n = next_pow2(length);
  std::vector<std::complex<double>> spec(n, {0.0, 0.0});
  Rng rng(seed);
  for (std::size_t k = 1; k <= n / 2; ++k) {
    double mag = 1.0 / std::sqrt(static_cast<double>(k));
    double phase = rng.uniform(0.0, 2.0 * M_PI);
    spec[k] = std::polar(mag, phase);
    if (k < n / 2) spec[n - k] = std::conj(spec[k]);
  }
  fft_inplace(spec, true);

  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(length);
  double power = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    double v = spec[i].real();
    w.samples[i] = static_cast<float>(v);
    power += v * v;
  }
  double scale = rms / std::sqrt(power / length);
  for (float& s : w.samples) s = static_cast<float>(s * scale);
  return w;
}

}  // namespace revkit

#endif  // REVKIT_SYNTH_CORPUS_HPP_
