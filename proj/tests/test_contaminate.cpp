// tests/test_contaminate.cpp

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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "revkit/contaminate.hpp"
#include "revkit/rng.hpp"
#include "revkit/synth_corpus.hpp"
#include "testing_util.hpp"

using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
using namespace revkit;
using testutil::TempDir;

namespace {

Waveform random_wave(std::size_t n, std::uint64_t seed, float scale = 0.3f) {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(n);
  Rng rng(seed);
  for (float& s : w.samples) s = scale * static_cast<float>(rng.gaussian());
  return w;
}

Waveform sine_wave(double freq, double amp, std::size_t n) {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.samples[i] = static_cast<float>(
        amp * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / 16000.0));
  }
  return w;
}

ImpulseResponse unit_pulse(std::size_t len, std::size_t at) {
  ImpulseResponse h;
  h.sample_rate = 16000;
  h.taps.assign(len, 0.0f);
  h.taps[at] = 1.0f;
  h.direct_path_index = at;
  return h;
}

// Writes a two-utterance float32 corpus and returns its manifest.
Manifest tiny_corpus(const TempDir& tmp, const PhoneSet& ps) {
  Manifest m;
  for (int i = 0; i < 2; ++i) {
    Waveform w = random_wave(i == 0 ? 3000 : 4000, 100 + i);
    ManifestRecord rec;
    rec.utterance_id = "u" + std::to_string(i + 1);
    rec.audio_path = tmp.file(rec.utterance_id + ".wav");
    rec.transcript = {0, 1, 0};
    rec.condition = Condition::kClean;
    write_wav(w, rec.audio_path, WavEncoding::kFloat32);
    m.records.push_back(rec);
  }
  return m;
}

}  // namespace

TEST_CASE("convolving with a unit pulse reproduces the input", "[contaminate]") {
  Waveform x = random_wave(500, 1);

  SECTION("pulse at zero, full output") {
    Waveform y = convolve_ir(x, unit_pulse(1, 0), TrimPolicy::kFull);
    REQUIRE(y.samples.size() == x.samples.size());
    REQUIRE(y.samples == x.samples);
  }

  SECTION("delayed pulse with same_length trim cancels the delay") {
    Waveform y = convolve_ir(x, unit_pulse(6, 5), TrimPolicy::kSameLength);
    REQUIRE(y.samples.size() == x.samples.size());
    REQUIRE(y.samples == x.samples);
  }
}

TEST_CASE("convolve_ir matches the quadratic-time oracle", "[contaminate]") {
  Waveform x = random_wave(64, 2);
  ImpulseResponse h;
  h.sample_rate = 16000;
  h.taps.resize(16);
  Rng rng(3);
  for (float& t : h.taps) t = static_cast<float>(rng.gaussian());
  h.direct_path_index = peak_magnitude_index(h.taps);

  std::vector<double> want = testutil::direct_convolve(x.samples, h.taps);

  Waveform full = convolve_ir(x, h, TrimPolicy::kFull);
  REQUIRE(full.samples.size() == want.size());
  CHECK(testutil::rel_l2(full.samples, want) <= 1e-10);

  Waveform same = convolve_ir(x, h, TrimPolicy::kSameLength);
  REQUIRE(same.samples.size() == x.samples.size());
  std::vector<double> shifted(want.begin() + h.direct_path_index,
                              want.begin() + h.direct_path_index + 64);
  CHECK(testutil::rel_l2(same.samples, shifted) <= 1e-10);
}

TEST_CASE("same_length trim zero-pads past the full convolution", "[contaminate]") {
  // With the direct path late in a long IR, the trimmed window extends past
  // the end of the full convolution and must be padded with zeros.
  Waveform x = random_wave(10, 4);
  ImpulseResponse h = unit_pulse(30, 25);
  Waveform y = convolve_ir(x, h, TrimPolicy::kSameLength);
  REQUIRE(y.samples.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    std::size_t full_idx = i + 25;
    if (full_idx < 39) {
      CHECK(y.samples[i] == x.samples[i]);
    } else {
      CHECK(y.samples[i] == 0.0f);
    }
  }
}

TEST_CASE("convolve_ir validates its inputs", "[contaminate]") {
  Waveform x = random_wave(100, 5);
  ImpulseResponse h = unit_pulse(4, 0);

  Waveform empty;
  empty.sample_rate = 16000;
  REQUIRE_THROWS(convolve_ir(empty, h, TrimPolicy::kFull));

  Waveform other = x;
  other.sample_rate = 8000;
  REQUIRE_THROWS_WITH(convolve_ir(other, h, TrimPolicy::kFull),
                      ContainsSubstring("sample rate mismatch"));
}

TEST_CASE("compute_snr recovers known power ratios", "[contaminate]") {
  SECTION("equal power gives 0 dB") {
    Waveform s = random_wave(2048, 6);
    Waveform n = s;
    CHECK(compute_snr(s, n) == Approx(0.0).margin(1e-12));
  }

  SECTION("amplitude ratio 10 gives 20 dB") {
    Waveform s = sine_wave(100.0, 1.0, 16000);
    Waveform n = sine_wave(250.0, 0.1, 16000);
    CHECK(compute_snr(s, n) == Approx(20.0).margin(1e-6));
  }

  SECTION("silent signal floors at -120 dB") {
    Waveform s;
    s.sample_rate = 16000;
    s.samples.assign(100, 0.0f);
    Waveform n = random_wave(100, 7);
    CHECK(compute_snr(s, n) == -120.0);
  }

  SECTION("deeply buried signal floors at -120 dB") {
    Waveform s = sine_wave(100.0, 1e-9, 16000);
    Waveform n = sine_wave(100.0, 1.0, 16000);
    CHECK(compute_snr(s, n) == -120.0);
  }

  SECTION("zero-power noise is an error") {
    Waveform s = random_wave(100, 8);
    Waveform n;
    n.sample_rate = 16000;
    n.samples.assign(100, 0.0f);
    REQUIRE_THROWS_WITH(compute_snr(s, n),
                        ContainsSubstring("zero-power noise"));
  }
}

TEST_CASE("mix_at_snr solves for the exact gain", "[contaminate]") {
  SECTION("equal power at 0 dB means unit gain") {
    Waveform s = random_wave(4096, 9);
    MixReport rep;
    mix_at_snr(s, s, 0.0, 0, &rep);
    CHECK(rep.alpha == Approx(1.0).margin(1e-9));
    CHECK(rep.achieved_snr_db == Approx(0.0).margin(1e-9));
  }

  SECTION("unit powers at 10 dB give alpha 10^-0.5") {
    Waveform s;
    s.sample_rate = 16000;
    s.samples.assign(1000, 1.0f);
    Waveform n = s;
    MixReport rep;
    mix_at_snr(s, n, 10.0, 0, &rep);
    CHECK(rep.alpha == Approx(std::pow(10.0, -0.5)).margin(1e-9));
  }

  SECTION("achieved SNR matches the request across random cases") {
    Rng rng(10);
    for (int c = 0; c < 5; ++c) {
      Waveform s = random_wave(3000 + 500 * c, 20 + c);
      Waveform n = random_wave(2000, 40 + c, 0.7f);
      double target = rng.uniform(-5.0, 30.0);
      MixReport rep;
      Waveform mixed = mix_at_snr(s, n, target, 123 + c, &rep);

      CHECK(std::abs(rep.achieved_snr_db - target) <= 1e-6);

      // Independent check: measure the SNR of what was actually added.
      Waveform added;
      added.sample_rate = 16000;
      added.samples.resize(s.samples.size());
      for (std::size_t i = 0; i < s.samples.size(); ++i)
        added.samples[i] = mixed.samples[i] - s.samples[i];
      CHECK(std::abs(compute_snr(s, added) - target) <= 0.05);
    }
  }

  SECTION("noise extends cyclically from the offset") {
    Waveform s = random_wave(250, 11);
    Waveform n = random_wave(100, 12);
    MixReport rep;
    Waveform mixed = mix_at_snr(s, n, 5.0, 40, &rep);
    CHECK(rep.noise_offset == 40);
    for (std::size_t i : {0ul, 59ul, 60ul, 199ul, 249ul}) {
      float seg = n.samples[(40 + i) % 100];
      CHECK(mixed.samples[i] - s.samples[i] ==
            Approx(rep.alpha * seg).margin(1e-6));
    }
  }

  SECTION("input validation") {
    Waveform s = random_wave(100, 13);
    Waveform z;
    z.sample_rate = 16000;
    z.samples.assign(50, 0.0f);
    REQUIRE_THROWS_WITH(mix_at_snr(s, z, 10.0, 0),
                        ContainsSubstring("zero-power noise"));
    REQUIRE_THROWS_WITH(mix_at_snr(z, s, 10.0, 0),
                        ContainsSubstring("zero-power signal"));
    REQUIRE_THROWS_WITH(
        mix_at_snr(s, s, std::numeric_limits<double>::quiet_NaN(), 0),
        ContainsSubstring("non-finite"));
    Waveform other = s;
    other.sample_rate = 8000;
    REQUIRE_THROWS_WITH(mix_at_snr(s, other, 10.0, 0),
                        ContainsSubstring("sample rate mismatch"));
  }
}

TEST_CASE("contaminate_corpus tags reverb-only output as rev", "[contaminate]") {
  TempDir tmp("cont");
  PhoneSet ps(std::vector<std::string>{"sil", "aa"});
  Manifest m = tiny_corpus(tmp, ps);

  ContaminationSpec spec;
  spec.ir = synth_ir(0.3, 2000, 16000, 0, 77);
  std::vector<UtteranceMix> mixes;
  std::string out_dir = tmp.file("rev");
  Manifest out = contaminate_corpus(m, ps, spec, out_dir, &mixes);

  REQUIRE(out.size() == 2);
  CHECK(mixes.empty());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const ManifestRecord& rec = out.records[i];
    CHECK(rec.condition == Condition::kRev);
    CHECK(rec.transcript == m.records[i].transcript);

    Waveform in = read_wav(m.records[i].audio_path);
    Waveform got = read_wav(rec.audio_path);
    REQUIRE(got.samples.size() == in.samples.size());
    Waveform want = convolve_ir(in, spec.ir, TrimPolicy::kSameLength);
    REQUIRE(got.samples == want.samples);
  }

  // The retagged manifest is saved alongside the audio.
  Manifest reloaded =
      load_manifest((std::filesystem::path(out_dir) / "manifest.tsv").string(),
                    ps);
  REQUIRE(reloaded.size() == 2);
  CHECK(reloaded.records[0].condition == Condition::kRev);
}

TEST_CASE("contaminate_corpus mixes noise at the target SNR", "[contaminate]") {
  TempDir tmp("cont");
  PhoneSet ps(std::vector<std::string>{"sil", "aa"});
  Manifest m = tiny_corpus(tmp, ps);

  ContaminationSpec spec;
  spec.ir = synth_ir(0.3, 2000, 16000, 0, 77);
  spec.has_noise = true;
  spec.noise = make_pink_noise(16000, 16000, 5, 0.1);
  spec.target_snr_db = 10.0;
  spec.noise_offset_seed = 21;

  std::vector<UtteranceMix> mixes;
  Manifest out = contaminate_corpus(m, ps, spec, tmp.file("revn"), &mixes);

  REQUIRE(out.size() == 2);
  REQUIRE(mixes.size() == 2);
  double sum = 0.0;
  for (const UtteranceMix& mix : mixes) {
    CHECK(std::abs(mix.report.achieved_snr_db - 10.0) <= 0.05);
    sum += mix.report.achieved_snr_db;
  }
  CHECK(std::abs(sum / 2.0 - 10.0) <= 0.05);
  for (const ManifestRecord& rec : out.records)
    CHECK(rec.condition == Condition::kRevNoise);

  SECTION("same spec and seed reproduce identical audio") {
    Manifest again = contaminate_corpus(m, ps, spec, tmp.file("revn2"));
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(testutil::read_file_bytes(out.records[i].audio_path) ==
            testutil::read_file_bytes(again.records[i].audio_path));
    }
  }

  SECTION("SNR jitter stays inside the band and is deterministic") {
    ContaminationSpec js = spec;
    js.snr_jitter_db = 2.0;
    std::vector<UtteranceMix> jm1, jm2;
    contaminate_corpus(m, ps, js, tmp.file("j1"), &jm1);
    contaminate_corpus(m, ps, js, tmp.file("j2"), &jm2);
    REQUIRE(jm1.size() == 2);
    for (std::size_t i = 0; i < jm1.size(); ++i) {
      CHECK(jm1[i].target_snr_db >= 8.0 - 1e-9);
      CHECK(jm1[i].target_snr_db <= 12.0 + 1e-9);
      CHECK(jm1[i].target_snr_db == jm2[i].target_snr_db);
      CHECK(std::abs(jm1[i].report.achieved_snr_db - jm1[i].target_snr_db) <=
            0.05);
    }
  }
}

TEST_CASE("zero-amplitude noise track degenerates to pure reverb",
          "[contaminate]") {
  TempDir tmp("cont");
  PhoneSet ps(std::vector<std::string>{"sil", "aa"});
  Manifest m = tiny_corpus(tmp, ps);

  ContaminationSpec rev;
  rev.ir = synth_ir(0.3, 2000, 16000, 0, 77);
  Manifest out_rev = contaminate_corpus(m, ps, rev, tmp.file("rev"));

  ContaminationSpec zn = rev;
  zn.has_noise = true;
  zn.noise.sample_rate = 16000;
  zn.noise.samples.assign(8000, 0.0f);
  std::vector<UtteranceMix> mixes;
  Manifest out_zn = contaminate_corpus(m, ps, zn, tmp.file("zn"), &mixes);

  REQUIRE(mixes.size() == 2);
  for (const UtteranceMix& mix : mixes) {
    CHECK(mix.report.alpha == 0.0);
    CHECK(std::isinf(mix.report.achieved_snr_db));
  }
  for (std::size_t i = 0; i < out_rev.size(); ++i) {
    Waveform a = read_wav(out_rev.records[i].audio_path);
    Waveform b = read_wav(out_zn.records[i].audio_path);
    REQUIRE(a.samples == b.samples);
  }
  // Only the condition tag differs.
  CHECK(out_zn.records[0].condition == Condition::kRevNoise);
}

TEST_CASE("contaminate_corpus reports the failing utterance", "[contaminate]") {
  TempDir tmp("cont");
  PhoneSet ps(std::vector<std::string>{"sil", "aa"});
  Manifest m;
  ManifestRecord rec;
  rec.utterance_id = "ghost";
  rec.audio_path = tmp.file("missing.wav");
  rec.transcript = {0, 1, 0};
  m.records.push_back(rec);

  ContaminationSpec spec;
  spec.ir = unit_pulse(4, 0);
  REQUIRE_THROWS_WITH(contaminate_corpus(m, ps, spec, tmp.file("out")),
                      ContainsSubstring("utterance 'ghost'"));
}

TEST_CASE("mix reports append as tab-separated rows", "[contaminate]") {
  TempDir tmp("cont");
  std::vector<UtteranceMix> mixes(2);
  mixes[0].utterance_id = "u1";
  mixes[0].target_snr_db = 10.0;
  mixes[0].report.alpha = 0.5;
  mixes[0].report.achieved_snr_db = 10.01;
  mixes[0].report.noise_offset = 42;
  mixes[1].utterance_id = "u2";
  mixes[1].target_snr_db = 9.5;
  mixes[1].report.alpha = 0.25;
  mixes[1].report.achieved_snr_db = 9.49;
  mixes[1].report.noise_offset = 7;

  std::string path = tmp.file("mix_report.tsv");
  append_mix_report(mixes, path);
  append_mix_report(mixes, path);

  std::ifstream in(path);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    int tabs = 0;
    for (char c : line)
      if (c == '\t') ++tabs;
    CHECK(tabs == 4);
  }
  CHECK(rows == 4);
}
