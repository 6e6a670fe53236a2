// tests/test_align.cpp

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
#include <set>
#include <string>
#include <vector>

#include "revkit/align.hpp"
#include "revkit/gmm.hpp"
#include "revkit/hmm.hpp"
#include "revkit/rng.hpp"
#include "testing_util.hpp"

using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
using namespace revkit;
using testutil::TempDir;

namespace {

constexpr int kDim = 4;

// Single-Gaussian model whose state means sit sep apart along every axis.
GmmAcousticModel known_model(int num_states, double sep) {
  GmmAcousticModel m;
  m.dim = kDim;
  m.states.resize(num_states);
  for (int s = 0; s < num_states; ++s) {
    DiagGmm& g = m.states[s];
    g.weights = {1.0};
    g.means.assign(1, std::vector<double>(kDim, sep * s));
    g.vars.assign(1, std::vector<double>(kDim, 1.0));
  }
  return m;
}

struct SampledUtterance {
  FloatMatrix feats;
  std::vector<std::uint32_t> states;
};

// Samples state durations (geometric, p=0.5, capped) and then frames from
// the per-state Gaussians.
SampledUtterance sample_utterance(const GmmAcousticModel& model,
                                  const std::vector<int>& transcript,
                                  Rng& rng) {
  std::vector<int> chain = expand_transcript(transcript);
  SampledUtterance out;
  for (int s : chain) {
    int dur = 1;
    while (dur < 8 && rng.uniform() < 0.5) ++dur;
    for (int k = 0; k < dur; ++k)
      out.states.push_back(static_cast<std::uint32_t>(s));
  }
  out.feats.rows = static_cast<std::uint32_t>(out.states.size());
  out.feats.cols = kDim;
  out.feats.data.resize(out.states.size() * kDim);
  for (std::size_t t = 0; t < out.states.size(); ++t) {
    const DiagGmm& g = model.states[out.states[t]];
    for (int d = 0; d < kDim; ++d) {
      out.feats.data[t * kDim + d] = static_cast<float>(
          g.means[0][d] + std::sqrt(g.vars[0][d]) * rng.gaussian());
    }
  }
  return out;
}

FloatMatrix grouped_thirds() {
  // 9 frames in three constant groups, one per HMM state.
  FloatMatrix f;
  f.rows = 9;
  f.cols = 2;
  f.data.resize(18);
  for (std::uint32_t t = 0; t < 9; ++t) {
    f.row(t)[0] = static_cast<float>(t / 3);
    f.row(t)[1] = static_cast<float>(10 * (t / 3 + 1));
  }
  return f;
}

}  // namespace

TEST_CASE("hmm state numbering is three states per phone", "[align]") {
  CHECK(kStatesPerPhone == 3);
  CHECK(hmm_state(0, 0) == 0);
  CHECK(hmm_state(2, 1) == 7);
  CHECK(hmm_state_phone(7) == 2);
  CHECK(hmm_state_pos(7) == 1);

  std::vector<int> chain = expand_transcript({1, 0});
  REQUIRE(chain == std::vector<int>{3, 4, 5, 0, 1, 2});
}

TEST_CASE("legal alignment check accepts chains and rejects jumps", "[align]") {
  std::vector<int> tr = {1};
  CHECK(is_legal_alignment({3, 3, 4, 5, 5}, tr));
  CHECK(!is_legal_alignment({3, 5, 5}, tr));       // skipped a state
  CHECK(!is_legal_alignment({3, 4}, tr));          // never reached the end
  CHECK(!is_legal_alignment({4, 5}, tr));          // wrong entry state
  CHECK(!is_legal_alignment({}, tr));
}

TEST_CASE("flat_start divides a single-phone utterance into thirds",
          "[align]") {
  FloatMatrix f = grouped_thirds();
  AlignUtterance u;
  u.id = "u1";
  u.feats = &f;
  u.transcript = {1};

  GmmAcousticModel m = flat_start({u}, 6);
  REQUIRE(m.dim == 2);
  REQUIRE(m.states.size() == 6);
  for (int pos = 0; pos < 3; ++pos) {
    const DiagGmm& g = m.states[hmm_state(1, pos)];
    REQUIRE(g.num_comps() == 1);
    CHECK(g.means[0][0] == Approx(static_cast<double>(pos)).margin(1e-9));
    CHECK(g.means[0][1] == Approx(10.0 * (pos + 1)).margin(1e-6));
    // Constant frames: variance hits the floor instead of collapsing.
    CHECK(g.vars[0][0] == kGmmVarianceFloor);
  }

  // States of the unseen phone fall back to the global statistics.
  const DiagGmm& g0 = m.states[hmm_state(0, 0)];
  CHECK(g0.means[0][0] == Approx(1.0).margin(1e-6));
  CHECK(g0.means[0][1] == Approx(20.0).margin(1e-5));
}

TEST_CASE("flat_start rejects utterances shorter than their chain",
          "[align]") {
  FloatMatrix f;
  f.rows = 1;
  f.cols = 2;
  f.data = {0.0f, 0.0f};
  AlignUtterance u;
  u.id = "tiny";
  u.feats = &f;
  u.transcript = {1};
  REQUIRE_THROWS_WITH(flat_start({u}, 6),
                      ContainsSubstring("too short for transcript"));
  REQUIRE_THROWS_WITH(flat_start({}, 6), ContainsSubstring("empty corpus"));
}

TEST_CASE("flat_start is deterministic", "[align]") {
  Rng rng(5);
  GmmAcousticModel truth = known_model(6, 2.0);
  std::vector<SampledUtterance> data;
  std::vector<AlignUtterance> utts;
  for (int i = 0; i < 8; ++i)
    data.push_back(sample_utterance(truth, {i % 2, 1 - i % 2}, rng));
  for (int i = 0; i < 8; ++i) {
    AlignUtterance u;
    u.id = "u" + std::to_string(i);
    u.feats = &data[i].feats;
    u.transcript = {i % 2, 1 - i % 2};
    utts.push_back(u);
  }

  GmmAcousticModel a = flat_start(utts, 6);
  GmmAcousticModel b = flat_start(utts, 6);
  for (int s = 0; s < 6; ++s) {
    REQUIRE(a.states[s].means == b.states[s].means);
    REQUIRE(a.states[s].vars == b.states[s].vars);
  }
}

TEST_CASE("force_align walks a single phone monotonically", "[align]") {
  Rng rng(7);
  GmmAcousticModel truth = known_model(6, 3.0);
  SampledUtterance s = sample_utterance(truth, {1}, rng);

  Alignment a = force_align(truth, s.feats, {1}, "u1");
  REQUIRE(a.states.size() == s.states.size());
  CHECK(a.utterance_id == "u1");
  CHECK(a.states.front() == static_cast<std::uint32_t>(hmm_state(1, 0)));
  CHECK(a.states.back() == static_cast<std::uint32_t>(hmm_state(1, 2)));
  for (std::size_t t = 1; t < a.states.size(); ++t) {
    CHECK(a.states[t] >= a.states[t - 1]);
    CHECK(a.states[t] - a.states[t - 1] <= 1);
  }
  CHECK(is_legal_alignment(a.states, {1}));
}

TEST_CASE("force_align recovers most frames of model-generated data",
          "[align]") {
  Rng rng(11);
  GmmAcousticModel truth = known_model(9, 2.0);
  std::size_t hits = 0, total = 0;
  for (int i = 0; i < 20; ++i) {
    std::vector<int> tr = {i % 3, (i + 1) % 3};
    SampledUtterance s = sample_utterance(truth, tr, rng);
    Alignment a = force_align(truth, s.feats, tr);
    REQUIRE(is_legal_alignment(a.states, tr));
    for (std::size_t t = 0; t < s.states.size(); ++t) {
      hits += a.states[t] == s.states[t];
      ++total;
    }
  }
  CHECK(static_cast<double>(hits) / static_cast<double>(total) >= 0.9);
}

TEST_CASE("force_align reports log likelihood and rejects short input",
          "[align]") {
  Rng rng(13);
  GmmAcousticModel truth = known_model(6, 3.0);
  SampledUtterance s = sample_utterance(truth, {1}, rng);

  double ll = 0.0;
  force_align(truth, s.feats, {1}, "u", &ll);
  CHECK(std::isfinite(ll));
  CHECK(ll < 0.0);

  FloatMatrix two;
  two.rows = 2;
  two.cols = kDim;
  two.data.assign(2 * kDim, 0.0f);
  REQUIRE_THROWS_WITH(force_align(truth, two, {1}),
                      ContainsSubstring("too long for utterance"));
  REQUIRE_THROWS_WITH(force_align(truth, s.feats, {}),
                      ContainsSubstring("empty transcript"));
}

TEST_CASE("hard EM keeps corpus likelihood non-decreasing", "[align]") {
  Rng rng(17);
  GmmAcousticModel truth = known_model(6, 1.5);
  std::vector<SampledUtterance> data;
  std::vector<AlignUtterance> utts;
  std::vector<std::vector<int>> trs;
  for (int i = 0; i < 30; ++i) {
    std::vector<int> tr;
    tr.push_back(rng.index(2) ? 1 : 0);
    tr.push_back(1 - tr[0]);
    if (rng.uniform() < 0.5) tr.push_back(rng.index(2) ? 1 : 0);
    trs.push_back(tr);
    data.push_back(sample_utterance(truth, tr, rng));
  }
  for (int i = 0; i < 30; ++i) {
    AlignUtterance u;
    u.id = "u" + std::to_string(i);
    u.feats = &data[i].feats;
    u.transcript = trs[i];
    utts.push_back(u);
  }

  GmmAcousticModel model = flat_start(utts, 6);

  SECTION("zero iterations leave the model untouched") {
    GmmAcousticModel before = model;
    std::vector<double> ll = em_train(model, utts, 0);
    CHECK(ll.empty());
    for (int s = 0; s < 6; ++s)
      REQUIRE(model.states[s].means == before.states[s].means);
  }

  SECTION("ten iterations are monotone within slack") {
    std::vector<double> ll = em_train(model, utts, 10);
    REQUIRE(ll.size() == 10);
    for (std::size_t i = 1; i < ll.size(); ++i) {
      CHECK(ll[i] >= ll[i - 1] - 1e-6 * std::abs(ll[i - 1]));
    }
  }

  SECTION("mixup doubles components and keeps weights normalized") {
    std::vector<double> ll = em_train(model, utts, 4, {1, 3});
    for (int s = 0; s < 6; ++s) {
      REQUIRE(model.states[s].num_comps() == 4);
      double sum = 0.0;
      for (double w : model.states[s].weights) {
        CHECK(w > 0.0);
        sum += w;
      }
      CHECK(sum == Approx(1.0).margin(1e-9));
    }
  }

  SECTION("EM is deterministic") {
    GmmAcousticModel twin = flat_start(utts, 6);
    std::vector<double> la = em_train(model, utts, 3);
    std::vector<double> lb = em_train(twin, utts, 3);
    REQUIRE(la == lb);
    for (int s = 0; s < 6; ++s)
      REQUIRE(model.states[s].means == twin.states[s].means);
  }
}

TEST_CASE("mixture split perturbs means by a tenth of a sigma", "[align]") {
  DiagGmm g;
  g.weights = {1.0};
  g.means = {{1.0, -2.0}};
  g.vars = {{4.0, 0.25}};
  g.split();
  REQUIRE(g.num_comps() == 2);
  CHECK(g.weights[0] == Approx(0.5));
  CHECK(g.weights[1] == Approx(0.5));
  CHECK(g.means[0][0] == Approx(1.0 + 0.1 * 2.0));
  CHECK(g.means[1][0] == Approx(1.0 - 0.1 * 2.0));
  CHECK(g.means[0][1] == Approx(-2.0 + 0.1 * 0.5));
  CHECK(g.means[1][1] == Approx(-2.0 - 0.1 * 0.5));
  CHECK(g.vars[0] == g.vars[1]);
}

TEST_CASE("transfer_alignment pads or truncates small drift", "[align]") {
  Alignment clean;
  clean.utterance_id = "u1";
  clean.states = {0, 0, 1, 2, 2};

  SECTION("identity") {
    int adj = -1;
    Alignment out = transfer_alignment(clean, 5, &adj);
    CHECK(out.states == clean.states);
    CHECK(adj == 0);
  }

  SECTION("one extra frame replicates the last label") {
    int adj = -1;
    Alignment out = transfer_alignment(clean, 6, &adj);
    REQUIRE(out.states.size() == 6);
    CHECK(out.states[5] == 2u);
    CHECK(adj == 1);
  }

  SECTION("shorter target truncates") {
    int adj = -1;
    Alignment out = transfer_alignment(clean, 3, &adj);
    CHECK(out.states == std::vector<std::uint32_t>{0, 0, 1});
    CHECK(adj == 2);
  }

  SECTION("large drift is a configuration error") {
    REQUIRE_THROWS_WITH(transfer_alignment(clean, 15),
                        ContainsSubstring("time base mismatch"));
    REQUIRE_THROWS_WITH(transfer_alignment(clean, 15),
                        ContainsSubstring("u1"));
  }
}

TEST_CASE("alignment archives round trip with their index", "[align]") {
  TempDir tmp("ali");
  std::vector<Alignment> alis(2);
  alis[0].utterance_id = "a";
  alis[0].states = {0, 1, 2};
  alis[1].utterance_id = "b";
  alis[1].states = {3, 3, 4, 5};

  std::string path = tmp.file("alignments.rvk");
  save_alignments(alis, path);
  REQUIRE(std::filesystem::exists(path + ".idx"));

  std::vector<Alignment> loaded = load_alignments(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].utterance_id == "a");
  CHECK(loaded[0].states == alis[0].states);
  CHECK(loaded[1].utterance_id == "b");
  CHECK(loaded[1].states == alis[1].states);
}

TEST_CASE("gmm model files round trip", "[align]") {
  TempDir tmp("gmm");
  Rng rng(19);
  GmmAcousticModel truth = known_model(6, 1.5);
  std::vector<SampledUtterance> data;
  std::vector<AlignUtterance> utts;
  for (int i = 0; i < 6; ++i)
    data.push_back(sample_utterance(truth, {0, 1}, rng));
  for (int i = 0; i < 6; ++i) {
    AlignUtterance u;
    u.id = "u" + std::to_string(i);
    u.feats = &data[i].feats;
    u.transcript = {0, 1};
    utts.push_back(u);
  }
  GmmAcousticModel model = flat_start(utts, 6);
  em_train(model, utts, 2, {1});

  std::string path = tmp.file("gmm.mdl");
  save_gmm(model, path);
  GmmAcousticModel loaded = load_gmm(path);

  REQUIRE(loaded.dim == model.dim);
  REQUIRE(loaded.states.size() == model.states.size());
  for (std::size_t s = 0; s < model.states.size(); ++s) {
    const DiagGmm& a = model.states[s];
    const DiagGmm& b = loaded.states[s];
    REQUIRE(a.num_comps() == b.num_comps());
    for (int m = 0; m < a.num_comps(); ++m) {
      CHECK(b.weights[m] == Approx(a.weights[m]).epsilon(1e-6));
      for (int d = 0; d < kDim; ++d) {
        CHECK(b.means[m][d] == Approx(a.means[m][d]).margin(1e-5));
        CHECK(b.vars[m][d] ==
              Approx(a.vars[m][d]).epsilon(1e-5).margin(1e-9));
      }
    }
  }

  // Scores agree to float precision on a probe frame.
  const float probe[kDim] = {0.5f, -0.25f, 1.0f, 0.0f};
  CHECK(loaded.states[2].log_likelihood(probe) ==
        Approx(model.states[2].log_likelihood(probe)).margin(1e-3));

  SECTION("corrupted header is rejected") {
    std::string bytes = testutil::read_file_bytes(path);
    bytes[0] = 'X';
    testutil::write_file_bytes(path, bytes);
    REQUIRE_THROWS(load_gmm(path));
  }
}
