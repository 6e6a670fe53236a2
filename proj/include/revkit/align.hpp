// revkit/align.hpp

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

// Flat-start + Viterbi-EM training of the monophone GMM-HMM aligner, forced
// alignment, and clean-to-distant alignment transfer.

#ifndef REVKIT_ALIGN_HPP_
#define REVKIT_ALIGN_HPP_

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "revkit/archive.hpp"
#include "revkit/common.hpp"
#include "revkit/gmm.hpp"
#include "revkit/hmm.hpp"

namespace revkit {

struct Alignment {
  std::string utterance_id;
  std::vector<std::uint32_t> states;
};

struct AlignUtterance {
  std::string id;
  const FloatMatrix* feats = nullptr;
  std::vector<int> transcript;
};

namespace detail {

// Viterbi over the left-to-right chain expanded from a transcript.  Emissions
// are cached per distinct state.  Both transitions cost log 0.5, so the path
// depends on emissions only; the constant still enters the returned score.
struct ChainViterbi {
  std::vector<int> path;   // frame -> chain position
  double log_likelihood = 0.0;
};

inline ChainViterbi viterbi_chain(const GmmAcousticModel& model,
                                  const FloatMatrix& feats,
                                  const std::vector<int>& chain) {
  const int T = static_cast<int>(feats.rows);
  const int S = static_cast<int>(chain.size());
  require(S >= 1, "viterbi: empty transcript");
  require(T >= S, "viterbi: ", T, " frames cannot fit ", S,
          " states (transcript too long for utterance)");
  require(static_cast<int>(feats.cols) == model.dim,
          "viterbi: feature dim ", feats.cols, " != model dim ", model.dim);

  std::map<int, int> emission_slot;
  for (int s : chain) emission_slot.emplace(s, 0);
  int n_slots = 0;
  for (auto& kv : emission_slot) kv.second = n_slots++;
  std::vector<double> em(static_cast<std::size_t>(T) * n_slots);
  for (int t = 0; t < T; ++t) {
    const float* x = feats.row(t);
    for (const auto& kv : emission_slot) {
      em[static_cast<std::size_t>(t) * n_slots + kv.second] =
          model.states[kv.first].log_likelihood(x);
    }
  }
  std::vector<int> slot(S);
  for (int j = 0; j < S; ++j) slot[j] = emission_slot[chain[j]];

  const double kNeg = -1e300;
  const double log_trans = std::log(kSelfLoopProb);
  std::vector<double> prev(S, kNeg), cur(S, kNeg);
  std::vector<std::uint8_t> back(static_cast<std::size_t>(T) * S, 0);
  prev[0] = em[slot[0]];
  for (int t = 1; t < T; ++t) {
    const double* emt = &em[static_cast<std::size_t>(t) * n_slots];
    for (int j = 0; j < S; ++j) {
      double stay = prev[j];
      double enter = j > 0 ? prev[j - 1] : kNeg;
      bool advance = enter > stay;
      cur[j] = (advance ? enter : stay) + log_trans + emt[slot[j]];
      back[static_cast<std::size_t>(t) * S + j] = advance ? 1 : 0;
    }
    std::swap(prev, cur);
  }

  ChainViterbi out;
  out.log_likelihood = prev[S - 1];
  out.path.resize(T);
  int j = S - 1;
  for (int t = T - 1; t >= 0; --t) {
    out.path[t] = j;
    if (t > 0 && back[static_cast<std::size_t>(t) * S + j]) --j;
  }
  require(j == 0, "viterbi: backtrace did not reach the chain start");
  return out;
}

}  // namespace detail

inline Alignment force_align(const GmmAcousticModel& model,
                             const FloatMatrix& feats,
                             const std::vector<int>& transcript,
                             const std::string& utterance_id = "",
                             double* log_likelihood = nullptr) {
  std::vector<int> chain = expand_transcript(transcript);
  detail::ChainViterbi vit = detail::viterbi_chain(model, feats, chain);
  if (log_likelihood) *log_likelihood = vit.log_likelihood;
  Alignment a;
  a.utterance_id = utterance_id;
  a.states.resize(vit.path.size());
  for (std::size_t t = 0; t < vit.path.size(); ++t) {
    a.states[t] = static_cast<std::uint32_t>(chain[vit.path[t]]);
  }
  return a;
}

// Single-Gaussian bootstrap: frames divided uniformly across each
// utterance's expanded state chain; unvisited states get the global stats.
inline GmmAcousticModel flat_start(const std::vector<AlignUtterance>& utts,
                                   int num_states) {
  require(!utts.empty(), "flat_start: empty corpus");
  const int dim = static_cast<int>(utts[0].feats->cols);

  std::vector<std::vector<double>> sum(num_states,
                                       std::vector<double>(dim, 0.0));
  std::vector<std::vector<double>> sumsq(num_states,
                                         std::vector<double>(dim, 0.0));
  std::vector<double> count(num_states, 0.0);
  std::vector<double> gsum(dim, 0.0), gsumsq(dim, 0.0);
  double gcount = 0.0;

  for (const AlignUtterance& u : utts) {
    const int T = static_cast<int>(u.feats->rows);
    std::vector<int> chain = expand_transcript(u.transcript);
    const int S = static_cast<int>(chain.size());
    require(T >= S, "flat_start: utterance '", u.id,
            "' too short for transcript (", T, " frames, ", S, " states)");
    for (int t = 0; t < T; ++t) {
      int j = static_cast<int>((static_cast<long long>(t) * S) / T);
      int s = chain[j];
      const float* x = u.feats->row(t);
      for (int d = 0; d < dim; ++d) {
        sum[s][d] += x[d];
        sumsq[s][d] += static_cast<double>(x[d]) * x[d];
        gsum[d] += x[d];
        gsumsq[d] += static_cast<double>(x[d]) * x[d];
      }
      count[s] += 1.0;
      gcount += 1.0;
    }
  }

  GmmAcousticModel model;
  model.dim = dim;
  model.states.resize(num_states);
  for (int s = 0; s < num_states; ++s) {
    DiagGmm& g = model.states[s];
    g.weights = {1.0};
    g.means.assign(1, std::vector<double>(dim));
    g.vars.assign(1, std::vector<double>(dim));
    bool visited = count[s] >= 2.0;
    double n = visited ? count[s] : gcount;
    const std::vector<double>& ms = visited ? sum[s] : gsum;
    const std::vector<double>& qs = visited ? sumsq[s] : gsumsq;
    for (int d = 0; d < dim; ++d) {
      double mean = ms[d] / n;
      double var = qs[d] / n - mean * mean;
      g.means[0][d] = mean;
      g.vars[0][d] = std::max(var, kGmmVarianceFloor);
    }
  }
  return model;
}

// One hard-alignment EM pass.  Returns the corpus Viterbi log-likelihood
// computed with the model as it was at entry (before re-estimation).
inline double em_iteration(GmmAcousticModel& model,
                           const std::vector<AlignUtterance>& utts) {
  const int dim = model.dim;
  const int num_states = model.num_states();

  struct Acc {
    std::vector<double> w;
    std::vector<std::vector<double>> mean, sq;
  };
  std::vector<Acc> acc(num_states);
  for (int s = 0; s < num_states; ++s) {
    int m = model.states[s].num_comps();
    acc[s].w.assign(m, 0.0);
    acc[s].mean.assign(m, std::vector<double>(dim, 0.0));
    acc[s].sq.assign(m, std::vector<double>(dim, 0.0));
  }

  double total_loglik = 0.0;
  for (const AlignUtterance& u : utts) {
    double ll = 0.0;
    Alignment a = force_align(model, *u.feats, u.transcript, u.id, &ll);
    total_loglik += ll;
    for (std::size_t t = 0; t < a.states.size(); ++t) {
      int s = static_cast<int>(a.states[t]);
      const float* x = u.feats->row(static_cast<std::uint32_t>(t));
      std::vector<double> r = model.states[s].responsibilities(x);
      for (std::size_t m = 0; m < r.size(); ++m) {
        acc[s].w[m] += r[m];
        for (int d = 0; d < dim; ++d) {
          acc[s].mean[m][d] += r[m] * x[d];
          acc[s].sq[m][d] += r[m] * static_cast<double>(x[d]) * x[d];
        }
      }
    }
  }

  for (int s = 0; s < num_states; ++s) {
    DiagGmm& g = model.states[s];
    double occ = 0.0;
    for (double w : acc[s].w) occ += w;
    if (occ < 2.0) continue;  // starved state keeps its parameters
    for (int m = 0; m < g.num_comps(); ++m) {
      if (acc[s].w[m] < 1e-3) continue;  // starved component likewise
      for (int d = 0; d < dim; ++d) {
        double mean = acc[s].mean[m][d] / acc[s].w[m];
        double var = acc[s].sq[m][d] / acc[s].w[m] - mean * mean;
        g.means[m][d] = mean;
        g.vars[m][d] = std::max(var, kGmmVarianceFloor);
      }
    }
    for (int m = 0; m < g.num_comps(); ++m) {
      g.weights[m] = std::max(acc[s].w[m] / occ, 1e-8);
    }
    double wsum = 0.0;
    for (double w : g.weights) wsum += w;
    for (double& w : g.weights) w /= wsum;
  }
  return total_loglik;
}

// iterations of hard-EM; after each iteration listed in mixup_after (1-based)
// every state's mixture is split in two.  Returns per-iteration corpus
// log-likelihoods.
inline std::vector<double> em_train(GmmAcousticModel& model,
                                    const std::vector<AlignUtterance>& utts,
                                    int iterations,
                                    const std::set<int>& mixup_after = {}) {
  std::vector<double> logliks;
  for (int it = 1; it <= iterations; ++it) {
    logliks.push_back(em_iteration(model, utts));
    if (mixup_after.count(it)) {
      for (DiagGmm& g : model.states) g.split();
    }
  }
  return logliks;
}

// Carries clean-audio labels to the matching distant utterance.  Small frame
// count drift (trim rounding) is absorbed by truncation or last-label
// padding; big drift signals a misconfigured time base.
inline Alignment transfer_alignment(const Alignment& clean,
                                    std::size_t distant_frame_count,
                                    int* adjusted_frames = nullptr) {
  require(!clean.states.empty(), "transfer_alignment: empty alignment");
  long long diff = static_cast<long long>(distant_frame_count) -
                   static_cast<long long>(clean.states.size());
  require(diff <= 5 && diff >= -5,
          "transfer_alignment: time base mismatch for '", clean.utterance_id,
          "' (", clean.states.size(), " vs ", distant_frame_count, " frames)");
  Alignment out;
  out.utterance_id = clean.utterance_id;
  out.states = clean.states;
  out.states.resize(distant_frame_count,
                    clean.states.empty() ? 0 : clean.states.back());
  if (adjusted_frames) *adjusted_frames = static_cast<int>(std::llabs(diff));
  return out;
}

// Alignment sets persist as one u32 archive (all utterances concatenated)
// plus a text index of utterance id -> [start, end) rows.
inline void save_alignments(const std::vector<Alignment>& alis,
                            const std::string& path) {
  std::vector<std::uint32_t> flat;
  std::ofstream idx(path + ".idx");
  require(idx.good(), "save_alignments: cannot open '", path, ".idx'");
  for (const Alignment& a : alis) {
    idx << a.utterance_id << '\t' << flat.size() << '\t'
        << flat.size() + a.states.size() << '\n';
    flat.insert(flat.end(), a.states.begin(), a.states.end());
  }
  write_u32_archive(flat, path);
}

inline std::vector<Alignment> load_alignments(const std::string& path) {
  std::vector<std::uint32_t> flat = read_u32_archive(path);
  std::ifstream idx(path + ".idx");
  require(idx.good(), "load_alignments: cannot open '", path, ".idx'");
  std::vector<Alignment> out;
  std::string id;
  std::size_t start = 0, end = 0;
  while (idx >> id >> start >> end) {
    require(start <= end && end <= flat.size(),
            "load_alignments: bad index range for '", id, "'");
    Alignment a;
    a.utterance_id = id;
    a.states.assign(flat.begin() + start, flat.begin() + end);
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace revkit

#endif  // REVKIT_ALIGN_HPP_
