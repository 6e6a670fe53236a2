// revkit/phone_loop.hpp

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

// Phone-loop Viterbi decoding over scaled hybrid log-likelihoods
// (log posterior minus log prior).

#ifndef REVKIT_PHONE_LOOP_HPP_
#define REVKIT_PHONE_LOOP_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

#include "revkit/archive.hpp"
#include "revkit/common.hpp"
#include "revkit/hmm.hpp"

namespace revkit {

struct PhoneLoopGraph {
  int num_phones = 0;
  double self_loop_prob = kSelfLoopProb;
  double insertion_penalty = 0.0;  // log-domain cost per phone entry
};

// scale * (log p(s|o) - log P(s)) per frame and state.
inline FloatMatrix posteriors_to_loglik(const FloatMatrix& posteriors,
                                        const std::vector<double>& priors,
                                        double acoustic_scale) {
  require(posteriors.cols == priors.size(), "posteriors_to_loglik: ",
          posteriors.cols, " classes vs ", priors.size(), " priors");
  for (std::size_t c = 0; c < priors.size(); ++c) {
    require(priors[c] > 0.0, "posteriors_to_loglik: zero prior for class ", c);
  }
  FloatMatrix out;
  out.rows = posteriors.rows;
  out.cols = posteriors.cols;
  out.data.resize(posteriors.data.size());
  for (std::uint32_t t = 0; t < out.rows; ++t) {
    for (std::uint32_t c = 0; c < out.cols; ++c) {
      double p = std::max(static_cast<double>(posteriors.at(t, c)), 1e-30);
      out.at(t, c) = static_cast<float>(acoustic_scale *
                                        (std::log(p) - std::log(priors[c])));
    }
  }
  return out;
}

// Exact Viterbi over the loop of 3-state phones: uniform phone entry, a
// configurable per-state self-loop, and an insertion penalty charged at
// every phone entry.  The path must end in some phone's last state.
inline std::vector<int> phone_loop_decode(const FloatMatrix& loglik,
                                          const PhoneLoopGraph& graph) {
  const int P = graph.num_phones;
  require(P > 0, "phone_loop_decode: no phones");
  require(loglik.cols == static_cast<std::uint32_t>(P * kStatesPerPhone),
          "phone_loop_decode: ", loglik.cols, " classes != ",
          P * kStatesPerPhone, " loop states");
  const int T = static_cast<int>(loglik.rows);
  require(T >= kStatesPerPhone, "phone_loop_decode: ", T,
          " frames too short for one phone");
  require(graph.self_loop_prob > 0.0 && graph.self_loop_prob < 1.0,
          "phone_loop_decode: self_loop_prob must be in (0, 1)");

  const int S = P * kStatesPerPhone;
  const double log_self = std::log(graph.self_loop_prob);
  const double log_fwd = std::log(1.0 - graph.self_loop_prob);
  const double log_entry = -std::log(static_cast<double>(P));
  const double kNeg = -1e300;

  std::vector<double> prev(S, kNeg), cur(S, kNeg);
  // Backpointer encodes the predecessor state id, or -1 for utterance start.
  std::vector<std::int32_t> back(static_cast<std::size_t>(T) * S, -1);

  for (int p = 0; p < P; ++p) {
    int s = hmm_state(p, 0);
    prev[s] = log_entry - graph.insertion_penalty + loglik.at(0, s);
  }
  for (int t = 1; t < T; ++t) {
    // Best phone-exit score from the previous frame feeds all entries.
    double best_exit = kNeg;
    int best_exit_state = -1;
    for (int p = 0; p < P; ++p) {
      int s = hmm_state(p, kStatesPerPhone - 1);
      double v = prev[s] + log_fwd;
      if (v > best_exit) {
        best_exit = v;
        best_exit_state = s;
      }
    }
    for (int s = 0; s < S; ++s) {
      int pos = hmm_state_pos(s);
      double best;
      std::int32_t from;
      if (pos == 0) {
        best = best_exit + log_entry - graph.insertion_penalty;
        from = best_exit_state;
        double stay = prev[s] + log_self;
        if (stay > best) {
          best = stay;
          from = static_cast<std::int32_t>(s);
        }
      } else {
        best = prev[s] + log_self;
        from = static_cast<std::int32_t>(s);
        double enter = prev[s - 1] + log_fwd;
        if (enter > best) {
          best = enter;
          from = static_cast<std::int32_t>(s - 1);
        }
      }
      cur[s] = best + loglik.at(static_cast<std::uint32_t>(t),
                                static_cast<std::uint32_t>(s));
      back[static_cast<std::size_t>(t) * S + s] = from;
    }
    std::swap(prev, cur);
  }

  int end_state = -1;
  double end_score = kNeg;
  for (int p = 0; p < P; ++p) {
    int s = hmm_state(p, kStatesPerPhone - 1);
    if (prev[s] > end_score) {
      end_score = prev[s];
      end_state = s;
    }
  }
  require(end_state >= 0, "phone_loop_decode: no reachable end state");

  std::vector<int> states(T);
  int s = end_state;
  for (int t = T - 1; t >= 0; --t) {
    states[t] = s;
    s = back[static_cast<std::size_t>(t) * S + s];
  }

  // Emit one phone per loop traversal: every frame whose state is a phone's
  // first position and is not a self-loop continuation starts a new phone.
  std::vector<int> phones;
  for (int t = 0; t < T; ++t) {
    if (hmm_state_pos(states[t]) == 0 &&
        (t == 0 || states[t - 1] != states[t])) {
      phones.push_back(hmm_state_phone(states[t]));
    }
  }
  return phones;
}

}  // namespace revkit

#endif  // REVKIT_PHONE_LOOP_HPP_
