// revkit/hmm.hpp

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

// Monophone 3-state left-to-right topology.  State id = phone * 3 + position;
// each state has a self-loop and a forward transition, 0.5 each, no skips.

#ifndef REVKIT_HMM_HPP_
#define REVKIT_HMM_HPP_

#include <vector>

#include "revkit/common.hpp"
#include "revkit/manifest.hpp"

namespace revkit {

constexpr int kStatesPerPhone = 3;
constexpr double kSelfLoopProb = 0.5;

inline int hmm_state(int phone, int pos) {
  return phone * kStatesPerPhone + pos;
}

inline int hmm_state_phone(int state) { return state / kStatesPerPhone; }
inline int hmm_state_pos(int state) { return state % kStatesPerPhone; }

inline int num_hmm_states(const PhoneSet& phones) {
  return phones.size() * kStatesPerPhone;
}

// Left-to-right state chain for a phone transcript: 3 states per phone.
inline std::vector<int> expand_transcript(const std::vector<int>& transcript) {
  std::vector<int> states;
  states.reserve(transcript.size() * kStatesPerPhone);
  for (int phone : transcript) {
    for (int pos = 0; pos < kStatesPerPhone; ++pos) {
      states.push_back(hmm_state(phone, pos));
    }
  }
  return states;
}

// Checks that a frame-state sequence is a legal left-to-right path for the
// given transcript (used by tests and oracle label validation).
inline bool is_legal_alignment(const std::vector<std::uint32_t>& states,
                               const std::vector<int>& transcript) {
  std::vector<int> chain = expand_transcript(transcript);
  if (states.empty() || chain.empty()) return false;
  std::size_t j = 0;
  if (states[0] != static_cast<std::uint32_t>(chain[0])) return false;
  for (std::size_t t = 1; t < states.size(); ++t) {
    if (states[t] == static_cast<std::uint32_t>(chain[j])) continue;
    if (j + 1 < chain.size() &&
        states[t] == static_cast<std::uint32_t>(chain[j + 1])) {
      ++j;
      continue;
    }
    return false;
  }
  return j == chain.size() - 1;
}

}  // namespace revkit

#endif  // REVKIT_HMM_HPP_
