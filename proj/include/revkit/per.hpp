// revkit/per.hpp

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

// Phone error rate: unit-cost Levenshtein alignment with ties resolved
// preferring substitution over insertion over deletion.

#ifndef REVKIT_PER_HPP_
#define REVKIT_PER_HPP_

#include <string>
#include <vector>

#include "revkit/common.hpp"

namespace revkit {

struct EditCounts {
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int ref_len = 0;

  int errors() const { return substitutions + deletions + insertions; }
  double per() const {
    return 100.0 * errors() / static_cast<double>(ref_len);
  }
  void add(const EditCounts& o) {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    ref_len += o.ref_len;
  }
};

inline EditCounts align_edits(const std::vector<int>& ref,
                              const std::vector<int>& hyp) {
  require(!ref.empty(), "align_edits: empty reference");
  const int n = static_cast<int>(ref.size());
  const int m = static_cast<int>(hyp.size());
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (int i = 0; i <= n; ++i) d[i][0] = i;
  for (int j = 0; j <= m; ++j) d[0][j] = j;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= m; ++j) {
      int diag = d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      int ins = d[i][j - 1] + 1;
      int del = d[i - 1][j] + 1;
      d[i][j] = std::min(diag, std::min(ins, del));
    }
  }

  EditCounts counts;
  counts.ref_len = n;
  int i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      int diag = d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      if (diag == d[i][j]) {
        if (ref[i - 1] != hyp[j - 1]) ++counts.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (j > 0 && d[i][j - 1] + 1 == d[i][j]) {
      ++counts.insertions;
      --j;
      continue;
    }
    ++counts.deletions;
    --i;
  }
  return counts;
}

struct UtteranceScore {
  std::string utterance_id;
  EditCounts counts;
};

struct ScoreReport {
  std::vector<UtteranceScore> utterances;
  EditCounts total;

  void add(const std::string& id, const EditCounts& c) {
    utterances.push_back({id, c});
    total.add(c);
  }
};

}  // namespace revkit

#endif  // REVKIT_PER_HPP_
