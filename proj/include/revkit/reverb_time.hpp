// revkit/reverb_time.hpp

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

// T60 estimation via Schroeder backward integration with a -5..-25 dB line
// fit extrapolated to 60 dB.

#ifndef REVKIT_REVERB_TIME_HPP_
#define REVKIT_REVERB_TIME_HPP_

#include <cmath>
#include <vector>

#include "revkit/common.hpp"
#include "revkit/ir.hpp"

namespace revkit {

struct IrAnalysis {
  double t60 = 0.0;              // seconds
  std::vector<double> edc;       // dB, non-increasing
  double fit_upper_db = -5.0;    // fit span endpoints
  double fit_lower_db = -25.0;
};

// Floor applied to EDC values where the remaining energy underflows to zero
// (all-zero tails); keeps the curve finite and non-increasing.
constexpr double kEdcFloorDb = -300.0;

inline IrAnalysis estimate_t60(const ImpulseResponse& ir) {
  check_ir(ir, "estimate_t60");
  const std::size_t n = ir.taps.size();
  int nonzero = 0;
  for (float t : ir.taps) {
    if (t != 0.0f) ++nonzero;
  }
  require(nonzero >= 2,
          "estimate_t60: insufficient decay range (need at least 2 nonzero "
          "taps)");

  // Backward energy integration: EDC(t) = 10 log10( sum_{tau>=t} h^2 / total ).
  std::vector<double> tail(n);
  double acc = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    acc += static_cast<double>(ir.taps[i]) * ir.taps[i];
    tail[i] = acc;
  }
  const double total = acc;
  require(total > 0.0, "estimate_t60: zero-energy IR");

  IrAnalysis out;
  out.edc.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.edc[i] = tail[i] > 0.0
                     ? std::max(10.0 * std::log10(tail[i] / total), kEdcFloorDb)
                     : kEdcFloorDb;
  }

  // Least-squares line over the samples inside the fit span.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  bool reached_lower = false;
  for (std::size_t i = 0; i < n; ++i) {
    double db = out.edc[i];
    if (db <= out.fit_lower_db) {
      reached_lower = true;
      break;
    }
    if (db > out.fit_upper_db) continue;
    double t = static_cast<double>(i) / ir.sample_rate;
    sx += t;
    sy += db;
    sxx += t * t;
    sxy += t * db;
    ++count;
  }
  require(reached_lower && count >= 2, "estimate_t60: insufficient decay range");

  double denom = static_cast<double>(count) * sxx - sx * sx;
  require(denom > 0.0, "estimate_t60: degenerate fit span");
  double slope = (static_cast<double>(count) * sxy - sx * sy) / denom;
  require(slope < 0.0, "estimate_t60: non-decaying EDC");
  out.t60 = -60.0 / slope;
  return out;
}

}  // namespace revkit

#endif  // REVKIT_REVERB_TIME_HPP_
