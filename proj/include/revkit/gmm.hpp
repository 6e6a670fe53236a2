// revkit/gmm.hpp

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

#ifndef REVKIT_GMM_HPP_
#define REVKIT_GMM_HPP_

#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "revkit/common.hpp"

namespace revkit {

constexpr double kGmmVarianceFloor = 1e-4;

// Diagonal-covariance Gaussian mixture over one HMM state.
struct DiagGmm {
  std::vector<double> weights;
  std::vector<std::vector<double>> means;   // [comp][dim]
  std::vector<std::vector<double>> vars;    // [comp][dim]

  int num_comps() const { return static_cast<int>(weights.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }

  // log p(x) = logsumexp_m [ log w_m - 0.5 sum_d (log(2 pi v) + (x-mu)^2/v) ]
  double log_likelihood(const float* x) const {
    double best = -1e300;
    std::vector<double> terms(weights.size());
    for (std::size_t m = 0; m < weights.size(); ++m) {
      double acc = std::log(weights[m]);
      const std::vector<double>& mu = means[m];
      const std::vector<double>& v = vars[m];
      for (std::size_t d = 0; d < mu.size(); ++d) {
        double diff = x[d] - mu[d];
        acc -= 0.5 * (std::log(2.0 * M_PI * v[d]) + diff * diff / v[d]);
      }
      terms[m] = acc;
      if (acc > best) best = acc;
    }
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - best);
    return best + std::log(sum);
  }

  // Posterior responsibility of each component for x.
  std::vector<double> responsibilities(const float* x) const {
    std::vector<double> logs(weights.size());
    double best = -1e300;
    for (std::size_t m = 0; m < weights.size(); ++m) {
      double acc = std::log(weights[m]);
      const std::vector<double>& mu = means[m];
      const std::vector<double>& v = vars[m];
      for (std::size_t d = 0; d < mu.size(); ++d) {
        double diff = x[d] - mu[d];
        acc -= 0.5 * (std::log(2.0 * M_PI * v[d]) + diff * diff / v[d]);
      }
      logs[m] = acc;
      if (acc > best) best = acc;
    }
    double sum = 0.0;
    for (std::size_t m = 0; m < logs.size(); ++m) {
      logs[m] = std::exp(logs[m] - best);
      sum += logs[m];
    }
    for (double& r : logs) r /= sum;
    return logs;
  }

  // Splits every component in two with means perturbed +-0.1 std.
  void split() {
    std::size_t old = weights.size();
    for (std::size_t m = 0; m < old; ++m) {
      std::vector<double> hi = means[m], lo = means[m];
      for (std::size_t d = 0; d < hi.size(); ++d) {
        double sd = std::sqrt(vars[m][d]);
        hi[d] += 0.1 * sd;
        lo[d] -= 0.1 * sd;
      }
      weights[m] *= 0.5;
      weights.push_back(weights[m]);
      means[m] = hi;
      means.push_back(lo);
      vars.push_back(vars[m]);
    }
  }
};

struct GmmAcousticModel {
  int dim = 0;
  std::vector<DiagGmm> states;

  int num_states() const { return static_cast<int>(states.size()); }
};

inline void save_gmm(const GmmAcousticModel& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "save_gmm: cannot open '", path, "'");
  os << "REVKIT_GMM 1\n";
  os << "dim " << model.dim << "\n";
  os << "states " << model.num_states() << "\n";
  os << "comps";
  for (const DiagGmm& g : model.states) os << ' ' << g.num_comps();
  os << "\nbinary\n";
  auto put = [&os](double v) {
    float f = static_cast<float>(v);
    char b[4];
    std::memcpy(b, &f, 4);
    os.write(b, 4);
  };
  for (const DiagGmm& g : model.states) {
    for (double w : g.weights) put(w);
    for (const auto& mu : g.means) {
      for (double v : mu) put(v);
    }
    for (const auto& var : g.vars) {
      for (double v : var) put(v);
    }
  }
  require(os.good(), "save_gmm: write failed for '", path, "'");
}

inline GmmAcousticModel load_gmm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "load_gmm: cannot open '", path, "'");
  std::string magic, key;
  int version = 0;
  is >> magic >> version;
  require(magic == "REVKIT_GMM" && version == 1, "load_gmm: '", path,
          "' has unsupported header");
  GmmAcousticModel model;
  int num_states = 0;
  is >> key >> model.dim;
  require(key == "dim" && model.dim > 0, "load_gmm: bad dim in '", path, "'");
  is >> key >> num_states;
  require(key == "states" && num_states > 0, "load_gmm: bad states in '", path,
          "'");
  is >> key;
  require(key == "comps", "load_gmm: missing comps in '", path, "'");
  std::vector<int> comps(num_states);
  for (int& c : comps) {
    is >> c;
    require(!is.fail() && c > 0, "load_gmm: bad comp count in '", path, "'");
  }
  is >> key;
  require(key == "binary", "load_gmm: missing payload marker in '", path, "'");
  is.get();  // newline

  auto get = [&is, &path]() {
    char b[4];
    is.read(b, 4);
    require(is.gcount() == 4, "load_gmm: truncated payload in '", path, "'");
    float f;
    std::memcpy(&f, b, 4);
    return static_cast<double>(f);
  };
  model.states.resize(num_states);
  for (int s = 0; s < num_states; ++s) {
    DiagGmm& g = model.states[s];
    g.weights.resize(comps[s]);
    for (double& w : g.weights) w = get();
    g.means.assign(comps[s], std::vector<double>(model.dim));
    for (auto& mu : g.means) {
      for (double& v : mu) v = get();
    }
    g.vars.assign(comps[s], std::vector<double>(model.dim));
    for (auto& var : g.vars) {
      for (double& v : var) v = get();
    }
  }
  return model;
}

}  // namespace revkit

#endif  // REVKIT_GMM_HPP_
