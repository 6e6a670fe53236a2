// revkit/model_io.hpp

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

// Versioned model container: text header (layout, activations, priors,
// context window, feature-config hash) followed by a little-endian float32
// payload of weights, biases, and the input normalization moments.

#ifndef REVKIT_MODEL_IO_HPP_
#define REVKIT_MODEL_IO_HPP_

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "revkit/common.hpp"
#include "revkit/feature_pipeline.hpp"
#include "revkit/mlp.hpp"

namespace revkit {

// A trained network plus everything needed to run it on raw audio.
struct MlpBundle {
  MlpModel<float> net;
  ContextWindowSpec window;
  std::uint64_t feature_hash = 0;
  std::vector<double> input_mean;
  std::vector<double> input_var;

  NormalizationStats stats() const {
    return NormalizationStats::from_moments(input_mean, input_var);
  }
};

inline void save_mlp(const MlpBundle& bundle, const std::string& path) {
  const MlpModel<float>& m = bundle.net;
  require(!m.weights.empty(), "save_mlp: empty model");
  require(bundle.input_mean.size() ==
                  static_cast<std::size_t>(m.input_dim()) &&
              bundle.input_var.size() == bundle.input_mean.size(),
          "save_mlp: normalization moments must match the input dim");
  require(m.priors.size() == static_cast<std::size_t>(m.output_dim()),
          "save_mlp: priors must match the output dim");

  std::ofstream os(path, std::ios::binary);
  require(os.good(), "save_mlp: cannot open '", path, "'");
  os << "REVKIT_MLP 1\n";
  os << "layout";
  for (int d : m.layout()) os << ' ' << d;
  os << "\nhidden sigmoid\noutput softmax\n";
  os << "window " << bundle.window.past << ' ' << bundle.window.future << "\n";
  os << "feature_hash " << std::hex << bundle.feature_hash << std::dec << "\n";
  os << "priors" << std::setprecision(17);
  for (double p : m.priors) os << ' ' << p;
  os << "\nbinary\n";

  auto put = [&os](float f) {
    char b[4];
    std::memcpy(b, &f, 4);
    os.write(b, 4);
  };
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    const auto& w = m.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) put(w(i, j));
    }
    for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) {
      put(m.biases[l](i));
    }
  }
  for (double v : bundle.input_mean) put(static_cast<float>(v));
  for (double v : bundle.input_var) put(static_cast<float>(v));
  require(os.good(), "save_mlp: write failed for '", path, "'");
}

inline MlpBundle load_mlp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "load_mlp: cannot open '", path, "'");
  std::string magic, key, line;
  int version = 0;
  is >> magic >> version;
  require(magic == "REVKIT_MLP" && version == 1, "load_mlp: '", path,
          "' has unsupported header");

  MlpBundle bundle;
  std::vector<int> layout;
  is >> key;
  require(key == "layout", "load_mlp: missing layout in '", path, "'");
  std::getline(is, line);
  {
    std::istringstream ls(line);
    int d;
    while (ls >> d) layout.push_back(d);
  }
  check_layout(layout);

  std::string hidden_act, output_act;
  is >> key >> hidden_act;
  require(key == "hidden" && hidden_act == "sigmoid",
          "load_mlp: unsupported hidden activation in '", path, "'");
  is >> key >> output_act;
  require(key == "output" && output_act == "softmax",
          "load_mlp: unsupported output activation in '", path, "'");
  is >> key >> bundle.window.past >> bundle.window.future;
  require(key == "window" && !is.fail(), "load_mlp: bad window in '", path,
          "'");
  is >> key >> std::hex >> bundle.feature_hash >> std::dec;
  require(key == "feature_hash" && !is.fail(), "load_mlp: bad feature hash in '",
          path, "'");

  is >> key;
  require(key == "priors", "load_mlp: missing priors in '", path, "'");
  std::getline(is, line);
  {
    std::istringstream ls(line);
    double p;
    while (ls >> p) bundle.net.priors.push_back(p);
  }
  require(bundle.net.priors.size() ==
              static_cast<std::size_t>(layout.back()),
          "load_mlp: ", bundle.net.priors.size(), " priors for ",
          layout.back(), " classes in '", path, "'");

  is >> key;
  require(key == "binary", "load_mlp: missing payload marker in '", path, "'");
  is.get();  // newline

  auto get = [&is, &path]() {
    char b[4];
    is.read(b, 4);
    require(is.gcount() == 4, "load_mlp: truncated payload in '", path, "'");
    float f;
    std::memcpy(&f, b, 4);
    return f;
  };
  for (std::size_t l = 0; l + 1 < layout.size(); ++l) {
    MlpModel<float>::Matrix w(layout[l + 1], layout[l]);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = get();
    }
    MlpModel<float>::Vector b(layout[l + 1]);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = get();
    bundle.net.weights.push_back(std::move(w));
    bundle.net.biases.push_back(std::move(b));
  }
  bundle.input_mean.resize(layout.front());
  bundle.input_var.resize(layout.front());
  for (double& v : bundle.input_mean) v = get();
  for (double& v : bundle.input_var) v = get();
  return bundle;
}

}  // namespace revkit

#endif  // REVKIT_MODEL_IO_HPP_
