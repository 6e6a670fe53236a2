// revkit/rbm.hpp

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

// Greedy layer-wise CD-1 pre-training: Gaussian-Bernoulli for the first
// layer, Bernoulli-Bernoulli above; trained weights seed the MLP's hidden
// layers, the output layer stays randomly initialized.

#ifndef REVKIT_RBM_HPP_
#define REVKIT_RBM_HPP_

#include <cstdint>
#include <vector>

#include "revkit/common.hpp"
#include "revkit/mlp.hpp"
#include "revkit/rng.hpp"
#include "revkit/train.hpp"

namespace revkit {

struct RbmOptions {
  int epochs_per_layer = 3;
  double lr_gb = 0.001;  // Gaussian-Bernoulli (first layer)
  double lr_bb = 0.01;   // Bernoulli-Bernoulli (upper layers)
  int minibatch = 256;
};

namespace detail {

// CD-1 training of one RBM on the given data matrix.  Visible units of the
// first layer are real-valued with unit-variance assumption (inputs are
// normalized features), so reconstruction is the linear mean.
struct RbmLayerResult {
  BatchMatrix weights;             // hid x vis
  Eigen::VectorXf hbias;
  std::vector<double> recon_mse;   // per epoch
};

inline RbmLayerResult train_rbm_layer(const BatchMatrix& data, int hidden,
                                      bool gaussian_visible, double lr,
                                      int epochs, int minibatch, Rng& rng) {
  const int vis = static_cast<int>(data.cols());
  const Eigen::Index N = data.rows();
  RbmLayerResult out;
  out.weights.resize(hidden, vis);
  for (int i = 0; i < hidden; ++i) {
    for (int j = 0; j < vis; ++j) {
      out.weights(i, j) = static_cast<float>(0.01 * rng.gaussian());
    }
  }
  out.hbias = Eigen::VectorXf::Zero(hidden);
  Eigen::VectorXf vbias = Eigen::VectorXf::Zero(vis);

  std::vector<std::size_t> order(static_cast<std::size_t>(N));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  BatchMatrix v0, h0p, h0s, v1, h1p;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.index(i)]);
    }
    double se = 0.0;
    std::size_t count = 0;
    for (Eigen::Index start = 0; start < N; start += minibatch) {
      const Eigen::Index B = std::min<Eigen::Index>(minibatch, N - start);
      v0.resize(B, vis);
      for (Eigen::Index i = 0; i < B; ++i) {
        v0.row(i) = data.row(static_cast<Eigen::Index>(order[start + i]));
      }

      h0p = v0 * out.weights.transpose();
      h0p.rowwise() += out.hbias.transpose();
      sigmoid_inplace(h0p);
      h0s = h0p.unaryExpr([&rng](float p) {
        return rng.uniform() < p ? 1.0f : 0.0f;
      });

      v1 = h0s * out.weights;
      v1.rowwise() += vbias.transpose();
      if (!gaussian_visible) sigmoid_inplace(v1);

      h1p = v1 * out.weights.transpose();
      h1p.rowwise() += out.hbias.transpose();
      sigmoid_inplace(h1p);

      const float step = static_cast<float>(lr / B);
      out.weights += step * (h0p.transpose() * v0 - h1p.transpose() * v1);
      vbias += step * (v0 - v1).colwise().sum().transpose();
      out.hbias += step * (h0p - h1p).colwise().sum().transpose();

      se += static_cast<double>((v0 - v1).squaredNorm());
      count += static_cast<std::size_t>(B) * vis;
    }
    out.recon_mse.push_back(se / static_cast<double>(count));
  }
  return out;
}

}  // namespace detail

// Builds an MLP whose hidden layers come from stacked RBMs trained on the
// dataset; per-layer reconstruction errors are reported through `recon_mse`.
inline MlpModel<float> rbm_pretrain(
    const FrameDataset& ds, const std::vector<int>& layout, std::uint64_t seed,
    const RbmOptions& opts = RbmOptions(),
    std::vector<std::vector<double>>* recon_mse = nullptr) {
  check_layout(layout);
  require(layout.front() == ds.dim(), "rbm_pretrain: layout input ",
          layout.front(), " != feature dim ", ds.dim());
  require(opts.epochs_per_layer >= 1, "rbm_pretrain: need >= 1 epoch");

  MlpModel<float> model = init_random<float>(layout, derive_seed(seed, "mlp"));
  detail::BatchMatrix rep(static_cast<Eigen::Index>(ds.size()), ds.dim());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ds.fill_row(i, rep.row(static_cast<Eigen::Index>(i)).data());
  }

  Rng rng(derive_seed(seed, "rbm"));
  const int hidden_layers = static_cast<int>(layout.size()) - 2;
  for (int l = 0; l < hidden_layers; ++l) {
    bool gaussian = l == 0;
    detail::RbmLayerResult rbm = detail::train_rbm_layer(
        rep, layout[l + 1], gaussian, gaussian ? opts.lr_gb : opts.lr_bb,
        opts.epochs_per_layer, opts.minibatch, rng);
    model.weights[l] = rbm.weights;
    model.biases[l] = rbm.hbias;
    if (recon_mse) recon_mse->push_back(rbm.recon_mse);

    // Propagate data through the freshly trained layer.
    detail::BatchMatrix next = rep * rbm.weights.transpose();
    next.rowwise() += rbm.hbias.transpose();
    detail::sigmoid_inplace(next);
    rep = std::move(next);
  }
  return model;
}

}  // namespace revkit

#endif  // REVKIT_RBM_HPP_
