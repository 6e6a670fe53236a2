// revkit/mlp.hpp

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

// Layered sigmoid network with softmax output.  Templated on the scalar type
// so gradients can be verified in double while production runs in float.

#ifndef REVKIT_MLP_HPP_
#define REVKIT_MLP_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "revkit/common.hpp"
#include "revkit/rng.hpp"

namespace revkit {

template <typename Real>
struct MlpModel {
  using Matrix =
      Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

  std::vector<Matrix> weights;  // [layer]: out x in
  std::vector<Vector> biases;
  std::vector<double> priors;   // output-class priors, sum to 1

  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
  int num_layers() const { return static_cast<int>(weights.size()); }

  std::vector<int> layout() const {
    std::vector<int> l;
    l.push_back(input_dim());
    for (const Matrix& w : weights) l.push_back(static_cast<int>(w.rows()));
    return l;
  }
};

inline void check_layout(const std::vector<int>& layout) {
  require(layout.size() >= 2, "MlpModel: layout needs input and output sizes");
  for (int d : layout) require(d > 0, "MlpModel: non-positive layer size");
}

// Glorot uniform init: W ~ U(-r, r), r = sqrt(6/(fan_in+fan_out)); zero
// biases; uniform priors.  Fill order is row-major per layer, so sequences
// are identical across scalar types.
template <typename Real>
MlpModel<Real> init_random(const std::vector<int>& layout,
                           std::uint64_t seed) {
  check_layout(layout);
  MlpModel<Real> m;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layout.size(); ++l) {
    int in = layout[l], out = layout[l + 1];
    double r = std::sqrt(6.0 / (in + out));
    typename MlpModel<Real>::Matrix w(out, in);
    for (int i = 0; i < out; ++i) {
      for (int j = 0; j < in; ++j) {
        w(i, j) = static_cast<Real>(rng.uniform(-r, r));
      }
    }
    m.weights.push_back(std::move(w));
    m.biases.push_back(MlpModel<Real>::Vector::Zero(out));
  }
  m.priors.assign(layout.back(), 1.0 / layout.back());
  return m;
}

namespace detail {

template <typename Derived>
void sigmoid_inplace(Eigen::MatrixBase<Derived>& x) {
  using Real = typename Derived::Scalar;
  x = x.unaryExpr([](Real v) {
    return v >= Real(0) ? Real(1) / (Real(1) + std::exp(-v))
                        : Real(1) - Real(1) / (Real(1) + std::exp(v));
  });
}

template <typename Matrix>
void softmax_rows_inplace(Matrix& x) {
  using Real = typename Matrix::Scalar;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Real mx = x.row(i).maxCoeff();
    x.row(i) = (x.row(i).array() - mx).exp();
    Real sum = x.row(i).sum();
    x.row(i) /= sum;
  }
}

}  // namespace detail

// Activations of every layer for a minibatch; index 0 is the input itself.
template <typename Real>
std::vector<typename MlpModel<Real>::Matrix> forward_activations(
    const MlpModel<Real>& m, const typename MlpModel<Real>::Matrix& x) {
  require(static_cast<int>(x.cols()) == m.input_dim(),
          "forward: input width ", x.cols(), " != model input ",
          m.input_dim());
  std::vector<typename MlpModel<Real>::Matrix> acts;
  acts.reserve(m.num_layers() + 1);
  acts.push_back(x);
  for (int l = 0; l < m.num_layers(); ++l) {
    typename MlpModel<Real>::Matrix z =
        acts.back() * m.weights[l].transpose();
    z.rowwise() += m.biases[l].transpose();
    if (l + 1 < m.num_layers()) {
      detail::sigmoid_inplace(z);
    } else {
      detail::softmax_rows_inplace(z);
    }
    acts.push_back(std::move(z));
  }
  return acts;
}

template <typename Real>
typename MlpModel<Real>::Matrix forward(
    const MlpModel<Real>& m, const typename MlpModel<Real>::Matrix& x) {
  return forward_activations(m, x).back();
}

// One SGD step on a minibatch; parameters move by lr times the mean
// cross-entropy gradient.  Returns the batch's mean cross-entropy.
template <typename Real>
double backprop_step(MlpModel<Real>& m,
                     const typename MlpModel<Real>::Matrix& x,
                     const std::vector<std::uint32_t>& labels, double lr) {
  using Matrix = typename MlpModel<Real>::Matrix;
  const Eigen::Index B = x.rows();
  require(B > 0, "backprop_step: empty minibatch");
  require(labels.size() == static_cast<std::size_t>(B),
          "backprop_step: ", labels.size(), " labels for ", B, " rows");
  const int C = m.output_dim();
  for (std::uint32_t y : labels) {
    require(static_cast<int>(y) < C, "backprop_step: label ", y,
            " out of range [0, ", C, ")");
  }

  std::vector<Matrix> acts = forward_activations(m, x);
  const Matrix& post = acts.back();
  double ce = 0.0;
  for (Eigen::Index i = 0; i < B; ++i) {
    ce -= std::log(std::max(static_cast<double>(post(i, labels[i])), 1e-30));
  }
  ce /= static_cast<double>(B);

  // delta holds dL/dz of the current layer, already divided by B.
  Matrix delta = post;
  for (Eigen::Index i = 0; i < B; ++i) {
    delta(i, labels[i]) -= Real(1);
  }
  delta /= static_cast<Real>(B);

  for (int l = m.num_layers() - 1; l >= 0; --l) {
    Matrix grad_w = delta.transpose() * acts[l];
    typename MlpModel<Real>::Vector grad_b = delta.colwise().sum().transpose();
    if (l > 0) {
      Matrix back = delta * m.weights[l];
      delta = back.array() * (acts[l].array() * (Real(1) - acts[l].array()));
    }
    m.weights[l] -= static_cast<Real>(lr) * grad_w;
    m.biases[l] -= static_cast<Real>(lr) * grad_b;
  }
  return ce;
}

// 100 * fraction of frames whose argmax posterior matches the label; argmax
// ties break toward the lowest class index.
template <typename Real>
double frame_accuracy(const MlpModel<Real>& m,
                      const typename MlpModel<Real>::Matrix& x,
                      const std::vector<std::uint32_t>& labels) {
  require(labels.size() == static_cast<std::size_t>(x.rows()),
          "frame_accuracy: ", labels.size(), " labels for ", x.rows(),
          " rows");
  require(x.rows() > 0, "frame_accuracy: empty input");
  typename MlpModel<Real>::Matrix post = forward(m, x);
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < post.rows(); ++i) {
    int best = 0;
    Real best_v = post(i, 0);
    for (int c = 1; c < post.cols(); ++c) {
      if (post(i, c) > best_v) {
        best_v = post(i, c);
        best = c;
      }
    }
    if (static_cast<std::uint32_t>(best) == labels[i]) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(post.rows());
}

// Class priors from training label counts, add-one smoothed.
inline std::vector<double> estimate_priors(
    const std::vector<std::uint32_t>& labels, int num_classes) {
  require(num_classes > 0, "estimate_priors: no classes");
  std::vector<double> counts(num_classes, 1.0);
  for (std::uint32_t y : labels) {
    require(static_cast<int>(y) < num_classes, "estimate_priors: label ", y,
            " out of range");
    counts[y] += 1.0;
  }
  double total = static_cast<double>(labels.size()) + num_classes;
  for (double& c : counts) c /= total;
  return counts;
}

}  // namespace revkit

#endif  // REVKIT_MLP_HPP_
