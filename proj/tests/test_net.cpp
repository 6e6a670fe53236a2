// tests/test_net.cpp

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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "revkit/mlp.hpp"
#include "revkit/model_io.hpp"
#include "revkit/rbm.hpp"
#include "revkit/rng.hpp"
#include "revkit/train.hpp"
#include "testing_util.hpp"

using namespace revkit;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

template <typename Real>
using Mat = typename MlpModel<Real>::Matrix;

// Flattened read/write access to every parameter of a model, weights first
// (row-major within a layer), then biases, layer by layer.
template <typename Real>
std::vector<Real*> param_ptrs(MlpModel<Real>& m) {
  std::vector<Real*> out;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    Real* w = m.weights[l].data();
    for (Eigen::Index k = 0; k < m.weights[l].size(); ++k) out.push_back(w + k);
    Real* b = m.biases[l].data();
    for (Eigen::Index k = 0; k < m.biases[l].size(); ++k) out.push_back(b + k);
  }
  return out;
}

// Mean cross-entropy without touching the model: a zero-rate step returns
// the batch loss and moves nothing.
template <typename Real>
double batch_loss(const MlpModel<Real>& m, const Mat<Real>& x,
                  const std::vector<std::uint32_t>& labels) {
  MlpModel<Real> copy = m;
  return backprop_step(copy, x, labels, 0.0);
}

template <typename Real>
MlpModel<Real> zero_model(const std::vector<int>& layout) {
  MlpModel<Real> m = init_random<Real>(layout, 0);
  for (auto& w : m.weights) w.setZero();
  return m;
}

// Two gaussian blobs separable along the first coordinate.
void make_blobs(int n, std::uint64_t seed, Mat<float>* x,
                std::vector<std::uint32_t>* labels) {
  Rng rng(seed);
  x->resize(n, 2);
  labels->resize(n);
  for (int i = 0; i < n; ++i) {
    std::uint32_t c = i % 2 == 0 ? 0u : 1u;
    double sign = c == 0 ? -1.0 : 1.0;
    (*x)(i, 0) = static_cast<float>(sign * (1.0 + 0.3 * rng.gaussian()));
    (*x)(i, 1) = static_cast<float>(0.5 * rng.gaussian());
    (*labels)[i] = c;
  }
}

// A tiny labeled corpus in base-feature space with gaussian class clusters.
struct ToyCorpus {
  std::vector<FloatMatrix> feats;
  std::vector<std::vector<std::uint32_t>> labels;
};

ToyCorpus make_toy_corpus(int num_utts, int frames_per_utt, int dim,
                          int num_classes, std::uint64_t seed) {
  ToyCorpus c;
  Rng rng(seed);
  for (int u = 0; u < num_utts; ++u) {
    FloatMatrix m;
    m.rows = static_cast<std::uint32_t>(frames_per_utt);
    m.cols = static_cast<std::uint32_t>(dim);
    m.data.resize(m.rows * m.cols);
    std::vector<std::uint32_t> lab(frames_per_utt);
    for (int t = 0; t < frames_per_utt; ++t) {
      std::uint32_t y =
          static_cast<std::uint32_t>(rng.index(static_cast<std::size_t>(num_classes)));
      lab[t] = y;
      for (int d = 0; d < dim; ++d) {
        double mean = d == static_cast<int>(y) % dim ? 2.0 * (1 + y) : 0.0;
        m.at(static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(d)) =
            static_cast<float>(mean + 0.4 * rng.gaussian());
      }
    }
    c.feats.push_back(std::move(m));
    c.labels.push_back(std::move(lab));
  }
  return c;
}

FrameDataset toy_dataset(const ToyCorpus& c, ContextWindowSpec win,
                         int num_classes) {
  return FrameDataset(c.feats, c.labels, win, num_classes);
}

}  // namespace

TEST_CASE("random init obeys the layout and the glorot bound", "[net]") {
  std::vector<int> layout = {4, 7, 3};
  MlpModel<double> m = init_random<double>(layout, 42);

  REQUIRE(m.num_layers() == 2);
  REQUIRE(m.input_dim() == 4);
  REQUIRE(m.output_dim() == 3);
  REQUIRE(m.layout() == layout);
  REQUIRE(m.weights[0].rows() == 7);
  REQUIRE(m.weights[0].cols() == 4);
  REQUIRE(m.weights[1].rows() == 3);
  REQUIRE(m.weights[1].cols() == 7);

  double r0 = std::sqrt(6.0 / (4 + 7));
  double r1 = std::sqrt(6.0 / (7 + 3));
  REQUIRE(m.weights[0].array().abs().maxCoeff() <= r0);
  REQUIRE(m.weights[1].array().abs().maxCoeff() <= r1);
  REQUIRE(m.weights[0].array().abs().maxCoeff() > 0.0);

  for (const auto& b : m.biases) {
    REQUIRE(b.array().abs().maxCoeff() == 0.0);
  }
  REQUIRE(m.priors.size() == 3);
  for (double p : m.priors) REQUIRE(p == Approx(1.0 / 3.0));

  SECTION("same seed reproduces, another seed differs") {
    MlpModel<double> again = init_random<double>(layout, 42);
    MlpModel<double> other = init_random<double>(layout, 43);
    for (int l = 0; l < 2; ++l) {
      REQUIRE((m.weights[l] - again.weights[l]).cwiseAbs().maxCoeff() == 0.0);
    }
    REQUIRE((m.weights[0] - other.weights[0]).cwiseAbs().maxCoeff() > 0.0);
  }

  SECTION("float and double instances draw the same sequence") {
    MlpModel<float> mf = init_random<float>(layout, 42);
    for (int l = 0; l < 2; ++l) {
      for (Eigen::Index i = 0; i < m.weights[l].rows(); ++i) {
        for (Eigen::Index j = 0; j < m.weights[l].cols(); ++j) {
          REQUIRE(mf.weights[l](i, j) ==
                  static_cast<float>(m.weights[l](i, j)));
        }
      }
    }
  }

  SECTION("bad layouts are rejected") {
    REQUIRE_THROWS_WITH((init_random<double>({5}, 1)),
                        ContainsSubstring("layout"));
    REQUIRE_THROWS_WITH((init_random<double>({5, 0, 2}, 1)),
                        ContainsSubstring("non-positive"));
  }
}

TEST_CASE("forward pass produces normalized posterior rows", "[net]") {
  MlpModel<double> m = init_random<double>({6, 9, 4}, 7);
  Mat<double> x(20, 6);
  Rng rng(11);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.gaussian();

  Mat<double> post = forward(m, x);
  REQUIRE(post.rows() == 20);
  REQUIRE(post.cols() == 4);
  for (Eigen::Index i = 0; i < post.rows(); ++i) {
    REQUIRE(post.row(i).sum() == Approx(1.0).margin(1e-6));
    REQUIRE(post.row(i).minCoeff() >= 0.0);
  }

  SECTION("an all-zero model is maximally uncertain") {
    MlpModel<double> z = zero_model<double>({6, 9, 4});
    Mat<double> p = forward(z, x);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      REQUIRE(p.data()[i] == Approx(0.25).margin(1e-12));
    }
  }

  SECTION("activation stack exposes every layer") {
    auto acts = forward_activations(m, x);
    REQUIRE(acts.size() == 3);
    REQUIRE((acts[0] - x).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(acts[1].cols() == 9);
    // Hidden activations are sigmoids, so they live strictly inside (0, 1).
    REQUIRE(acts[1].minCoeff() > 0.0);
    REQUIRE(acts[1].maxCoeff() < 1.0);
  }
}

TEST_CASE("gradient steps fit a linearly separable toy problem", "[net]") {
  Mat<float> x;
  std::vector<std::uint32_t> labels;
  make_blobs(60, 3, &x, &labels);

  MlpModel<float> m = init_random<float>({2, 2}, 5);
  for (int step = 0; step < 200; ++step) {
    backprop_step(m, x, labels, 0.5);
  }
  REQUIRE(frame_accuracy(m, x, labels) >= 95.0);
}

TEST_CASE("a zero learning rate scores the batch without moving", "[net]") {
  MlpModel<double> m = init_random<double>({5, 6, 3}, 21);
  MlpModel<double> before = m;
  Mat<double> x(8, 5);
  Rng rng(22);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.gaussian();
  std::vector<std::uint32_t> labels = {0, 1, 2, 0, 1, 2, 0, 1};

  double ce = backprop_step(m, x, labels, 0.0);
  REQUIRE(std::isfinite(ce));
  REQUIRE(ce > 0.0);
  for (int l = 0; l < m.num_layers(); ++l) {
    REQUIRE((m.weights[l] - before.weights[l]).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((m.biases[l] - before.biases[l]).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("uniform posteriors cost exactly log C") {
    MlpModel<double> z = zero_model<double>({5, 6, 3});
    double uniform_ce = backprop_step(z, x, labels, 0.0);
    REQUIRE(uniform_ce == Approx(std::log(3.0)).margin(1e-12));
  }
}

TEST_CASE("backpropagation matches central finite differences", "[net]") {
  // One instance of the acceptance-scale check, on a smaller net: the
  // analytic gradient is read off a unit-rate step, the numeric one from
  // central differences of the batch loss.
  MlpModel<double> m = init_random<double>({3, 4, 2}, 99);
  Mat<double> x(6, 3);
  Rng rng(100);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.gaussian();
  std::vector<std::uint32_t> labels = {0, 1, 1, 0, 1, 0};

  MlpModel<double> stepped = m;
  backprop_step(stepped, x, labels, 1.0);

  std::vector<double*> base = param_ptrs(m);
  std::vector<double*> moved = param_ptrs(stepped);
  REQUIRE(base.size() == moved.size());
  REQUIRE(base.size() == 3 * 4 + 4 + 4 * 2 + 2);

  const double eps = 1e-5;
  double worst = 0.0;
  for (std::size_t k = 0; k < base.size(); ++k) {
    double analytic = *base[k] - *moved[k];  // lr = 1, so delta is the grad

    MlpModel<double> probe = m;
    *param_ptrs(probe)[k] = *base[k] + eps;
    double up = batch_loss(probe, x, labels);
    *param_ptrs(probe)[k] = *base[k] - eps;
    double down = batch_loss(probe, x, labels);
    double numeric = (up - down) / (2.0 * eps);

    double rel = std::abs(analytic - numeric) /
                 std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, rel);
  }
  REQUIRE(worst <= 1e-4);
}

TEST_CASE("a small step lowers the batch loss", "[net]") {
  MlpModel<double> m = init_random<double>({4, 5, 3}, 17);
  Mat<double> x(16, 4);
  Rng rng(18);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.gaussian();
  std::vector<std::uint32_t> labels(16);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 3;

  double before = batch_loss(m, x, labels);
  backprop_step(m, x, labels, 1e-3);
  double after = batch_loss(m, x, labels);
  REQUIRE(after < before);
}

TEST_CASE("backprop validates its inputs", "[net]") {
  MlpModel<float> m = init_random<float>({2, 3}, 1);
  Mat<float> x(2, 2);
  x.setZero();

  REQUIRE_THROWS_WITH(backprop_step(m, x, {0, 3}, 0.1),
                      ContainsSubstring("label 3 out of range"));
  REQUIRE_THROWS_WITH(backprop_step(m, x, {0}, 0.1),
                      ContainsSubstring("labels"));
  Mat<float> empty(0, 2);
  REQUIRE_THROWS_WITH(backprop_step(m, empty, {}, 0.1),
                      ContainsSubstring("empty minibatch"));
}

TEST_CASE("frame accuracy counts argmax hits in percent", "[net]") {
  // Zero weights with a biased output layer make the argmax explicit.
  MlpModel<float> m = zero_model<float>({2, 3});
  m.biases[0] << 1.0f, 0.0f, -1.0f;  // class 0 always wins
  Mat<float> x(4, 2);
  x.setRandom();

  REQUIRE(frame_accuracy(m, x, {0, 0, 0, 0}) == Approx(100.0));
  REQUIRE(frame_accuracy(m, x, {1, 1, 1, 1}) == Approx(0.0));
  REQUIRE(frame_accuracy(m, x, {0, 1, 2, 1}) == Approx(25.0));

  SECTION("posterior ties resolve to the lowest class index") {
    MlpModel<float> uniform = zero_model<float>({2, 3});
    REQUIRE(frame_accuracy(uniform, x, {0, 0, 1, 2}) == Approx(50.0));
  }

  SECTION("label count must match the batch") {
    REQUIRE_THROWS_WITH(frame_accuracy(m, x, {0, 0}),
                        ContainsSubstring("2 labels for 4 rows"));
  }
}

TEST_CASE("prior estimation applies add-one smoothing", "[net]") {
  std::vector<double> p = estimate_priors({0, 0, 1}, 3);
  REQUIRE(p.size() == 3);
  REQUIRE(p[0] == Approx(3.0 / 6.0));
  REQUIRE(p[1] == Approx(2.0 / 6.0));
  REQUIRE(p[2] == Approx(1.0 / 6.0));

  std::vector<double> empty = estimate_priors({}, 4);
  for (double v : empty) REQUIRE(v == Approx(0.25));

  REQUIRE_THROWS_WITH(estimate_priors({5}, 3),
                      ContainsSubstring("out of range"));
  REQUIRE_THROWS_WITH(estimate_priors({}, 0), ContainsSubstring("no classes"));
}

TEST_CASE("learning rate scheduler replays the canonical trace", "[net]") {
  LrScheduler sched(0.008, 0.5, 0.1);
  std::vector<double> increments = {0.9, 0.6, 0.4, 0.3, 0.05};
  std::vector<double> rates;
  bool stopped = false;
  for (double inc : increments) {
    LrScheduler::Action a = sched.observe(inc);
    if (a == LrScheduler::Action::kStop) {
      stopped = true;
      break;
    }
    rates.push_back(sched.lr());
  }
  REQUIRE(stopped);
  REQUIRE(rates == std::vector<double>{0.008, 0.008, 0.004, 0.002});

  SECTION("halvings are exact powers of two") {
    REQUIRE(rates[2] == 0.008 * 0.5);
    REQUIRE(rates[3] == 0.008 * 0.25);
  }

  SECTION("a weak first epoch stops immediately") {
    LrScheduler s(0.008, 0.5, 0.1);
    REQUIRE(s.observe(0.05) == LrScheduler::Action::kStop);
  }

  SECTION("boundary increments: at keep halve, at stop continue") {
    LrScheduler s(0.008, 0.5, 0.1);
    REQUIRE(s.observe(0.5) == LrScheduler::Action::kHalve);
    LrScheduler s2(0.008, 0.5, 0.1);
    REQUIRE(s2.observe(0.1) != LrScheduler::Action::kStop);
  }

  SECTION("once halving starts it never reverts") {
    LrScheduler s(0.008, 0.5, 0.1);
    s.observe(0.3);
    REQUIRE(s.halving());
    REQUIRE(s.observe(5.0) == LrScheduler::Action::kHalve);
    REQUIRE(s.lr() == Approx(0.002));
  }

  SECTION("schedules with inverted thresholds are rejected") {
    TrainSchedule bad;
    bad.stop_threshold = 0.6;
    REQUIRE_THROWS_WITH(check_schedule(bad),
                        ContainsSubstring("stop_threshold"));
  }
}

TEST_CASE("frame dataset splices windows with edge replication", "[net]") {
  ToyCorpus c;
  FloatMatrix m;
  m.rows = 3;
  m.cols = 2;
  m.data = {0.f, 1.f, 10.f, 11.f, 20.f, 21.f};
  c.feats.push_back(m);
  c.labels.push_back({0, 1, 0});

  FrameDataset ds(c.feats, c.labels, ContextWindowSpec{1, 1}, 2);
  REQUIRE(ds.dim() == 6);
  REQUIRE(ds.size() == 3);
  REQUIRE(ds.num_classes() == 2);
  REQUIRE(ds.label(1) == 1);
  REQUIRE(ds.all_labels() == std::vector<std::uint32_t>{0, 1, 0});

  std::vector<float> row(6);
  ds.fill_row(0, row.data());
  REQUIRE(row == std::vector<float>{0.f, 1.f, 0.f, 1.f, 10.f, 11.f});
  ds.fill_row(2, row.data());
  REQUIRE(row == std::vector<float>{10.f, 11.f, 20.f, 21.f, 20.f, 21.f});

  auto um = ds.utterance_matrix(0);
  REQUIRE(um.rows() == 3);
  REQUIRE(um.cols() == 6);
  REQUIRE(um(1, 0) == 0.f);
  REQUIRE(um(1, 2) == 10.f);
  REQUIRE(um(1, 4) == 20.f);

  SECTION("normalization statistics live in spliced space") {
    NormalizationStats stats = ds.fit_stats();
    REQUIRE(stats.dims() == 6);
    ds.set_stats(stats);
    double sum = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      ds.fill_row(i, row.data());
      sum += row[0];
    }
    REQUIRE(sum / 3.0 == Approx(0.0).margin(1e-4));
  }

  SECTION("label and shape validation") {
    auto bad_labels = c.labels;
    bad_labels[0][1] = 7;
    REQUIRE_THROWS_WITH(FrameDataset(c.feats, bad_labels,
                                     ContextWindowSpec{1, 1}, 2),
                        ContainsSubstring("label"));
    auto short_labels = c.labels;
    short_labels[0].pop_back();
    REQUIRE_THROWS_WITH(FrameDataset(c.feats, short_labels,
                                     ContextWindowSpec{1, 1}, 2),
                        ContainsSubstring("frames"));
    REQUIRE_THROWS_WITH(FrameDataset({}, {}, ContextWindowSpec{1, 1}, 2),
                        ContainsSubstring("empty corpus"));
  }
}

TEST_CASE("epoch training improves a toy corpus and reproduces", "[net]") {
  ToyCorpus train_c = make_toy_corpus(12, 30, 3, 4, 31);
  ToyCorpus dev_c = make_toy_corpus(4, 30, 3, 4, 32);
  ContextWindowSpec win{1, 1};
  FrameDataset train_ds = toy_dataset(train_c, win, 4);
  FrameDataset dev_ds = toy_dataset(dev_c, win, 4);
  NormalizationStats stats = train_ds.fit_stats();
  train_ds.set_stats(stats);
  dev_ds.set_stats(stats);

  TrainSchedule sched;
  sched.max_epochs = 8;
  sched.minibatch = 32;
  sched.initial_lr = 0.05;
  sched.shuffle_seed = 7;

  MlpModel<float> model = init_random<float>({train_ds.dim(), 16, 4}, 9);
  MlpModel<float> twin = model;
  TrainHistory hist = train(model, train_ds, dev_ds, sched);

  REQUIRE(!hist.epochs.empty());
  REQUIRE(hist.epochs.size() <= 8);
  REQUIRE(hist.epochs_to_converge == static_cast<int>(hist.epochs.size()));
  REQUIRE(hist.best_dev_acc >= hist.baseline_dev_acc);
  REQUIRE(hist.best_dev_acc > 60.0);
  REQUIRE(hist.epochs[0].lr == Approx(0.05));
  for (std::size_t e = 1; e < hist.epochs.size(); ++e) {
    REQUIRE(hist.epochs[e].lr <= hist.epochs[e - 1].lr);
  }

  SECTION("the returned model is the best dev scorer") {
    double acc = detail::dataset_accuracy(model, dev_ds);
    REQUIRE(acc == Approx(hist.best_dev_acc).margin(1e-9));
  }

  SECTION("training is bit reproducible") {
    TrainHistory hist2 = train(twin, train_ds, dev_ds, sched);
    REQUIRE(hist2.epochs.size() == hist.epochs.size());
    for (std::size_t e = 0; e < hist.epochs.size(); ++e) {
      REQUIRE(hist2.epochs[e].lr == hist.epochs[e].lr);
      REQUIRE(hist2.epochs[e].train_ce == hist.epochs[e].train_ce);
      REQUIRE(hist2.epochs[e].dev_acc == hist.epochs[e].dev_acc);
    }
    for (int l = 0; l < model.num_layers(); ++l) {
      REQUIRE((model.weights[l] - twin.weights[l]).cwiseAbs().maxCoeff() ==
              0.0f);
    }
  }

  SECTION("a single epoch yields a single record") {
    TrainSchedule one = sched;
    one.max_epochs = 1;
    MlpModel<float> m1 = init_random<float>({train_ds.dim(), 16, 4}, 9);
    TrainHistory h1 = train(m1, train_ds, dev_ds, one);
    REQUIRE(h1.epochs.size() == 1);
  }

  SECTION("dimension mismatches are rejected") {
    MlpModel<float> wrong = init_random<float>({5, 4}, 2);
    REQUIRE_THROWS_WITH(train(wrong, train_ds, dev_ds, sched),
                        ContainsSubstring("model input"));
  }
}

TEST_CASE("close-talk transfer copies parameters then fine-tunes", "[net]") {
  ToyCorpus train_c = make_toy_corpus(8, 25, 3, 4, 51);
  ToyCorpus dev_c = make_toy_corpus(3, 25, 3, 4, 52);
  ContextWindowSpec win{0, 0};
  FrameDataset train_ds = toy_dataset(train_c, win, 4);
  FrameDataset dev_ds = toy_dataset(dev_c, win, 4);
  NormalizationStats stats = train_ds.fit_stats();
  train_ds.set_stats(stats);
  dev_ds.set_stats(stats);

  MlpModel<float> ct = init_random<float>({3, 10, 4}, 77);

  SECTION("zero fine-tune epochs is an exact parameter copy") {
    MlpModel<float> model;
    TrainSchedule sched;
    sched.max_epochs = 0;
    TrainHistory hist =
        ct_pretrain_transfer(ct, model, train_ds, dev_ds, sched, 0.005);
    REQUIRE(hist.epochs.empty());
    REQUIRE(hist.epochs_to_converge == 0);
    REQUIRE(model.num_layers() == ct.num_layers());
    for (int l = 0; l < model.num_layers(); ++l) {
      REQUIRE((model.weights[l] - ct.weights[l]).cwiseAbs().maxCoeff() ==
              0.0f);
      REQUIRE((model.biases[l] - ct.biases[l]).cwiseAbs().maxCoeff() == 0.0f);
    }
  }

  SECTION("fine-tuning runs at the reduced rate") {
    MlpModel<float> model;
    TrainSchedule sched;
    sched.max_epochs = 2;
    sched.minibatch = 32;
    TrainHistory hist =
        ct_pretrain_transfer(ct, model, train_ds, dev_ds, sched, 0.005);
    REQUIRE(!hist.epochs.empty());
    REQUIRE(hist.epochs[0].lr == Approx(0.005));
  }

  SECTION("layout mismatches are rejected") {
    MlpModel<float> model;
    TrainSchedule sched;
    MlpModel<float> narrow = init_random<float>({2, 10, 4}, 1);
    REQUIRE_THROWS_WITH(
        ct_pretrain_transfer(narrow, model, train_ds, dev_ds, sched, 0.005),
        ContainsSubstring("layout mismatch"));
    MlpModel<float> shallow = init_random<float>({3, 10, 5}, 1);
    REQUIRE_THROWS_WITH(
        ct_pretrain_transfer(shallow, model, train_ds, dev_ds, sched, 0.005),
        ContainsSubstring("layout mismatch"));
  }
}

TEST_CASE("layerwise pretraining shapes and reproducibility", "[net]") {
  ToyCorpus c = make_toy_corpus(10, 20, 3, 4, 61);
  FrameDataset ds = toy_dataset(c, ContextWindowSpec{1, 1}, 4);
  ds.set_stats(ds.fit_stats());

  std::vector<int> layout = {ds.dim(), 12, 8, 4};
  RbmOptions opts;
  opts.epochs_per_layer = 3;
  opts.minibatch = 32;

  std::vector<std::vector<double>> mse;
  MlpModel<float> model = rbm_pretrain(ds, layout, 5, opts, &mse);

  REQUIRE(model.layout() == layout);
  REQUIRE(mse.size() == 2);  // one trace per hidden layer
  for (const auto& layer_mse : mse) {
    REQUIRE(layer_mse.size() == 3);
    for (double v : layer_mse) {
      REQUIRE(std::isfinite(v));
      REQUIRE(v >= 0.0);
    }
  }

  SECTION("reconstruction error mostly shrinks across seeds") {
    int improved = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      std::vector<std::vector<double>> trace;
      rbm_pretrain(ds, layout, seed, opts, &trace);
      if (trace[0].back() < trace[0].front()) ++improved;
    }
    REQUIRE(improved >= 3);
  }

  SECTION("pretraining is deterministic") {
    MlpModel<float> again = rbm_pretrain(ds, layout, 5, opts);
    for (int l = 0; l < model.num_layers(); ++l) {
      REQUIRE((model.weights[l] - again.weights[l]).cwiseAbs().maxCoeff() ==
              0.0f);
    }
  }

  SECTION("the softmax layer keeps its random initialization") {
    // Hidden layers are overwritten by RBM weights; the output layer must
    // still look like a fresh Glorot draw, not zeros.
    double r = std::sqrt(6.0 / (8 + 4));
    REQUIRE(model.weights.back().cwiseAbs().maxCoeff() <= r);
    REQUIRE(model.weights.back().cwiseAbs().maxCoeff() > 0.0f);
    REQUIRE(model.biases.back().cwiseAbs().maxCoeff() == 0.0f);
  }

  SECTION("layout and option validation") {
    REQUIRE_THROWS_WITH(rbm_pretrain(ds, {5, 12, 4}, 1, opts),
                        ContainsSubstring("layout input"));
    RbmOptions bad = opts;
    bad.epochs_per_layer = 0;
    REQUIRE_THROWS_WITH(rbm_pretrain(ds, layout, 1, bad),
                        ContainsSubstring("epoch"));
  }
}

TEST_CASE("model bundles survive a save and load round trip", "[net]") {
  testutil::TempDir tmp("mlp");
  MlpBundle bundle;
  bundle.net = init_random<float>({6, 5, 4}, 123);
  bundle.net.priors = estimate_priors({0, 1, 1, 2, 3, 3, 3}, 4);
  bundle.window = ContextWindowSpec{3, 2};
  bundle.feature_hash = 0xdeadbeefcafe1234ull;
  for (int d = 0; d < 6; ++d) {
    bundle.input_mean.push_back(0.25 * d - 0.5);
    bundle.input_var.push_back(1.0 + 0.1 * d);
  }

  std::string path = tmp.file("net.mlp");
  save_mlp(bundle, path);
  MlpBundle back = load_mlp(path);

  REQUIRE(back.net.layout() == bundle.net.layout());
  REQUIRE(back.window.past == 3);
  REQUIRE(back.window.future == 2);
  REQUIRE(back.feature_hash == bundle.feature_hash);
  REQUIRE(back.net.priors.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE(back.net.priors[i] == bundle.net.priors[i]);
  }
  for (int l = 0; l < bundle.net.num_layers(); ++l) {
    REQUIRE((back.net.weights[l] - bundle.net.weights[l])
                .cwiseAbs()
                .maxCoeff() == 0.0f);
    REQUIRE((back.net.biases[l] - bundle.net.biases[l])
                .cwiseAbs()
                .maxCoeff() == 0.0f);
  }
  for (int d = 0; d < 6; ++d) {
    REQUIRE(back.input_mean[d] ==
            Approx(bundle.input_mean[d]).margin(1e-6));
    REQUIRE(back.input_var[d] == Approx(bundle.input_var[d]).margin(1e-6));
  }

  SECTION("loaded bundles predict identically") {
    Mat<float> x(5, 6);
    x.setRandom();
    Mat<float> a = forward(bundle.net, x);
    Mat<float> b = forward(back.net, x);
    REQUIRE((a - b).cwiseAbs().maxCoeff() == 0.0f);
  }

  SECTION("corrupted headers are rejected") {
    std::string bytes = testutil::read_file_bytes(path);
    bytes[0] = 'X';
    std::string bad = tmp.file("bad.mlp");
    testutil::write_file_bytes(bad, bytes);
    REQUIRE_THROWS_WITH(load_mlp(bad), ContainsSubstring("unsupported header"));
  }

  SECTION("truncated payloads are rejected") {
    std::string bytes = testutil::read_file_bytes(path);
    bytes.resize(bytes.size() - 12);
    std::string bad = tmp.file("short.mlp");
    testutil::write_file_bytes(bad, bytes);
    REQUIRE_THROWS_WITH(load_mlp(bad),
                        ContainsSubstring("truncated payload"));
  }

  SECTION("saving validates bundle consistency") {
    MlpBundle broken = bundle;
    broken.input_mean.pop_back();
    REQUIRE_THROWS_WITH(save_mlp(broken, tmp.file("x.mlp")),
                        ContainsSubstring("normalization moments"));
    MlpBundle no_priors = bundle;
    no_priors.net.priors.pop_back();
    REQUIRE_THROWS_WITH(save_mlp(no_priors, tmp.file("y.mlp")),
                        ContainsSubstring("priors"));
  }
}
