// revkit/train.hpp

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

// Minibatch SGD with the accuracy-driven learning-rate schedule: the rate is
// kept while the dev-set frame-accuracy increment exceeds the keep threshold,
// halved each epoch once it first drops to or below it, and training stops
// when the increment falls under the stop threshold.

#ifndef REVKIT_TRAIN_HPP_
#define REVKIT_TRAIN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "revkit/archive.hpp"
#include "revkit/common.hpp"
#include "revkit/feature_pipeline.hpp"
#include "revkit/mlp.hpp"
#include "revkit/rng.hpp"

namespace revkit {

struct TrainSchedule {
  double initial_lr = 0.008;
  double keep_threshold = 0.5;  // accuracy points
  double stop_threshold = 0.1;  // accuracy points
  int max_epochs = 20;
  int minibatch = 256;
  std::uint64_t shuffle_seed = 0;
};

inline void check_schedule(const TrainSchedule& s) {
  require(s.initial_lr > 0.0, "TrainSchedule: initial_lr must be > 0");
  require(s.stop_threshold < s.keep_threshold,
          "TrainSchedule: stop_threshold must be < keep_threshold");
  require(s.max_epochs >= 1 && s.minibatch >= 1,
          "TrainSchedule: max_epochs and minibatch must be >= 1");
}

// The schedule state machine alone, so it can be replayed against injected
// accuracy increments.  observe() consumes one post-epoch increment and
// returns the decision; lr() reflects the rate after that decision.
class LrScheduler {
 public:
  enum class Action { kKeep, kHalve, kStop };

  LrScheduler(double initial_lr, double keep_threshold, double stop_threshold)
      : lr_(initial_lr),
        keep_(keep_threshold),
        stop_(stop_threshold) {}

  explicit LrScheduler(const TrainSchedule& s)
      : LrScheduler(s.initial_lr, s.keep_threshold, s.stop_threshold) {}

  Action observe(double increment_points) {
    if (increment_points < stop_) return Action::kStop;
    if (halving_ || increment_points <= keep_) {
      halving_ = true;  // once halving starts it never reverts
      lr_ *= 0.5;
      return Action::kHalve;
    }
    return Action::kKeep;
  }

  double lr() const { return lr_; }
  bool halving() const { return halving_; }

 private:
  double lr_;
  double keep_;
  double stop_;
  bool halving_ = false;
};

struct EpochRecord {
  double lr = 0.0;        // rate used during the epoch
  double train_ce = 0.0;  // mean cross-entropy over minibatches
  double dev_acc = 0.0;   // dev frame accuracy %, post-epoch
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  double baseline_dev_acc = 0.0;  // before the first epoch
  double best_dev_acc = 0.0;
  int epochs_to_converge = 0;
};

// Frame-level view over a corpus: per-utterance base features spliced lazily
// (edge frames replicate within the utterance) and normalized on the fly.
class FrameDataset {
 public:
  FrameDataset(std::vector<FloatMatrix> base,
               std::vector<std::vector<std::uint32_t>> labels,
               ContextWindowSpec win, int num_classes)
      : base_(std::move(base)),
        labels_(std::move(labels)),
        win_(win),
        num_classes_(num_classes) {
    check_window(win_);
    require(base_.size() == labels_.size(),
            "FrameDataset: ", base_.size(), " feature matrices vs ",
            labels_.size(), " label sequences");
    require(!base_.empty(), "FrameDataset: empty corpus");
    base_dim_ = static_cast<int>(base_[0].cols);
    for (std::size_t u = 0; u < base_.size(); ++u) {
      require(base_[u].cols == static_cast<std::uint32_t>(base_dim_),
              "FrameDataset: inconsistent feature dims");
      require(base_[u].rows == labels_[u].size(), "FrameDataset: utterance ",
              u, " has ", base_[u].rows, " frames but ", labels_[u].size(),
              " labels");
      for (std::uint32_t t = 0; t < base_[u].rows; ++t) {
        require(labels_[u][t] < static_cast<std::uint32_t>(num_classes_),
                "FrameDataset: label out of range");
        index_.emplace_back(static_cast<std::uint32_t>(u), t);
      }
    }
  }

  // Spliced-space statistics accumulated over this dataset.
  NormalizationStats fit_stats() const {
    NormalizationStats stats(dim());
    std::vector<float> row(dim());
    for (const auto& [u, t] : index_) {
      fill_raw_row(u, t, row.data());
      stats.accumulate_row(row.data(), dim());
    }
    return stats;
  }

  void set_stats(const NormalizationStats& stats) {
    require(stats.dims() == dim(), "FrameDataset: stats dim ", stats.dims(),
            " != spliced dim ", dim());
    stats_ = stats;
    has_stats_ = true;
    // Cache the affine map; fill_row runs per frame per epoch.
    norm_mean_.resize(dim());
    norm_istd_.resize(dim());
    for (int d = 0; d < dim(); ++d) {
      norm_mean_[d] = static_cast<float>(stats.mean(d));
      norm_istd_[d] = static_cast<float>(
          1.0 / std::sqrt(std::max(stats.variance(d), kVarianceFloor)));
    }
  }

  int dim() const { return base_dim_ * win_.width(); }
  int num_classes() const { return num_classes_; }
  std::size_t size() const { return index_.size(); }
  const ContextWindowSpec& window() const { return win_; }
  const NormalizationStats& stats() const {
    require(has_stats_, "FrameDataset: stats not set");
    return stats_;
  }

  std::uint32_t label(std::size_t i) const {
    const auto& [u, t] = index_[i];
    return labels_[u][t];
  }

  std::vector<std::uint32_t> all_labels() const {
    std::vector<std::uint32_t> out;
    out.reserve(size());
    for (const auto& [u, t] : index_) out.push_back(labels_[u][t]);
    return out;
  }

  void fill_row(std::size_t i, float* out) const {
    const auto& [u, t] = index_[i];
    fill_raw_row(u, t, out);
    normalize_row(out);
  }

  // Utterance-level access for decoding.
  std::size_t num_utterances() const { return base_.size(); }
  std::uint32_t utterance_frames(std::size_t u) const { return base_[u].rows; }
  const std::vector<std::uint32_t>& utterance_labels(std::size_t u) const {
    return labels_[u];
  }

  // Spliced (and normalized, if stats are set) features of one utterance.
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
  utterance_matrix(std::size_t u) const {
    const FloatMatrix& f = base_[u];
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(
        f.rows, dim());
    for (std::uint32_t t = 0; t < f.rows; ++t) {
      fill_raw_row(static_cast<std::uint32_t>(u), t, m.row(t).data());
      normalize_row(m.row(t).data());
    }
    return m;
  }

 private:
  void normalize_row(float* out) const {
    if (!has_stats_) return;
    for (int d = 0; d < dim(); ++d) out[d] = (out[d] - norm_mean_[d]) * norm_istd_[d];
  }

  void fill_raw_row(std::uint32_t u, std::uint32_t t, float* out) const {
    const FloatMatrix& f = base_[u];
    const int T = static_cast<int>(f.rows);
    for (int k = -win_.past; k <= win_.future; ++k) {
      int src = static_cast<int>(t) + k;
      src = src < 0 ? 0 : (src >= T ? T - 1 : src);
      const float* row = f.row(static_cast<std::uint32_t>(src));
      std::copy(row, row + base_dim_, out);
      out += base_dim_;
    }
  }

  std::vector<FloatMatrix> base_;
  std::vector<std::vector<std::uint32_t>> labels_;
  ContextWindowSpec win_;
  int num_classes_;
  int base_dim_ = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> index_;
  NormalizationStats stats_;
  bool has_stats_ = false;
  std::vector<float> norm_mean_;
  std::vector<float> norm_istd_;
};

namespace detail {

using BatchMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline double dataset_accuracy(const MlpModel<float>& model,
                               const FrameDataset& ds,
                               std::size_t chunk = 4096) {
  std::size_t hits = 0;
  std::vector<std::uint32_t> labels;
  BatchMatrix x;
  for (std::size_t start = 0; start < ds.size(); start += chunk) {
    std::size_t n = std::min(chunk, ds.size() - start);
    x.resize(static_cast<Eigen::Index>(n), ds.dim());
    labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      ds.fill_row(start + i, x.row(static_cast<Eigen::Index>(i)).data());
      labels[i] = ds.label(start + i);
    }
    BatchMatrix post = forward(model, x);
    for (Eigen::Index i = 0; i < post.rows(); ++i) {
      int best = 0;
      float best_v = post(i, 0);
      for (int c = 1; c < post.cols(); ++c) {
        if (post(i, c) > best_v) {
          best_v = post(i, c);
          best = c;
        }
      }
      if (static_cast<std::uint32_t>(best) == labels[i]) ++hits;
    }
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(ds.size());
}

}  // namespace detail

// Epoch loop: shuffle, minibatch SGD, dev eval, schedule update.  Returns the
// model with the best dev accuracy seen (the pre-training model counts as the
// baseline candidate).
inline TrainHistory train(MlpModel<float>& model, const FrameDataset& train_ds,
                          const FrameDataset& dev_ds,
                          const TrainSchedule& schedule) {
  check_schedule(schedule);
  require(model.input_dim() == train_ds.dim(), "train: model input ",
          model.input_dim(), " != feature dim ", train_ds.dim());
  require(dev_ds.dim() == train_ds.dim(), "train: dev/train dim mismatch");
  require(dev_ds.size() > 0, "train: empty dev set");

  TrainHistory history;
  MlpModel<float> best = model;
  history.baseline_dev_acc = detail::dataset_accuracy(model, dev_ds);
  history.best_dev_acc = history.baseline_dev_acc;
  double prev_acc = history.baseline_dev_acc;

  LrScheduler sched(schedule);
  Rng shuffle_rng(schedule.shuffle_seed);
  std::vector<std::size_t> order(train_ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  detail::BatchMatrix x;
  std::vector<std::uint32_t> labels;
  for (int epoch = 1; epoch <= schedule.max_epochs; ++epoch) {
    const double lr = sched.lr();
    // Fisher-Yates with the portable generator.
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.index(i)]);
    }

    double ce_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += schedule.minibatch) {
      std::size_t n =
          std::min<std::size_t>(schedule.minibatch, order.size() - start);
      x.resize(static_cast<Eigen::Index>(n), train_ds.dim());
      labels.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        train_ds.fill_row(order[start + i],
                          x.row(static_cast<Eigen::Index>(i)).data());
        labels[i] = train_ds.label(order[start + i]);
      }
      ce_sum += backprop_step(model, x, labels, lr);
      ++batches;
    }

    EpochRecord rec;
    rec.lr = lr;
    rec.train_ce = ce_sum / static_cast<double>(batches);
    rec.dev_acc = detail::dataset_accuracy(model, dev_ds);
    history.epochs.push_back(rec);
    if (rec.dev_acc > history.best_dev_acc) {
      history.best_dev_acc = rec.dev_acc;
      best = model;
    }

    LrScheduler::Action action = sched.observe(rec.dev_acc - prev_acc);
    prev_acc = rec.dev_acc;
    if (action == LrScheduler::Action::kStop) break;
  }

  history.epochs_to_converge = static_cast<int>(history.epochs.size());
  model = best;
  return history;
}

// Parameter inheritance from a close-talk model followed by fine-tuning at a
// reduced rate on distant data.
inline TrainHistory ct_pretrain_transfer(const MlpModel<float>& ct_model,
                                         MlpModel<float>& model,
                                         const FrameDataset& train_ds,
                                         const FrameDataset& dev_ds,
                                         TrainSchedule schedule,
                                         double fine_tune_lr = 0.005) {
  require(ct_model.input_dim() == train_ds.dim(),
          "ct_pretrain_transfer: layout mismatch (input ",
          ct_model.input_dim(), " vs features ", train_ds.dim(), ")");
  require(ct_model.output_dim() == train_ds.num_classes(),
          "ct_pretrain_transfer: layout mismatch (output ",
          ct_model.output_dim(), " vs classes ", train_ds.num_classes(), ")");
  model = ct_model;
  schedule.initial_lr = fine_tune_lr;
  if (schedule.max_epochs == 0) return TrainHistory{};
  return train(model, train_ds, dev_ds, schedule);
}

}  // namespace revkit

#endif  // REVKIT_TRAIN_HPP_
