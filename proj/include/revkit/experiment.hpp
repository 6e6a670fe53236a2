// revkit/experiment.hpp

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
// See the Apache 2 License for the specific language governing permissions
// and limitations under the License.

// End-to-end experiment drivers: synthesize a corpus, contaminate it,
// extract features, label frames (GMM alignment or transferred clean
// alignment), train the frame classifier, decode with the phone loop
// and score.  Three drivers cover the context-window sweep, the
// label-supervision comparison and the pretraining comparison.
// Everything is seeded; reports are byte-stable across reruns.

#ifndef REVKIT_EXPERIMENT_HPP_
#define REVKIT_EXPERIMENT_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "revkit/align.hpp"
#include "revkit/common.hpp"
#include "revkit/contaminate.hpp"
#include "revkit/feature_pipeline.hpp"
#include "revkit/gmm.hpp"
#include "revkit/hmm.hpp"
#include "revkit/ir.hpp"
#include "revkit/manifest.hpp"
#include "revkit/mlp.hpp"
#include "revkit/per.hpp"
#include "revkit/phone_loop.hpp"
#include "revkit/rbm.hpp"
#include "revkit/rng.hpp"
#include "revkit/synth_corpus.hpp"
#include "revkit/train.hpp"
#include "revkit/wav.hpp"

namespace revkit {

// One (config x seed) measurement.  The window is printed as P<past>-F<future>.
struct ResultRow {
  std::string condition;
  std::string window;
  std::string supervision;   // standard | ct_lab
  std::string pretraining;   // none | rbm | ct
  std::uint64_t seed = 0;
  double per = 0.0;          // percent
  double frame_acc = 0.0;    // percent, test frames vs oracle labels
  int epochs = 0;            // epochs_to_converge
};

struct ExperimentConfig {
  std::string mode = "window_sweep";  // window_sweep | supervision | pretraining
  Condition condition = Condition::kRev;
  std::vector<ContextWindowSpec> windows = {
      {16, 0}, {10, 6}, {8, 8}, {6, 10}, {0, 16}};
  std::string supervision = "standard";  // label source for the window sweep
  std::string pretraining = "none";      // initialization for the window sweep
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  // Corpus.
  int content_phones = 10;
  int train_utterances = 400;
  int dev_utterances = 50;
  int test_utterances = 100;
  std::uint64_t corpus_seed = 17;

  // Contamination.
  double t60 = 0.7;
  double snr_db = 10.0;
  double snr_jitter_db = 0.0;

  // Network and schedule.
  int hidden_layers = 2;
  int hidden_width = 128;
  double initial_lr = 0.008;
  int max_epochs = 20;
  int minibatch = 256;
  double ct_fine_tune_lr = 0.005;
  int rbm_epochs = 3;

  // Aligner and decoder.
  int gmm_iterations = 6;
  double acoustic_scale = 1.0;
  double insertion_penalty = 0.0;
};

inline std::string window_label(const ContextWindowSpec& w) {
  return msg("P", w.past, "-F", w.future);
}

// Inverse of window_label: "P16-F0" -> {16, 0}.
inline ContextWindowSpec parse_window_label(const std::string& s) {
  auto bad = [&]() -> void {
    fail("bad window '", s, "' (expected P<past>-F<future>, e.g. P8-F8)");
  };
  std::size_t dash = s.find('-');
  if (s.size() < 4 || s[0] != 'P' || dash == std::string::npos ||
      dash + 1 >= s.size() || s[dash + 1] != 'F') {
    bad();
  }
  ContextWindowSpec w;
  try {
    std::size_t used = 0;
    w.past = std::stoi(s.substr(1, dash - 1), &used);
    if (used != dash - 1) bad();
    w.future = std::stoi(s.substr(dash + 2), &used);
    if (used != s.size() - dash - 2) bad();
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    bad();
  }
  check_window(w);
  return w;
}

inline void check_experiment_config(const ExperimentConfig& cfg) {
  require(cfg.mode == "window_sweep" || cfg.mode == "supervision" ||
              cfg.mode == "pretraining",
          "experiment: unknown mode '", cfg.mode, "'");
  require(cfg.supervision == "standard" || cfg.supervision == "ct_lab",
          "experiment: unknown supervision '", cfg.supervision, "'");
  require(cfg.pretraining == "none" || cfg.pretraining == "rbm" ||
              cfg.pretraining == "ct",
          "experiment: unknown pretraining '", cfg.pretraining, "'");
  if (cfg.mode == "window_sweep") {
    require(cfg.pretraining == "none", "experiment: the window sweep runs ",
            "without pretraining (use mode=pretraining to compare rbm/ct)");
  }
  require(!cfg.windows.empty(), "experiment: empty window list");
  require(!cfg.seeds.empty(), "experiment: empty seed list");
  for (const ContextWindowSpec& w : cfg.windows) check_window(w);
  require(cfg.content_phones >= 1, "experiment: need >= 1 content phone");
  require(cfg.train_utterances >= 1 && cfg.dev_utterances >= 1 &&
              cfg.test_utterances >= 1,
          "experiment: all corpus splits need >= 1 utterance");
  require(cfg.t60 > 0.0, "experiment: t60 must be positive");
  require(cfg.hidden_layers >= 1 && cfg.hidden_width >= 1,
          "experiment: bad hidden layout");
  require(cfg.initial_lr > 0.0 && cfg.ct_fine_tune_lr > 0.0,
          "experiment: learning rates must be positive");
  require(cfg.max_epochs >= 1 && cfg.minibatch >= 1,
          "experiment: bad schedule");
  require(cfg.rbm_epochs >= 1, "experiment: need >= 1 RBM epoch");
  require(cfg.gmm_iterations >= 1, "experiment: need >= 1 EM iteration");
  require(cfg.acoustic_scale > 0.0, "experiment: bad acoustic scale");
}

namespace detail {

inline std::string trim_ws(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    std::string item = trim_ws(s.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(item);
    pos = comma + 1;
  }
  return out;
}

inline int config_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    int v = std::stoi(value, &used);
    require(used == value.size(), "trailing junk");
    return v;
  } catch (const std::exception&) {
    fail("experiment config: bad integer for ", key, ": '", value, "'");
  }
}

inline double config_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    require(used == value.size(), "trailing junk");
    return v;
  } catch (const std::exception&) {
    fail("experiment config: bad number for ", key, ": '", value, "'");
  }
}

inline std::uint64_t config_u64(const std::string& key,
                                const std::string& value) {
  try {
    std::size_t used = 0;
    std::uint64_t v = std::stoull(value, &used);
    require(used == value.size(), "trailing junk");
    return v;
  } catch (const std::exception&) {
    fail("experiment config: bad seed for ", key, ": '", value, "'");
  }
}

}  // namespace detail

// Flat key=value text, '#' starts a comment.  Lists are comma separated:
//   windows = P16-F0,P0-F16
//   seeds = 1,2,3,4,5
inline ExperimentConfig parse_experiment_config(std::istream& is) {
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim_ws(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    require(eq != std::string::npos, "experiment config line ", line_no,
            ": expected key = value");
    std::string key = detail::trim_ws(line.substr(0, eq));
    std::string value = detail::trim_ws(line.substr(eq + 1));
    require(!key.empty() && !value.empty(), "experiment config line ", line_no,
            ": empty key or value");

    if (key == "mode") {
      cfg.mode = value;
    } else if (key == "condition") {
      cfg.condition = parse_condition(value);
    } else if (key == "windows") {
      cfg.windows.clear();
      for (const std::string& tok : detail::split_list(value)) {
        cfg.windows.push_back(parse_window_label(tok));
      }
    } else if (key == "supervision") {
      cfg.supervision = value;
    } else if (key == "pretraining") {
      cfg.pretraining = value;
    } else if (key == "seeds") {
      cfg.seeds.clear();
      for (const std::string& tok : detail::split_list(value)) {
        cfg.seeds.push_back(detail::config_u64(key, tok));
      }
    } else if (key == "content_phones") {
      cfg.content_phones = detail::config_int(key, value);
    } else if (key == "train_utterances") {
      cfg.train_utterances = detail::config_int(key, value);
    } else if (key == "dev_utterances") {
      cfg.dev_utterances = detail::config_int(key, value);
    } else if (key == "test_utterances") {
      cfg.test_utterances = detail::config_int(key, value);
    } else if (key == "corpus_seed") {
      cfg.corpus_seed = detail::config_u64(key, value);
    } else if (key == "t60") {
      cfg.t60 = detail::config_double(key, value);
    } else if (key == "snr_db") {
      cfg.snr_db = detail::config_double(key, value);
    } else if (key == "snr_jitter_db") {
      cfg.snr_jitter_db = detail::config_double(key, value);
    } else if (key == "hidden_layers") {
      cfg.hidden_layers = detail::config_int(key, value);
    } else if (key == "hidden_width") {
      cfg.hidden_width = detail::config_int(key, value);
    } else if (key == "initial_lr") {
      cfg.initial_lr = detail::config_double(key, value);
    } else if (key == "max_epochs") {
      cfg.max_epochs = detail::config_int(key, value);
    } else if (key == "minibatch") {
      cfg.minibatch = detail::config_int(key, value);
    } else if (key == "ct_fine_tune_lr") {
      cfg.ct_fine_tune_lr = detail::config_double(key, value);
    } else if (key == "rbm_epochs") {
      cfg.rbm_epochs = detail::config_int(key, value);
    } else if (key == "gmm_iterations") {
      cfg.gmm_iterations = detail::config_int(key, value);
    } else if (key == "acoustic_scale") {
      cfg.acoustic_scale = detail::config_double(key, value);
    } else if (key == "insertion_penalty") {
      cfg.insertion_penalty = detail::config_double(key, value);
    } else {
      fail("experiment config line ", line_no, ": unknown key '", key, "'");
    }
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), "experiment config: cannot open '", path, "'");
  return parse_experiment_config(is);
}

namespace detail {

// One corpus split with features and construction labels in memory.
struct Split {
  std::vector<std::string> ids;
  std::vector<std::vector<int>> transcripts;
  std::vector<FloatMatrix> feats;                   // per-utterance base dims
  std::vector<std::vector<std::uint32_t>> oracle;   // per-frame HMM states
};

inline Split load_split(const std::string& manifest_path,
                        const PhoneSet& phones, const FrameSpec& fs) {
  Manifest m = load_manifest(manifest_path, phones);
  Split s;
  for (const ManifestRecord& rec : m.records) {
    Waveform w = read_wav(rec.audio_path);
    FloatMatrix f = compute_base_features(w, fs);
    require(!rec.oracle_labels_path.empty(), "experiment: utterance '",
            rec.utterance_id, "' has no oracle label file");
    std::vector<std::uint32_t> labels =
        read_u32_archive(rec.oracle_labels_path);
    require(labels.size() == f.rows, "experiment: utterance '",
            rec.utterance_id, "' has ", labels.size(), " labels but ", f.rows,
            " frames");
    s.ids.push_back(rec.utterance_id);
    s.transcripts.push_back(rec.transcript);
    s.feats.push_back(std::move(f));
    s.oracle.push_back(std::move(labels));
  }
  require(!s.ids.empty(), "experiment: empty split '", manifest_path, "'");
  return s;
}

struct PreparedCorpus {
  PhoneSet phones;
  Split train, dev, test;        // run-condition audio
  Split clean_train, clean_dev;  // only filled when clean labels are needed
  bool has_clean = false;
};

inline PreparedCorpus prepare_corpus(const ExperimentConfig& cfg,
                                     const std::string& work) {
  const FrameSpec frame_spec;
  const int sr = kCanonicalSampleRate;
  PreparedCorpus out;
  out.phones = synthetic_phone_set(cfg.content_phones);

  struct Plan {
    const char* name;
    const char* prefix;
    int count;
  };
  const Plan plans[3] = {{"train", "tr", cfg.train_utterances},
                         {"dev", "dv", cfg.dev_utterances},
                         {"test", "ts", cfg.test_utterances}};
  std::string clean_manifest[3];
  for (int i = 0; i < 3; ++i) {
    SyntheticCorpusSpec spec;
    spec.content_phones = cfg.content_phones;
    spec.utterances = plans[i].count;
    spec.seed = derive_seed(cfg.corpus_seed, plans[i].name);
    spec.id_prefix = plans[i].prefix;
    std::string dir = work + "/clean/" + plans[i].name;
    std::cerr << "[experiment] synthesizing " << plans[i].name << " ("
              << plans[i].count << " utterances)\n";
    synth_corpus(spec, dir);
    clean_manifest[i] = dir + "/manifest.tsv";
  }

  const bool distant = cfg.condition != Condition::kClean;
  const bool need_clean =
      cfg.mode != "window_sweep" || cfg.supervision == "ct_lab";
  std::string run_manifest[3];
  if (distant) {
    ContaminationSpec cs;
    cs.ir = synth_ir(cfg.t60,
                     static_cast<std::size_t>(std::lround(1.25 * cfg.t60 * sr)),
                     sr, 0, derive_seed(cfg.corpus_seed, "ir"));
    if (cfg.condition == Condition::kRevNoise) {
      cs.has_noise = true;
      cs.noise = make_pink_noise(static_cast<std::size_t>(30) * sr, sr,
                                 derive_seed(cfg.corpus_seed, "noise"));
      cs.target_snr_db = cfg.snr_db;
      cs.snr_jitter_db = cfg.snr_jitter_db;
      cs.noise_offset_seed = derive_seed(cfg.corpus_seed, "offsets");
    }
    cs.trim = TrimPolicy::kSameLength;
    for (int i = 0; i < 3; ++i) {
      Manifest m = load_manifest(clean_manifest[i], out.phones);
      std::string dir = msg(work, "/", condition_name(cfg.condition), "/",
                            plans[i].name);
      std::cerr << "[experiment] contaminating " << plans[i].name << "\n";
      contaminate_corpus(m, out.phones, cs, dir);
      run_manifest[i] = dir + "/manifest.tsv";
    }
  } else {
    for (int i = 0; i < 3; ++i) run_manifest[i] = clean_manifest[i];
  }

  std::cerr << "[experiment] extracting features\n";
  out.train = load_split(run_manifest[0], out.phones, frame_spec);
  out.dev = load_split(run_manifest[1], out.phones, frame_spec);
  out.test = load_split(run_manifest[2], out.phones, frame_spec);
  if (need_clean) {
    if (distant) {
      out.clean_train = load_split(clean_manifest[0], out.phones, frame_spec);
      out.clean_dev = load_split(clean_manifest[1], out.phones, frame_spec);
    } else {
      out.clean_train = out.train;
      out.clean_dev = out.dev;
    }
    out.has_clean = true;
  }
  return out;
}

inline std::vector<AlignUtterance> align_view(const Split& s) {
  std::vector<AlignUtterance> utts(s.ids.size());
  for (std::size_t i = 0; i < s.ids.size(); ++i) {
    utts[i] = {s.ids[i], &s.feats[i], s.transcripts[i]};
  }
  return utts;
}

inline GmmAcousticModel train_gmm(const Split& train, const PhoneSet& phones,
                                  int iterations) {
  std::vector<AlignUtterance> utts = align_view(train);
  GmmAcousticModel gmm = flat_start(utts, num_hmm_states(phones));
  std::set<int> mixup;
  for (int m : {2, 4}) {
    if (m < iterations) mixup.insert(m);
  }
  em_train(gmm, utts, iterations, mixup);
  return gmm;
}

inline std::vector<std::vector<std::uint32_t>> align_split(
    const GmmAcousticModel& gmm, const Split& s) {
  std::vector<std::vector<std::uint32_t>> out;
  out.reserve(s.ids.size());
  for (std::size_t i = 0; i < s.ids.size(); ++i) {
    out.push_back(
        force_align(gmm, s.feats[i], s.transcripts[i], s.ids[i]).states);
  }
  return out;
}

// Clean-audio alignments re-timed onto the contaminated copies.
inline std::vector<std::vector<std::uint32_t>> transfer_labels(
    const std::vector<std::vector<std::uint32_t>>& clean, const Split& to) {
  require(clean.size() == to.ids.size(),
          "experiment: alignment/split size mismatch");
  std::vector<std::vector<std::uint32_t>> out;
  out.reserve(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    Alignment a{to.ids[i], clean[i]};
    out.push_back(transfer_alignment(a, to.feats[i].rows).states);
  }
  return out;
}

// Labels for one supervision arm: standard aligns the run-condition audio,
// ct_lab aligns the clean audio and transfers the frame labels.
struct ArmLabels {
  std::vector<std::vector<std::uint32_t>> train, dev;
};

inline ArmLabels label_arm(const PreparedCorpus& corpus,
                           const ExperimentConfig& cfg, bool ct_lab) {
  ArmLabels out;
  if (ct_lab) {
    require(corpus.has_clean,
            "experiment: ct_lab supervision needs the clean corpus");
    std::cerr << "[experiment] aligning clean audio (ct_lab arm)\n";
    GmmAcousticModel gmm =
        train_gmm(corpus.clean_train, corpus.phones, cfg.gmm_iterations);
    out.train =
        transfer_labels(align_split(gmm, corpus.clean_train), corpus.train);
    out.dev = transfer_labels(align_split(gmm, corpus.clean_dev), corpus.dev);
  } else {
    std::cerr << "[experiment] aligning "
              << condition_name(cfg.condition) << " audio (standard arm)\n";
    GmmAcousticModel gmm =
        train_gmm(corpus.train, corpus.phones, cfg.gmm_iterations);
    out.train = align_split(gmm, corpus.train);
    out.dev = align_split(gmm, corpus.dev);
  }
  return out;
}

struct RunDatasets {
  FrameDataset train, dev, test;
};

// Test labels stay the construction oracle so frame accuracy is comparable
// across arms; only the training/dev supervision varies.
inline RunDatasets make_datasets(const Split& tr, const Split& dv,
                                 const Split& ts,
                                 const std::vector<std::vector<std::uint32_t>>& tr_labels,
                                 const std::vector<std::vector<std::uint32_t>>& dv_labels,
                                 const ContextWindowSpec& win,
                                 int num_classes) {
  RunDatasets ds{FrameDataset(tr.feats, tr_labels, win, num_classes),
                 FrameDataset(dv.feats, dv_labels, win, num_classes),
                 FrameDataset(ts.feats, ts.oracle, win, num_classes)};
  NormalizationStats stats = ds.train.fit_stats();
  ds.train.set_stats(stats);
  ds.dev.set_stats(stats);
  ds.test.set_stats(stats);
  return ds;
}

inline std::vector<int> make_layout(const ExperimentConfig& cfg, int input,
                                    int output) {
  std::vector<int> layout{input};
  for (int l = 0; l < cfg.hidden_layers; ++l) layout.push_back(cfg.hidden_width);
  layout.push_back(output);
  return layout;
}

inline TrainSchedule make_schedule(const ExperimentConfig& cfg,
                                   std::uint64_t shuffle_seed) {
  TrainSchedule s;
  s.initial_lr = cfg.initial_lr;
  s.max_epochs = cfg.max_epochs;
  s.minibatch = cfg.minibatch;
  s.shuffle_seed = shuffle_seed;
  return s;
}

struct EvalOutcome {
  double frame_acc = 0.0;
  double per = 0.0;
};

inline EvalOutcome evaluate_model(const MlpModel<float>& model,
                                  const FrameDataset& test_ds,
                                  const Split& test, const PhoneSet& phones,
                                  const ExperimentConfig& cfg) {
  EvalOutcome out;
  out.frame_acc = dataset_accuracy(model, test_ds);

  PhoneLoopGraph graph;
  graph.num_phones = phones.size();
  graph.insertion_penalty = cfg.insertion_penalty;
  EditCounts total;
  for (std::size_t u = 0; u < test_ds.num_utterances(); ++u) {
    BatchMatrix post = forward(model, test_ds.utterance_matrix(u));
    FloatMatrix pm;
    pm.rows = static_cast<std::uint32_t>(post.rows());
    pm.cols = static_cast<std::uint32_t>(post.cols());
    pm.data.assign(post.data(), post.data() + post.size());
    FloatMatrix loglik =
        posteriors_to_loglik(pm, model.priors, cfg.acoustic_scale);
    std::vector<int> hyp = phone_loop_decode(loglik, graph);
    total.add(align_edits(test.transcripts[u], hyp));
  }
  out.per = total.per();
  return out;
}

inline ResultRow make_row(const ExperimentConfig& cfg,
                          const ContextWindowSpec& win,
                          const std::string& supervision,
                          const std::string& pretraining, std::uint64_t seed,
                          const EvalOutcome& eval, int epochs) {
  ResultRow row;
  row.condition = condition_name(cfg.condition);
  row.window = window_label(win);
  row.supervision = supervision;
  row.pretraining = pretraining;
  row.seed = seed;
  row.per = eval.per;
  row.frame_acc = eval.frame_acc;
  row.epochs = epochs;
  return row;
}

}  // namespace detail

// Trains one layout across the window list; the same GMM labels (which do
// not depend on the window) feed every run, so only the splice changes.
inline std::vector<ResultRow> run_window_sweep(const ExperimentConfig& cfg,
                                               const detail::PreparedCorpus& corpus) {
  const int C = num_hmm_states(corpus.phones);
  detail::ArmLabels labels =
      detail::label_arm(corpus, cfg, cfg.supervision == "ct_lab");
  std::vector<ResultRow> rows;
  for (const ContextWindowSpec& win : cfg.windows) {
    detail::RunDatasets ds =
        detail::make_datasets(corpus.train, corpus.dev, corpus.test,
                              labels.train, labels.dev, win, C);
    std::vector<int> layout = detail::make_layout(cfg, ds.train.dim(), C);
    for (std::uint64_t seed : cfg.seeds) {
      std::cerr << "[experiment] window " << window_label(win) << " seed "
                << seed << "\n";
      MlpModel<float> model =
          init_random<float>(layout, derive_seed(seed, "init"));
      TrainHistory hist =
          train(model, ds.train, ds.dev,
                detail::make_schedule(cfg, derive_seed(seed, "shuffle")));
      model.priors = estimate_priors(ds.train.all_labels(), C);
      detail::EvalOutcome eval =
          detail::evaluate_model(model, ds.test, corpus.test, corpus.phones, cfg);
      rows.push_back(detail::make_row(cfg, win, cfg.supervision,
                                      cfg.pretraining, seed, eval,
                                      hist.epochs_to_converge));
    }
  }
  return rows;
}

// Standard vs transferred-clean-label supervision on the same audio.  Runs
// are paired: a given seed uses the same initialization and shuffling in
// both arms, so only the label source differs.
inline std::vector<ResultRow> run_supervision_experiment(
    const ExperimentConfig& cfg, const detail::PreparedCorpus& corpus) {
  const int C = num_hmm_states(corpus.phones);
  const ContextWindowSpec win = cfg.windows.front();
  std::vector<ResultRow> rows;
  for (bool ct_lab : {false, true}) {
    detail::ArmLabels labels = detail::label_arm(corpus, cfg, ct_lab);
    detail::RunDatasets ds =
        detail::make_datasets(corpus.train, corpus.dev, corpus.test,
                              labels.train, labels.dev, win, C);
    std::vector<int> layout = detail::make_layout(cfg, ds.train.dim(), C);
    const char* arm = ct_lab ? "ct_lab" : "standard";
    for (std::uint64_t seed : cfg.seeds) {
      std::cerr << "[experiment] supervision " << arm << " seed " << seed
                << "\n";
      MlpModel<float> model =
          init_random<float>(layout, derive_seed(seed, "init"));
      TrainHistory hist =
          train(model, ds.train, ds.dev,
                detail::make_schedule(cfg, derive_seed(seed, "shuffle")));
      model.priors = estimate_priors(ds.train.all_labels(), C);
      detail::EvalOutcome eval =
          detail::evaluate_model(model, ds.test, corpus.test, corpus.phones, cfg);
      rows.push_back(detail::make_row(cfg, win, arm, "none", seed, eval,
                                      hist.epochs_to_converge));
    }
  }
  return rows;
}

// RBM initialization vs close-talk initialization, fine-tuned on identical
// data with identical ct_lab supervision and schedule; only the starting
// weights differ.  Both arms fine-tune at ct_fine_tune_lr.
inline std::vector<ResultRow> run_pretraining_experiment(
    const ExperimentConfig& cfg, const detail::PreparedCorpus& corpus) {
  const int C = num_hmm_states(corpus.phones);
  const ContextWindowSpec win = cfg.windows.front();
  require(corpus.has_clean,
          "experiment: pretraining mode needs the clean corpus");

  std::cerr << "[experiment] aligning clean audio (shared ct_lab labels)\n";
  GmmAcousticModel gmm =
      detail::train_gmm(corpus.clean_train, corpus.phones, cfg.gmm_iterations);
  std::vector<std::vector<std::uint32_t>> clean_train_ali =
      detail::align_split(gmm, corpus.clean_train);
  std::vector<std::vector<std::uint32_t>> clean_dev_ali =
      detail::align_split(gmm, corpus.clean_dev);

  detail::RunDatasets ds = detail::make_datasets(
      corpus.train, corpus.dev, corpus.test,
      detail::transfer_labels(clean_train_ali, corpus.train),
      detail::transfer_labels(clean_dev_ali, corpus.dev), win, C);
  // The close-talk model trains on clean audio with its own normalization.
  detail::RunDatasets clean_ds =
      detail::make_datasets(corpus.clean_train, corpus.clean_dev, corpus.test,
                            clean_train_ali, clean_dev_ali, win, C);
  std::vector<int> layout = detail::make_layout(cfg, ds.train.dim(), C);

  std::vector<ResultRow> rows;
  for (int arm = 0; arm < 2; ++arm) {
    const bool ct = arm == 1;
    for (std::uint64_t seed : cfg.seeds) {
      std::cerr << "[experiment] pretraining " << (ct ? "ct" : "rbm")
                << " seed " << seed << "\n";
      TrainSchedule fine =
          detail::make_schedule(cfg, derive_seed(seed, "shuffle"));
      fine.initial_lr = cfg.ct_fine_tune_lr;
      MlpModel<float> model;
      TrainHistory hist;
      if (ct) {
        MlpModel<float> ct_model =
            init_random<float>(layout, derive_seed(seed, "init"));
        train(ct_model, clean_ds.train, clean_ds.dev,
              detail::make_schedule(cfg, derive_seed(seed, "ct_shuffle")));
        hist = ct_pretrain_transfer(ct_model, model, ds.train, ds.dev, fine,
                                    cfg.ct_fine_tune_lr);
      } else {
        RbmOptions opts;
        opts.epochs_per_layer = cfg.rbm_epochs;
        opts.minibatch = cfg.minibatch;
        model = rbm_pretrain(ds.train, layout, derive_seed(seed, "rbm"), opts);
        hist = train(model, ds.train, ds.dev, fine);
      }
      model.priors = estimate_priors(ds.train.all_labels(), C);
      detail::EvalOutcome eval =
          detail::evaluate_model(model, ds.test, corpus.test, corpus.phones, cfg);
      rows.push_back(detail::make_row(cfg, win, "ct_lab", ct ? "ct" : "rbm",
                                      seed, eval, hist.epochs_to_converge));
    }
  }
  return rows;
}

namespace detail {

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

inline double vec_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double vec_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = vec_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace detail

// report.tsv and report.md under out_dir: one row per (config, seed) in run
// order, then one mean +- std row per config.  PER prints with one decimal.
// No timestamps or absolute paths, so reruns are byte-identical.
inline void emit_report(const std::vector<ResultRow>& rows,
                        const std::string& out_dir) {
  require(!rows.empty(), "emit_report: no results");
  const char* header[8] = {"condition", "window",    "supervision",
                           "pretraining", "seed",    "per",
                           "frame_acc",   "epochs"};
  std::vector<std::array<std::string, 8>> cells;
  for (const ResultRow& r : rows) {
    cells.push_back({r.condition, r.window, r.supervision, r.pretraining,
                     msg(r.seed), detail::format_fixed(r.per, 1),
                     detail::format_fixed(r.frame_acc, 1), msg(r.epochs)});
  }

  // Aggregate per config group, in first-appearance order.
  std::vector<std::array<std::string, 4>> group_keys;
  std::vector<std::vector<const ResultRow*>> groups;
  for (const ResultRow& r : rows) {
    std::array<std::string, 4> key{r.condition, r.window, r.supervision,
                                   r.pretraining};
    std::size_t g = 0;
    while (g < group_keys.size() && group_keys[g] != key) ++g;
    if (g == group_keys.size()) {
      group_keys.push_back(key);
      groups.emplace_back();
    }
    groups[g].push_back(&r);
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<double> per, acc, epochs;
    for (const ResultRow* r : groups[g]) {
      per.push_back(r->per);
      acc.push_back(r->frame_acc);
      epochs.push_back(r->epochs);
    }
    auto agg = [](const std::vector<double>& v, int decimals) {
      return detail::format_fixed(detail::vec_mean(v), decimals) + "+-" +
             detail::format_fixed(detail::vec_std(v), decimals);
    };
    cells.push_back({group_keys[g][0], group_keys[g][1], group_keys[g][2],
                     group_keys[g][3], "all", agg(per, 1), agg(acc, 1),
                     agg(epochs, 1)});
  }

  std::filesystem::create_directories(out_dir);
  {
    std::ofstream tsv(out_dir + "/report.tsv");
    require(tsv.good(), "emit_report: cannot open report.tsv");
    for (int c = 0; c < 8; ++c) tsv << (c ? "\t" : "") << header[c];
    tsv << "\n";
    for (const auto& row : cells) {
      for (int c = 0; c < 8; ++c) tsv << (c ? "\t" : "") << row[c];
      tsv << "\n";
    }
  }
  {
    std::ofstream md(out_dir + "/report.md");
    require(md.good(), "emit_report: cannot open report.md");
    md << "# Phone recognition results\n\n";
    md << "Frame accuracy is measured on test frames against construction"
          " labels;\nPER comes from phone-loop decoding.  The `all` rows are"
          " mean +- std\nover seeds.\n\n";
    md << "|";
    for (int c = 0; c < 8; ++c) md << ' ' << header[c] << " |";
    md << "\n|";
    for (int c = 0; c < 8; ++c) md << "---|";
    md << "\n";
    for (const auto& row : cells) {
      md << "|";
      for (int c = 0; c < 8; ++c) md << ' ' << row[c] << " |";
      md << "\n";
    }
  }
}

// Full driver: prepare the corpus under out_dir/work, run the configured
// experiment and leave report.tsv / report.md in out_dir.
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg,
                                             const std::string& out_dir) {
  check_experiment_config(cfg);
  std::filesystem::create_directories(out_dir);
  detail::PreparedCorpus corpus =
      detail::prepare_corpus(cfg, out_dir + "/work");

  std::vector<ResultRow> rows;
  if (cfg.mode == "window_sweep") {
    rows = run_window_sweep(cfg, corpus);
  } else if (cfg.mode == "supervision") {
    rows = run_supervision_experiment(cfg, corpus);
  } else {
    rows = run_pretraining_experiment(cfg, corpus);
  }
  emit_report(rows, out_dir);
  return rows;
}

}  // namespace revkit

#endif  // REVKIT_EXPERIMENT_HPP_
