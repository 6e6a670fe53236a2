// tools/revkit.cpp

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

// Command line driver.  One subcommand per pipeline stage, so every stage
// can run standalone; `revkit experiment` chains them in-process.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "revkit/align.hpp"
#include "revkit/contaminate.hpp"
#include "revkit/ess.hpp"
#include "revkit/experiment.hpp"
#include "revkit/feature_pipeline.hpp"
#include "revkit/ir.hpp"
#include "revkit/manifest.hpp"
#include "revkit/model_io.hpp"
#include "revkit/per.hpp"
#include "revkit/phone_loop.hpp"
#include "revkit/rbm.hpp"
#include "revkit/reverb_time.hpp"
#include "revkit/synth_corpus.hpp"
#include "revkit/train.hpp"

namespace {

using namespace revkit;

namespace fs = std::filesystem;

// Manifests produced by synth-corpus and contaminate keep phones.txt next
// to them; an explicit --phones overrides that.
PhoneSet phones_for(const std::string& manifest_path,
                    const std::string& phones_path) {
  if (!phones_path.empty()) return PhoneSet::load(phones_path);
  fs::path sibling = fs::path(manifest_path).parent_path() / "phones.txt";
  require(fs::exists(sibling), "no --phones given and '", sibling.string(),
          "' not found");
  return PhoneSet::load(sibling.string());
}

std::vector<FloatMatrix> base_features(const Manifest& m,
                                       const FrameSpec& fspec) {
  std::vector<FloatMatrix> feats;
  feats.reserve(m.records.size());
  for (const ManifestRecord& rec : m.records) {
    feats.push_back(compute_base_features(read_wav(rec.audio_path), fspec));
  }
  return feats;
}

std::vector<AlignUtterance> align_utterances(
    const Manifest& m, const std::vector<FloatMatrix>& feats) {
  std::vector<AlignUtterance> utts(m.records.size());
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    utts[i] = {m.records[i].utterance_id, &feats[i], m.records[i].transcript};
  }
  return utts;
}

// Alignment archive rows matched to manifest order by utterance id.
std::vector<std::vector<std::uint32_t>> labels_from_archive(
    const Manifest& m, const std::string& ali_path) {
  std::map<std::string, std::vector<std::uint32_t>> by_id;
  for (Alignment& a : load_alignments(ali_path)) {
    by_id[a.utterance_id] = std::move(a.states);
  }
  std::vector<std::vector<std::uint32_t>> out;
  out.reserve(m.records.size());
  for (const ManifestRecord& rec : m.records) {
    auto it = by_id.find(rec.utterance_id);
    require(it != by_id.end(), "no alignment for utterance '",
            rec.utterance_id, "' in '", ali_path, "'");
    out.push_back(std::move(it->second));
  }
  return out;
}

std::vector<std::vector<std::uint32_t>> labels_from_manifest(
    const Manifest& m) {
  std::vector<std::vector<std::uint32_t>> out;
  out.reserve(m.records.size());
  for (const ManifestRecord& rec : m.records) {
    require(!rec.oracle_labels_path.empty(), "utterance '", rec.utterance_id,
            "' has no labels_path column");
    out.push_back(read_u32_archive(rec.oracle_labels_path));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    std::string tok = s.substr(pos, comma - pos);
    if (!tok.empty()) {
      try {
        out.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        fail("bad ", what, " list entry '", tok, "'");
      }
    }
    pos = comma + 1;
  }
  require(!out.empty(), "empty ", what, " list");
  return out;
}

MlpBundle make_bundle(MlpModel<float> net, const ContextWindowSpec& win,
                      const NormalizationStats& stats) {
  MlpBundle b;
  b.net = std::move(net);
  b.window = win;
  b.feature_hash = feature_config_hash(FrameSpec(), win);
  b.input_mean.resize(stats.dims());
  b.input_var.resize(stats.dims());
  for (int d = 0; d < stats.dims(); ++d) {
    b.input_mean[d] = stats.mean(d);
    b.input_var[d] = stats.variance(d);
  }
  return b;
}

void check_bundle_hash(const MlpBundle& b, const std::string& path) {
  require(b.feature_hash == feature_config_hash(FrameSpec(), b.window),
          "model '", path, "' was trained with a different frontend config");
}

// Datasets normalized with the moments stored in the model file.
FrameDataset bundle_dataset(const MlpBundle& b, const Manifest& m,
                            const std::vector<FloatMatrix>& feats,
                            std::vector<std::vector<std::uint32_t>> labels) {
  FrameDataset ds(feats, std::move(labels), b.window, b.net.output_dim());
  ds.set_stats(b.stats());
  return ds;
}

// ---- ir_lab ----

struct SweepOpts {
  SweepSpec spec;
  std::string out, inverse;
};

void cmd_ess_generate(CLI::App& app) {
  auto o = std::make_shared<SweepOpts>();
  CLI::App* sub =
      app.add_subcommand("ess-generate", "Write an exponential sine sweep");
  sub->add_option("--f1", o->spec.f_start, "start frequency, Hz");
  sub->add_option("--f2", o->spec.f_end, "end frequency, Hz");
  sub->add_option("--duration", o->spec.duration, "seconds");
  sub->add_option("--amplitude", o->spec.amplitude, "peak amplitude");
  sub->add_option("--rate", o->spec.sample_rate, "sample rate, Hz");
  sub->add_option("--out", o->out, "sweep WAV path")->required();
  sub->add_option("--inverse", o->inverse, "also write the inverse filter");
  sub->callback([o]() {
    write_wav(generate_ess(o->spec), o->out, WavEncoding::kFloat32);
    std::cout << "wrote " << o->out << "\n";
    if (!o->inverse.empty()) {
      write_wav(inverse_filter(o->spec), o->inverse, WavEncoding::kFloat32);
      std::cout << "wrote " << o->inverse << "\n";
    }
  });
}

struct IrEstimateOpts {
  SweepSpec spec;
  std::string recording, out;
  std::size_t ir_length = 8000;
};

void cmd_ir_estimate(CLI::App& app) {
  auto o = std::make_shared<IrEstimateOpts>();
  CLI::App* sub = app.add_subcommand(
      "ir-estimate", "Deconvolve a sweep recording into an impulse response");
  sub->add_option("--recording", o->recording, "recorded sweep WAV")
      ->required();
  sub->add_option("--f1", o->spec.f_start, "sweep start frequency, Hz");
  sub->add_option("--f2", o->spec.f_end, "sweep end frequency, Hz");
  sub->add_option("--duration", o->spec.duration, "sweep seconds");
  sub->add_option("--amplitude", o->spec.amplitude, "sweep amplitude");
  sub->add_option("--rate", o->spec.sample_rate, "sample rate, Hz");
  sub->add_option("--ir-length", o->ir_length, "taps to keep");
  sub->add_option("--out", o->out, "IR WAV path")->required();
  sub->callback([o]() {
    ImpulseResponse ir =
        estimate_ir(read_wav(o->recording), o->spec, o->ir_length);
    save_ir(ir, o->out);
    std::cout << "wrote " << o->out << " (" << ir.taps.size() << " taps)\n";
  });
}

struct IrSynthOpts {
  double t60 = 0.7;
  std::size_t length = 14000;
  int rate = kCanonicalSampleRate;
  std::size_t delay = 0;
  std::uint64_t seed = 1;
  std::string out;
};

void cmd_ir_synth(CLI::App& app) {
  auto o = std::make_shared<IrSynthOpts>();
  CLI::App* sub = app.add_subcommand(
      "ir-synth", "Synthesize a room impulse response with a target T60");
  sub->add_option("--t60", o->t60, "decay time, seconds");
  sub->add_option("--length", o->length, "taps");
  sub->add_option("--rate", o->rate, "sample rate, Hz");
  sub->add_option("--delay", o->delay, "direct path delay, samples");
  sub->add_option("--seed", o->seed, "random seed");
  sub->add_option("--out", o->out, "IR WAV path")->required();
  sub->callback([o]() {
    save_ir(synth_ir(o->t60, o->length, o->rate, o->delay, o->seed), o->out);
    std::cout << "wrote " << o->out << "\n";
  });
}

void cmd_t60(CLI::App& app) {
  auto path = std::make_shared<std::string>();
  CLI::App* sub =
      app.add_subcommand("t60", "Estimate T60 from an impulse response WAV");
  sub->add_option("--ir", *path, "IR WAV path")->required();
  sub->callback([path]() {
    IrAnalysis a = estimate_t60(load_ir(*path));
    std::cout << "t60_seconds\t" << a.t60 << "\n";
    std::cout << "fit_range_db\t" << a.fit_upper_db << "\t" << a.fit_lower_db
              << "\n";
  });
}

// ---- contamination ----

struct ContaminateOpts {
  std::string manifest, phones, ir, noise, out;
  double snr = 10.0;
  double jitter = 0.0;
  std::uint64_t seed = 0;
};

void cmd_contaminate(CLI::App& app) {
  auto o = std::make_shared<ContaminateOpts>();
  CLI::App* sub = app.add_subcommand(
      "contaminate", "Convolve a corpus with an IR and optionally add noise");
  sub->add_option("--manifest", o->manifest, "input manifest")->required();
  sub->add_option("--phones", o->phones, "phone list (default: sibling)");
  sub->add_option("--ir", o->ir, "impulse response WAV")->required();
  sub->add_option("--noise", o->noise, "noise WAV (cyclically extended)");
  sub->add_option("--snr", o->snr, "target SNR, dB");
  sub->add_option("--snr-jitter", o->jitter, "uniform +-jitter, dB");
  sub->add_option("--seed", o->seed, "noise offset / jitter seed");
  sub->add_option("--out", o->out, "output corpus directory")->required();
  sub->callback([o]() {
    PhoneSet phones = phones_for(o->manifest, o->phones);
    Manifest m = load_manifest(o->manifest, phones);
    ContaminationSpec spec;
    spec.ir = load_ir(o->ir);
    if (!o->noise.empty()) {
      spec.has_noise = true;
      spec.noise = read_wav(o->noise);
      spec.target_snr_db = o->snr;
      spec.snr_jitter_db = o->jitter;
      spec.noise_offset_seed = o->seed;
    }
    std::vector<UtteranceMix> mixes;
    Manifest out = contaminate_corpus(m, phones, spec, o->out, &mixes);
    phones.save((fs::path(o->out) / "phones.txt").string());
    if (!mixes.empty()) {
      append_mix_report(mixes, (fs::path(o->out) / "mix_report.tsv").string());
      double mean_snr = 0.0;
      for (const UtteranceMix& mix : mixes) {
        mean_snr += mix.report.achieved_snr_db;
      }
      mean_snr /= static_cast<double>(mixes.size());
      std::cout << "mean_achieved_snr_db\t" << mean_snr << "\n";
    }
    std::cout << "wrote " << out.size() << " utterances to " << o->out << "\n";
  });
}

// ---- frontend ----

struct FeatsOpts {
  std::string manifest, phones, stats, out;
  ContextWindowSpec win;
};

void cmd_feats(CLI::App& app) {
  auto o = std::make_shared<FeatsOpts>();
  CLI::App* sub = app.add_subcommand(
      "feats", "Extract spliced, mean/variance normalized features");
  sub->add_option("--manifest", o->manifest, "input manifest")->required();
  sub->add_option("--phones", o->phones, "phone list (default: sibling)");
  sub->add_option("--past", o->win.past, "context frames before");
  sub->add_option("--future", o->win.future, "context frames after");
  sub->add_option("--stats", o->stats,
                  "stats archive: loaded if present, else written");
  sub->add_option("--out", o->out, "output directory")->required();
  sub->callback([o]() {
    PhoneSet phones = phones_for(o->manifest, o->phones);
    Manifest m = load_manifest(o->manifest, phones);
    FrameSpec fspec;
    std::vector<FloatMatrix> spliced;
    spliced.reserve(m.size());
    for (const ManifestRecord& rec : m.records) {
      spliced.push_back(
          extract_pipeline(read_wav(rec.audio_path), fspec, o->win));
    }

    NormalizationStats stats(0);
    if (!o->stats.empty() && fs::exists(o->stats)) {
      stats = NormalizationStats::load(o->stats);
    } else {
      for (const FloatMatrix& f : spliced) stats.accumulate(f);
      if (!o->stats.empty()) stats.save(o->stats);
    }

    fs::create_directories(o->out);
    for (std::size_t i = 0; i < spliced.size(); ++i) {
      stats.apply(spliced[i]);
      write_float_archive(
          spliced[i],
          (fs::path(o->out) / (m.records[i].utterance_id + ".rvk")).string());
    }
    std::cout << "wrote " << spliced.size() << " feature archives ("
              << (spliced.empty() ? 0 : spliced[0].cols) << " dims) to "
              << o->out << "\n";
  });
}

// ---- align_gmm ----

struct AlignTrainOpts {
  std::string manifest, phones, mixup = "2,4", out;
  int iterations = 6;
};

void cmd_align_train(CLI::App& app) {
  auto o = std::make_shared<AlignTrainOpts>();
  CLI::App* sub = app.add_subcommand(
      "align-train", "Flat-start and EM-train the monophone GMM aligner");
  sub->add_option("--manifest", o->manifest, "training manifest")->required();
  sub->add_option("--phones", o->phones, "phone list (default: sibling)");
  sub->add_option("--iterations", o->iterations, "EM iterations");
  sub->add_option("--mixup", o->mixup,
                  "iterations after which components split");
  sub->add_option("--out", o->out, "output model path")->required();
  sub->callback([o]() {
    PhoneSet phones = phones_for(o->manifest, o->phones);
    Manifest m = load_manifest(o->manifest, phones);
    std::vector<FloatMatrix> feats = base_features(m, FrameSpec());
    std::vector<AlignUtterance> utts = align_utterances(m, feats);
    GmmAcousticModel gmm = flat_start(utts, num_hmm_states(phones));
    std::set<int> mixup;
    for (int it : parse_int_list(o->mixup, "mixup")) mixup.insert(it);
    std::vector<double> logliks = em_train(gmm, utts, o->iterations, mixup);
    for (std::size_t i = 0; i < logliks.size(); ++i) {
      std::cout << "iter " << i + 1 << " loglik " << logliks[i] << "\n";
    }
    save_gmm(gmm, o->out);
    std::cout << "wrote " << o->out << "\n";
  });
}

struct AlignOpts {
  std::string model, manifest, phones, out;
};

void cmd_align(CLI::App& app) {
  auto o = std::make_shared<AlignOpts>();
  CLI::App* sub =
      app.add_subcommand("align", "Force-align a corpus with a GMM model");
  sub->add_option("--model", o->model, "GMM model path")->required();
  sub->add_option("--manifest", o->manifest, "manifest to align")->required();
  sub->add_option("--phones", o->phones, "phone list (default: sibling)");
  sub->add_option("--out", o->out, "output directory")->required();
  sub->callback([o]() {
    PhoneSet phones = phones_for(o->manifest, o->phones);
    Manifest m = load_manifest(o->manifest, phones);
    GmmAcousticModel gmm = load_gmm(o->model);
    std::vector<FloatMatrix> feats = base_features(m, FrameSpec());
    std::vector<Alignment> alis;
    double total_ll = 0.0;
    std::size_t total_frames = 0;
    for (std::size_t i = 0; i < m.records.size(); ++i) {
      double ll = 0.0;
      alis.push_back(force_align(gmm, feats[i], m.records[i].transcript,
                                 m.records[i].utterance_id, &ll));
      total_ll += ll;
      total_frames += feats[i].rows;
    }
    fs::create_directories(o->out);
    std::string path = (fs::path(o->out) / "alignments.rvk").string();
    save_alignments(alis, path);
    std::cout << "loglik_per_frame\t"
              << total_ll / static_cast<double>(total_frames) << "\n";
    std::cout << "wrote " << path << "\n";
  });
}

// ---- acoustic_net ----

struct TrainOpts {
  std::string manifest, ali, dev_manifest, dev_ali, phones, hidden = "128,128";
  std::string out;
  ContextWindowSpec win;
  double lr = 0.008;
  int max_epochs = 20;
  int minibatch = 256;
  std::uint64_t seed = 1;
};

void add_train_data_options(CLI::App* sub, TrainOpts& o) {
  sub->add_option("--manifest", o.manifest, "training manifest")->required();
  sub->add_option("--ali", o.ali, "training alignment archive")->required();
  sub->add_option("--dev-manifest", o.dev_manifest, "dev manifest")
      ->required();
  sub->add_option("--dev-ali", o.dev_ali, "dev alignment archive")->required();
  sub->add_option("--phones", o.phones, "phone list (default: sibling)");
  sub->add_option("--max-epochs", o.max_epochs, "epoch cap");
  sub->add_option("--minibatch", o.minibatch, "minibatch size");
  sub->add_option("--seed", o.seed, "init/shuffle seed");
  sub->add_option("--out", o.out, "output model path")->required();
}

void print_history(const TrainHistory& h) {
  std::cout << "baseline_dev_acc\t" << h.baseline_dev_acc << "\n";
  for (std::size_t e = 0; e < h.epochs.size(); ++e) {
    std::cout << "epoch " << e + 1 << " lr " << h.epochs[e].lr << " ce "
              << h.epochs[e].train_ce << " dev_acc " << h.epochs[e].dev_acc
              << "\n";
  }
  std::cout << "best_dev_acc\t" << h.best_dev_acc << "\n";
  std::cout << "epochs_to_converge\t" << h.epochs_to_converge << "\n";
}

struct LoadedTrainData {
  PhoneSet phones;
  FrameDataset train, dev;
  NormalizationStats stats;
};

LoadedTrainData load_train_data(const TrainOpts& o,
                                const ContextWindowSpec& win) {
  PhoneSet phones = phones_for(o.manifest, o.phones);
  Manifest train_m = load_manifest(o.manifest, phones);
  Manifest dev_m = load_manifest(o.dev_manifest, phones);
  FrameSpec fspec;
  int C = num_hmm_states(phones);
  FrameDataset train_ds(base_features(train_m, fspec),
                        labels_from_archive(train_m, o.ali), win, C);
  FrameDataset dev_ds(base_features(dev_m, fspec),
                      labels_from_archive(dev_m, o.dev_ali), win, C);
  NormalizationStats stats = train_ds.fit_stats();
  train_ds.set_stats(stats);
  dev_ds.set_stats(stats);
  return {std::move(phones), std::move(train_ds), std::move(dev_ds),
          std::move(stats)};
}

void cmd_train(CLI::App& app) {
  auto o = std::make_shared<TrainOpts>();
  CLI::App* sub = app.add_subcommand(
      "train", "Train the frame classifier on aligned labels");
  add_train_data_options(sub, *o);
  sub->add_option("--past", o->win.past, "context frames before");
  sub->add_option("--future", o->win.future, "context frames after");
  sub->add_option("--hidden", o->hidden, "hidden layer widths, e.g. 128,128");
  sub->add_option("--lr", o->lr, "initial learning rate");
  sub->callback([o]() {
    LoadedTrainData data = load_train_data(*o, o->win);
    std::vector<int> layout{data.train.dim()};
    for (int h : parse_int_list(o->hidden, "hidden")) layout.push_back(h);
    layout.push_back(data.train.num_classes());

    MlpModel<float> model =
        init_random<float>(layout, derive_seed(o->seed, "init"));
    TrainSchedule sched;
    sched.initial_lr = o->lr;
    sched.max_epochs = o->max_epochs;
    sched.minibatch = o->minibatch;
    sched.shuffle_seed = derive_seed(o->seed, "shuffle");
    TrainHistory hist = train(model, data.train, data.dev, sched);
    model.priors =
        estimate_priors(data.train.all_labels(), data.train.num_classes());
    print_history(hist);
    save_mlp(make_bundle(std::move(model), o->win, data.stats), o->out);
    std::cout << "wrote " << o->out << "\n";
  });
}

struct PretrainRbmOpts {
  std::string manifest, phones, hidden = "128,128", out;
  ContextWindowSpec win;
  int epochs = 3;
  int minibatch = 256;
  std::uint64_t seed = 1;
};

void cmd_pretrain_rbm(CLI::App& app) {
  auto o = std::make_shared<PretrainRbmOpts>();
  CLI::App* sub = app.add_subcommand(
      "pretrain-rbm", "Greedy layerwise RBM pretraining (CD-1, unlabeled)");
  sub->add_option("--manifest", o->manifest, "training manifest")->required();
  sub->add_option("--phones", o->phones, "phone list (default: sibling)");
  sub->add_option("--past", o->win.past, "context frames before");
  sub->add_option("--future", o->win.future, "context frames after");
  sub->add_option("--hidden", o->hidden, "hidden layer widths");
  sub->add_option("--epochs", o->epochs, "epochs per layer");
  sub->add_option("--minibatch", o->minibatch, "minibatch size");
  sub->add_option("--seed", o->seed, "random seed");
  sub->add_option("--out", o->out, "output model path")->required();
  sub->callback([o]() {
    PhoneSet phones = phones_for(o->manifest, o->phones);
    Manifest m = load_manifest(o->manifest, phones);
    std::vector<FloatMatrix> feats = base_features(m, FrameSpec());
    // Labels are not consulted by CD-1; zero-fill to satisfy the dataset.
    std::vector<std::vector<std::uint32_t>> labels;
    for (const FloatMatrix& f : feats) {
      labels.emplace_back(f.rows, 0);
    }
    int C = num_hmm_states(phones);
    FrameDataset ds(std::move(feats), std::move(labels), o->win, C);
    NormalizationStats stats = ds.fit_stats();
    ds.set_stats(stats);

    std::vector<int> layout{ds.dim()};
    for (int h : parse_int_list(o->hidden, "hidden")) layout.push_back(h);
    layout.push_back(C);
    RbmOptions opts;
    opts.epochs_per_layer = o->epochs;
    opts.minibatch = o->minibatch;
    std::vector<std::vector<double>> recon;
    MlpModel<float> model = rbm_pretrain(ds, layout, o->seed, opts, &recon);
    for (std::size_t l = 0; l < recon.size(); ++l) {
      std::cout << "layer " << l + 1 << " recon_mse";
      for (double e : recon[l]) std::cout << ' ' << e;
      std::cout << "\n";
    }
    save_mlp(make_bundle(std::move(model), o->win, stats), o->out);
    std::cout << "wrote " << o->out << "\n";
  });
}

void cmd_pretrain_ct(CLI::App& app) {
  auto o = std::make_shared<TrainOpts>();
  auto ct_path = std::make_shared<std::string>();
  CLI::App* sub = app.add_subcommand(
      "pretrain-ct",
      "Fine-tune a close-talk model on contaminated data (transfer)");
  sub->add_option("--ct-model", *ct_path, "close-talk model path")->required();
  add_train_data_options(sub, *o);
  o->lr = 0.005;
  sub->add_option("--lr", o->lr, "fine-tune learning rate");
  sub->callback([o, ct_path]() {
    MlpBundle ct = load_mlp(*ct_path);
    check_bundle_hash(ct, *ct_path);
    LoadedTrainData data = load_train_data(*o, ct.window);
    TrainSchedule sched;
    sched.max_epochs = o->max_epochs;
    sched.minibatch = o->minibatch;
    sched.shuffle_seed = derive_seed(o->seed, "shuffle");
    MlpModel<float> model;
    TrainHistory hist =
        ct_pretrain_transfer(ct.net, model, data.train, data.dev, sched, o->lr);
    model.priors =
        estimate_priors(data.train.all_labels(), data.train.num_classes());
    print_history(hist);
    save_mlp(make_bundle(std::move(model), ct.window, data.stats), o->out);
    std::cout << "wrote " << o->out << "\n";
  });
}

struct FrameAccOpts {
  std::string model, manifest, phones, ali;
  bool oracle = false;
};

void cmd_frame_acc(CLI::App& app) {
  auto o = std::make_shared<FrameAccOpts>();
  CLI::App* sub = app.add_subcommand(
      "frame-acc", "Frame classification accuracy against reference labels");
  sub->add_option("--model", o->model, "model path")->required();
  sub->add_option("--manifest", o->manifest, "manifest")->required();
  sub->add_option("--phones", o->phones, "phone list (default: sibling)");
  sub->add_option("--ali", o->ali, "alignment archive with reference labels");
  sub->add_flag("--oracle", o->oracle,
                "use the manifest labels_path column instead of --ali");
  sub->callback([o]() {
    require(o->oracle || !o->ali.empty(), "need --ali or --oracle");
    require(!(o->oracle && !o->ali.empty()), "--ali and --oracle conflict");
    MlpBundle b = load_mlp(o->model);
    check_bundle_hash(b, o->model);
    PhoneSet phones = phones_for(o->manifest, o->phones);
    Manifest m = load_manifest(o->manifest, phones);
    std::vector<FloatMatrix> feats = base_features(m, FrameSpec());
    auto labels =
        o->oracle ? labels_from_manifest(m) : labels_from_archive(m, o->ali);
    FrameDataset ds = bundle_dataset(b, m, feats, std::move(labels));
    std::cout << "frame_acc\t" << detail::dataset_accuracy(b.net, ds) << "\n";
  });
}

// ---- decode_eval ----

struct DecodeOpts {
  std::string model, manifest, phones, out;
  double scale = 1.0;
  double ins_penalty = 0.0;
};

void cmd_decode(CLI::App& app) {
  auto o = std::make_shared<DecodeOpts>();
  CLI::App* sub = app.add_subcommand(
      "decode", "Phone-loop Viterbi decoding to a hypothesis TSV");
  sub->add_option("--model", o->model, "model path")->required();
  sub->add_option("--manifest", o->manifest, "manifest to decode")->required();
  sub->add_option("--phones", o->phones, "phone list (default: sibling)");
  sub->add_option("--scale", o->scale, "acoustic scale");
  sub->add_option("--ins-penalty", o->ins_penalty, "phone insertion penalty");
  sub->add_option("--out", o->out, "hypothesis TSV path")->required();
  sub->callback([o]() {
    MlpBundle b = load_mlp(o->model);
    check_bundle_hash(b, o->model);
    PhoneSet phones = phones_for(o->manifest, o->phones);
    Manifest m = load_manifest(o->manifest, phones);
    require(num_hmm_states(phones) == b.net.output_dim(), "model has ",
            b.net.output_dim(), " outputs but the phone set implies ",
            num_hmm_states(phones));
    PhoneLoopGraph graph;
    graph.num_phones = phones.size();
    graph.insertion_penalty = o->ins_penalty;
    NormalizationStats stats = b.stats();
    std::ofstream os(o->out);
    require(os.good(), "cannot open '", o->out, "'");
    FrameSpec fspec;
    for (const ManifestRecord& rec : m.records) {
      FloatMatrix x =
          extract_pipeline(read_wav(rec.audio_path), fspec, b.window, &stats);
      detail::BatchMatrix xe(x.rows, x.cols);
      std::copy(x.data.begin(), x.data.end(), xe.data());
      detail::BatchMatrix post = forward(b.net, xe);
      FloatMatrix pm;
      pm.rows = x.rows;
      pm.cols = static_cast<std::uint32_t>(post.cols());
      pm.data.assign(post.data(), post.data() + post.size());
      std::vector<int> hyp = phone_loop_decode(
          posteriors_to_loglik(pm, b.net.priors, o->scale), graph);
      os << rec.utterance_id;
      for (std::size_t i = 0; i < hyp.size(); ++i) {
        os << (i ? " " : "\t") << phones.symbol(hyp[i]);
      }
      os << "\n";
    }
    std::cout << "wrote " << o->out << "\n";
  });
}

struct ScoreOpts {
  std::string ref, phones, hyp, out;
};

void cmd_score(CLI::App& app) {
  auto o = std::make_shared<ScoreOpts>();
  CLI::App* sub = app.add_subcommand(
      "score", "Phone error rate of a hypothesis TSV against a manifest");
  sub->add_option("--ref", o->ref, "reference manifest")->required();
  sub->add_option("--phones", o->phones, "phone list (default: sibling)");
  sub->add_option("--hyp", o->hyp, "hypothesis TSV")->required();
  sub->add_option("--out", o->out, "report TSV (default: stdout)");
  sub->callback([o]() {
    PhoneSet phones = phones_for(o->ref, o->phones);
    Manifest m = load_manifest(o->ref, phones);
    std::ifstream is(o->hyp);
    require(is.good(), "cannot open '", o->hyp, "'");
    std::map<std::string, std::vector<int>> hyps;
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::size_t tab = line.find('\t');
      std::string id = tab == std::string::npos ? line : line.substr(0, tab);
      std::vector<int> seq;
      if (tab != std::string::npos) {
        std::istringstream ss(line.substr(tab + 1));
        std::string sym;
        while (ss >> sym) seq.push_back(phones.id(sym));
      }
      require(hyps.emplace(id, std::move(seq)).second,
              "duplicate hypothesis for '", id, "'");
    }

    ScoreReport report;
    for (const ManifestRecord& rec : m.records) {
      auto it = hyps.find(rec.utterance_id);
      require(it != hyps.end(), "no hypothesis for '", rec.utterance_id, "'");
      report.add(rec.utterance_id, align_edits(rec.transcript, it->second));
    }

    std::ofstream file;
    if (!o->out.empty()) {
      file.open(o->out);
      require(file.good(), "cannot open '", o->out, "'");
    }
    std::ostream& os = o->out.empty() ? std::cout : file;
    os << "utterance\tsub\tdel\tins\tref_len\tper\n";
    for (const UtteranceScore& u : report.utterances) {
      os << u.utterance_id << '\t' << u.counts.substitutions << '\t'
         << u.counts.deletions << '\t' << u.counts.insertions << '\t'
         << u.counts.ref_len << '\t' << u.counts.per() << "\n";
    }
    const EditCounts& t = report.total;
    os << "TOTAL\t" << t.substitutions << '\t' << t.deletions << '\t'
       << t.insertions << '\t' << t.ref_len << '\t' << t.per() << "\n";
    if (!o->out.empty()) std::cout << "per\t" << t.per() << "\n";
  });
}

// ---- bench_harness ----

struct SynthCorpusOpts {
  SyntheticCorpusSpec spec;
  std::string out;
};

void cmd_synth_corpus(CLI::App& app) {
  auto o = std::make_shared<SynthCorpusOpts>();
  CLI::App* sub = app.add_subcommand(
      "synth-corpus", "Generate a labeled synthetic phone corpus");
  sub->add_option("--content-phones", o->spec.content_phones,
                  "phones besides silence");
  sub->add_option("--utterances", o->spec.utterances, "utterance count");
  sub->add_option("--min-phones", o->spec.min_phones, "per utterance");
  sub->add_option("--max-phones", o->spec.max_phones, "per utterance");
  sub->add_option("--seed", o->spec.seed, "corpus seed");
  sub->add_option("--prefix", o->spec.id_prefix, "utterance id prefix");
  sub->add_option("--out", o->out, "output directory")->required();
  sub->callback([o]() {
    Manifest m = synth_corpus(o->spec, o->out);
    std::cout << "wrote " << m.size() << " utterances to " << o->out << "\n";
  });
}

struct ExperimentOpts {
  std::string config, out;
};

void cmd_experiment(CLI::App& app) {
  auto o = std::make_shared<ExperimentOpts>();
  CLI::App* sub = app.add_subcommand(
      "experiment", "Run a full corpus/train/decode experiment from a config");
  sub->add_option("--config", o->config, "key=value config file")->required();
  sub->add_option("--out", o->out, "output directory")->required();
  sub->callback([o]() {
    ExperimentConfig cfg = load_experiment_config(o->config);
    std::vector<ResultRow> rows = run_experiment(cfg, o->out);
    std::cout << "wrote " << rows.size() << " result rows to " << o->out
              << "/report.tsv\n";
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reverberated/noisy speech training toolkit"};
  app.require_subcommand(1);
  cmd_ess_generate(app);
  cmd_ir_estimate(app);
  cmd_ir_synth(app);
  cmd_t60(app);
  cmd_contaminate(app);
  cmd_feats(app);
  cmd_align_train(app);
  cmd_align(app);
  cmd_train(app);
  cmd_pretrain_rbm(app);
  cmd_pretrain_ct(app);
  cmd_frame_acc(app);
  cmd_decode(app);
  cmd_score(app);
  cmd_synth_corpus(app);
  cmd_experiment(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "revkit: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
