// Copyright 2026 The specmtm authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "specmtm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "specmtm/diagnostics.hpp"

namespace specmtm::trainer {

namespace fs = std::filesystem;
using engine::Graph;
using engine::Var;

std::size_t worker_count() {
  std::size_t n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("SPECMTM_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
  }
  return n;
}

namespace {

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

TimeSeriesBatch subset(const TimeSeriesBatch& batch,
                       const std::vector<std::size_t>& indices,
                       std::size_t keep_length) {
  const std::size_t l = batch.length(), c = batch.channels();
  TimeSeriesBatch out;
  out.values = Tensor({indices.size(), keep_length, c});
  out.has_labels = batch.has_labels;
  auto& v = out.values.mut();
  const auto& src = batch.values.data();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t base = indices[i] * l * c;
    for (std::size_t k = 0; k < keep_length * c; ++k) {
      v[i * keep_length * c + k] = src[base + k];
    }
    if (batch.has_labels) out.labels.push_back(batch.labels[indices[i]]);
  }
  return out;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

void merge_grads(std::vector<Tensor>& acc, std::vector<Tensor>& part) {
  if (acc.size() < part.size()) acc.resize(part.size());
  for (std::size_t p = 0; p < part.size(); ++p) {
    if (part[p].size() == 0) continue;
    if (acc[p].size() == 0) {
      acc[p] = std::move(part[p]);
    } else {
      acc[p] = specmtm::add(acc[p], part[p]);
    }
  }
}

std::size_t argmax_row(const Tensor& logits) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < logits.cols(); ++j) {
    if (logits(0, j) > logits(0, best)) best = j;
  }
  return best;
}

void set_precision_from(const cli::RunConfig& cfg) {
  engine::set_compute_precision(cfg.training.precision == "f32"
                                    ? engine::Precision::f32
                                    : engine::Precision::f64);
}

void write_run_prelude(const cli::RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir + "/config_resolved.json");
    out << cfg.to_json_text() << "\n";
  }
  nlohmann::json overrides = cfg.overrides_from_defaults();
  std::ofstream out(out_dir + "/overrides.json");
  out << overrides.dump(2) << "\n";
}

}  // namespace

PreparedData prepare_data(const cli::RunConfig& cfg) {
  cfg.validate();
  PreparedData prep;
  TimeSeriesBatch train_raw, test_raw;
  if (cfg.dataset.format == "synthetic") {
    Rng rng(cfg.seed);
    TimeSeriesBatch full =
        data::synth_generate(cfg.dataset.synthetic, rng.split("synth").seed());
    std::vector<std::size_t> idx = all_indices(full.count());
    Rng shuffle_rng = rng.split("split");
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::swap(idx[i - 1], idx[shuffle_rng.next_below(i)]);
    }
    const std::size_t train_n = static_cast<std::size_t>(
        std::lround(cfg.dataset.train_fraction * static_cast<double>(idx.size())));
    std::vector<std::size_t> train_idx(idx.begin(), idx.begin() + train_n);
    std::vector<std::size_t> test_idx(idx.begin() + train_n, idx.end());
    train_raw = subset(full, train_idx, full.length());
    test_raw = subset(full, test_idx, full.length());
    prep.meta.name = "synthetic";
    prep.meta.classes = cfg.dataset.synthetic.classes;
    prep.meta.type_tag = "SYNTH";
  } else if (cfg.dataset.format == "ts") {
    data::Dataset train = data::parse_ts(cfg.dataset.train_path);
    data::Dataset test = data::parse_ts(cfg.dataset.test_path);
    train_raw = std::move(train.batch);
    test_raw = std::move(test.batch);
    prep.meta = train.meta;
  } else {
    data::Dataset train = data::parse_tsv(cfg.dataset.train_path);
    data::Dataset test = data::parse_tsv(cfg.dataset.test_path);
    train_raw = std::move(train.batch);
    test_raw = std::move(test.batch);
    prep.meta = train.meta;
  }

  if (cfg.dataset.normalize) {
    data::NormStats stats = data::compute_norm_stats(train_raw);
    train_raw = data::normalize(train_raw, stats);
    test_raw = data::normalize(test_raw, stats);
  }

  prep.tokens = backbone::token_count_for(train_raw.length(), cfg.model.window);
  prep.truncated_length = prep.tokens * cfg.model.window;
  prep.dropped_steps = train_raw.length() - prep.truncated_length;
  prep.train = subset(train_raw, all_indices(train_raw.count()),
                      prep.truncated_length);
  prep.test =
      subset(test_raw, all_indices(test_raw.count()), prep.truncated_length);
  prep.meta.examples = prep.train.count() + prep.test.count();
  prep.meta.length = prep.truncated_length;
  prep.meta.channels = prep.train.channels();
  if (prep.meta.classes == 0 && prep.train.has_labels) {
    int max_label = -1;
    for (int l : prep.train.labels) max_label = std::max(max_label, l);
    prep.meta.classes = static_cast<std::size_t>(max_label + 1);
  }

  const std::size_t masked = static_cast<std::size_t>(
      std::lround(cfg.masking.ratio * static_cast<double>(prep.tokens)));
  if (masked >= prep.tokens && cfg.masking.ratio > 0.0) {
    throw std::invalid_argument(
        "masking.ratio " + std::to_string(cfg.masking.ratio) + " leaves no "
        "visible tokens for " + std::to_string(prep.tokens) +
        " tokens; lower the ratio or the window");
  }
  return prep;
}

Model::Model(const cli::RunConfig& cfg, std::size_t tokens,
             std::size_t channels, std::size_t num_classes, Rng init_rng)
    : activation_(cfg.model.cim_activation == "tanh"
                      ? cim::Activation::kSplitTanh
                      : cim::Activation::kSplitRelu),
      tokens_(tokens),
      window_(cfg.model.window),
      channels_(channels),
      ser_order_(cfg.ser.order),
      ser_per_channel_(cfg.ser.per_channel),
      cbd_enabled_(cfg.model.cbd_enabled) {
  const std::size_t d = cfg.model.hidden;
  const std::size_t ffn_hidden =
      cfg.model.ffn_hidden ? cfg.model.ffn_hidden : 4 * d;

  Rng enc_rng = init_rng.split("encoder");
  encoder_ = backbone::EncoderRefs::create(
      store_, "encoder",
      backbone::EncoderParams::init(d, channels, window_, tokens,
                                    cfg.model.encoder_layers, cfg.model.heads,
                                    ffn_hidden, enc_rng));
  Rng td_rng = init_rng.split("temporal_decoder");
  temporal_decoder_ = backbone::TemporalDecoderRefs::create(
      store_, "temporal_decoder",
      backbone::TemporalDecoderParams::init(d, channels, window_, tokens,
                                            cfg.model.decoder_layers,
                                            cfg.model.heads, ffn_hidden,
                                            td_rng));
  mask_token_ = store_.create("mask_token", Tensor({1, d}));
  if (cbd_enabled_) {
    cbd_posenc_ = store_.create("cbd.posenc", Tensor({tokens, d}));
    for (std::size_t u = 0; u < cfg.model.decoder_layers; ++u) {
      Rng block_rng = init_rng.split("cbd_block", u);
      cbd_blocks_.push_back(cbd::CbdBlockRefs::create(
          store_, "cbd.block" + std::to_string(u),
          cbd::CbdBlockParams::init(d, tokens, ser_order_, ser_per_channel_,
                                    ffn_hidden, block_rng)));
    }
    Rng head_rng = init_rng.split("cbd_head");
    const std::size_t out_width = window_ * channels;
    const double bound = 1.0 / std::sqrt(static_cast<double>(d));
    Tensor head_w({out_width, d});
    for (double& x : head_w.mut()) x = head_rng.uniform(-bound, bound);
    cbd_head_w_ = store_.create("cbd.head.w", head_w);
    cbd_head_b_ = store_.create("cbd.head.b", Tensor({1, out_width}));
  }
  Rng cls_rng = init_rng.split("classifier");
  classifier_ = backbone::ClassifierRefs::create(
      store_, "classifier",
      backbone::ClassifierParams::init(d, std::max<std::size_t>(num_classes, 1),
                                       cls_rng));
}

cbd::CbdStackVars Model::bind_cbd(Graph& g) const {
  cbd::CbdStackVars sv;
  sv.activation = activation_;
  for (const auto& refs : cbd_blocks_) sv.blocks.push_back(cbd::bind(g, refs));
  return sv;
}

Var Model::build_pretrain_loss(Graph& g, const Tensor& sample,
                               const backbone::MaskPlan& plan,
                               const objectives::LossWeights& weights) const {
  Var series = engine::constant(sample);
  backbone::EncoderVars ev = backbone::bind(g, encoder_);
  Var tokens_v = backbone::embed(series, ev.embed);
  const auto visible_idx = plan.visible_indices();
  if (visible_idx.empty()) {
    throw std::invalid_argument("pretrain: mask leaves no visible tokens");
  }
  Var visible = engine::gather_rows(tokens_v, visible_idx);
  Var feats = backbone::encode(visible, ev, nullptr);
  Var mask_tok = g.use(mask_token_);
  Var pred_t = backbone::temporal_decode(
      feats, plan, backbone::bind(g, temporal_decoder_), mask_tok, channels_);

  const bool has_branch = cbd_enabled_ && weights.gamma != 0.0;
  spectral::SpectrumVar zf_branch;
  if (has_branch) {
    spectral::SpectrumVar zf_feat = cbd::cbd_decode(
        feats, plan, bind_cbd(g), mask_tok, g.use(cbd_posenc_));
    Var feat_time = spectral::idft_real_graph(zf_feat);
    Var windows =
        engine::linear(feat_time, g.use(cbd_head_w_), g.use(cbd_head_b_));
    Var series_f =
        engine::reshape(windows, {tokens_ * window_, channels_});
    Var comp = objectives::composite_series(series_f, sample, plan, window_);
    zf_branch = spectral::dft_graph(comp);
  }
  return objectives::pretrain_loss(pred_t, zf_branch, sample, plan, window_,
                                   weights, has_branch);
}

Var Model::build_logits(Graph& g, const Tensor& sample) const {
  Var series = engine::constant(sample);
  backbone::EncoderVars ev = backbone::bind(g, encoder_);
  Var tokens_v = backbone::embed(series, ev.embed);
  Var feats = backbone::encode(tokens_v, ev, nullptr);
  return backbone::classify(feats, backbone::bind(g, classifier_));
}

Tensor Model::encoder_features(const Tensor& sample,
                               backbone::AttnCapture* capture) const {
  Graph g(store_);
  backbone::EncoderVars ev = backbone::bind(g, encoder_);
  Var tokens_v = backbone::embed(engine::constant(sample), ev.embed);
  Var feats = backbone::encode(tokens_v, ev, capture);
  return engine::mean_rows(feats).value();
}

Model::Reconstructions Model::reconstruct(const Tensor& sample,
                                          const backbone::MaskPlan& plan) const {
  Graph g(store_);
  backbone::EncoderVars ev = backbone::bind(g, encoder_);
  Var tokens_v = backbone::embed(engine::constant(sample), ev.embed);
  Var visible = engine::gather_rows(tokens_v, plan.visible_indices());
  Var feats = backbone::encode(visible, ev, nullptr);
  Var mask_tok = g.use(mask_token_);
  Reconstructions rec;
  rec.temporal = backbone::temporal_decode(
                     feats, plan, backbone::bind(g, temporal_decoder_),
                     mask_tok, channels_)
                     .value();
  if (cbd_enabled_) {
    Var scattered = engine::scatter_rows(feats, mask_tok,
                                         plan.visible_indices(), tokens_);
    scattered = engine::add(scattered, g.use(cbd_posenc_));
    spectral::Spectrum block0_in =
        spectral::dft_forward(scattered.value());
    Tensor a_norm = ser::normalize_energy(spectral::amplitude(block0_in));
    rec.block0_profile.resize(tokens_);
    for (std::size_t s = 0; s < tokens_; ++s) {
      rec.block0_profile[s] = a_norm(s, 0);
    }

    spectral::SpectrumVar zf_feat = cbd::cbd_decode(
        feats, plan, bind_cbd(g), mask_tok, g.use(cbd_posenc_));
    Tensor residue =
        spectral::dft_inverse_residual(zf_feat.detach());
    rec.imag_residue_norm = std::sqrt(dot_all(residue, residue));
    Var feat_time = spectral::idft_real_graph(zf_feat);
    Var windows =
        engine::linear(feat_time, g.use(cbd_head_w_), g.use(cbd_head_b_));
    rec.frequency_series =
        engine::reshape(windows, {tokens_ * window_, channels_}).value();
  }
  return rec;
}

ser::GatingParams Model::gating_params(std::size_t block) const {
  if (!cbd_enabled_ || block >= cbd_blocks_.size()) {
    throw std::out_of_range("gating_params: no such block");
  }
  ser::GatingParams g;
  g.w_c = store_.entry(cbd_blocks_[block].ser_refs.w_c).value;
  g.b_c = store_.entry(cbd_blocks_[block].ser_refs.b_c).value;
  g.order = ser_order_;
  g.per_channel = ser_per_channel_;
  return g;
}

void Model::freeze_all_but_classifier() {
  store_.set_all_trainable(false);
  store_.set_trainable_by_prefix("classifier", true);
}

namespace {

double run_pretrain_epoch(Model& model, const TimeSeriesBatch& train,
                          const cli::RunConfig& cfg, engine::AdamW& opt,
                          std::size_t epoch, Rng& root) {
  const std::size_t n = train.count();
  std::vector<std::size_t> order = all_indices(n);
  Rng shuffle_rng = root.split("shuffle", epoch);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);
  }
  const objectives::LossWeights weights{cfg.loss.gamma, cfg.loss.freq_dual};
  Rng mask_rng = root.split("mask", epoch);

  double loss_sum = 0.0;
  std::size_t seen = 0;
  for (std::size_t start = 0; start < n; start += cfg.training.batch_size) {
    const std::size_t batch_n = std::min(cfg.training.batch_size, n - start);
    std::vector<double> losses(batch_n, 0.0);
    std::vector<std::vector<Tensor>> grads(batch_n);
    parallel_for(batch_n, [&](std::size_t i) {
      const std::size_t sample_idx = order[start + i];
      const Tensor sample = train.sample(sample_idx);
      const backbone::MaskPlan plan =
          backbone::make_mask(model.tokens(), cfg.masking.ratio,
                              mask_rng.split("sample", sample_idx).seed());
      Graph g(model.store());
      Var loss = model.build_pretrain_loss(g, sample, plan, weights);
      engine::backward(loss);
      losses[i] = loss.value().item();
      g.harvest(grads[i], 1.0 / static_cast<double>(batch_n));
    });
    std::vector<Tensor> acc;
    for (std::size_t i = 0; i < batch_n; ++i) merge_grads(acc, grads[i]);
    auto status = opt.step(model.store(), acc);
    if (!status.applied) {
      std::cerr << "epoch " << epoch << ": " << status.message << "\n";
    }
    for (double l : losses) loss_sum += l;
    seen += batch_n;
  }
  return loss_sum / static_cast<double>(seen);
}

}  // namespace

PretrainResult run_pretrain(const cli::RunConfig& cfg) {
  set_precision_from(cfg);
  PreparedData prep = prepare_data(cfg);
  if (prep.dropped_steps > 0) {
    std::cout << "right-truncated series from "
              << prep.truncated_length + prep.dropped_steps << " to "
              << prep.truncated_length << " steps (window "
              << cfg.model.window << ")\n";
  }
  Rng root(cfg.seed);
  Model model(cfg, prep.tokens, prep.train.channels(), prep.meta.classes,
              root.split("init"));
  engine::AdamW opt({cfg.optimizer.lr, cfg.optimizer.beta1, cfg.optimizer.beta2,
                     cfg.optimizer.eps, cfg.optimizer.weight_decay});

  write_run_prelude(cfg, cfg.out_dir);
  PretrainResult result;
  result.loss_csv_path = cfg.out_dir + "/loss.csv";
  std::ofstream loss_csv(result.loss_csv_path);
  loss_csv.precision(17);
  loss_csv << "epoch,loss\n";
  for (std::size_t epoch = 1; epoch <= cfg.training.epochs; ++epoch) {
    const double loss = run_pretrain_epoch(model, prep.train, cfg, opt, epoch,
                                           root);
    result.epoch_losses.push_back(loss);
    loss_csv << epoch << "," << loss << "\n";
    loss_csv.flush();
  }
  loss_csv.close();

  result.checkpoint_path = cfg.out_dir + "/model.ckpt";
  engine::save_checkpoint(model.store(), result.checkpoint_path,
                          cfg.training.precision == "f32"
                              ? engine::Precision::f32
                              : engine::Precision::f64);
  write_manifest(cfg.out_dir,
                 {"config_resolved.json", "overrides.json", "loss.csv",
                  "model.ckpt"});
  return result;
}

namespace {

Tensor cached_features(const Model& model, const TimeSeriesBatch& batch) {
  const std::size_t n = batch.count();
  const std::size_t d = model.store().entry(model.store().find("mask_token"))
                            .value.cols();
  Tensor features({n, d});
  auto& f = features.mut();
  std::vector<Tensor> rows(n);
  parallel_for(n, [&](std::size_t i) {
    rows[i] = model.encoder_features(batch.sample(i));
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) f[i * d + j] = rows[i](0, j);
  }
  return features;
}

double head_accuracy(const Model& model, const Tensor& features,
                     const std::vector<int>& labels) {
  const auto& store = model.store();
  const Tensor& w = store.entry(store.find("classifier.w")).value;
  const Tensor& b = store.entry(store.find("classifier.b")).value;
  Tensor logits = matmul(features, w, false, true);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    std::size_t best = 0;
    double best_v = -1e300;
    for (std::size_t j = 0; j < w.rows(); ++j) {
      const double v = logits(i, j) + b(0, j);
      if (v > best_v) {
        best_v = v;
        best = j;
      }
    }
    correct += best == static_cast<std::size_t>(labels[i]) ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(features.rows());
}

double full_accuracy(const Model& model, const TimeSeriesBatch& batch) {
  const std::size_t n = batch.count();
  std::vector<int> predicted(n, -1);
  parallel_for(n, [&](std::size_t i) {
    Graph g(model.store());
    Tensor logits = model.build_logits(g, batch.sample(i)).value();
    predicted[i] = static_cast<int>(argmax_row(logits));
  });
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    correct += predicted[i] == batch.labels[i] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

void write_metrics(const std::string& out_dir, const EvalResult& result) {
  nlohmann::json j = {{"train_accuracy", result.train_accuracy},
                      {"test_accuracy", result.test_accuracy}};
  std::ofstream out(out_dir + "/metrics.json");
  out << j.dump(2) << "\n";
}

}  // namespace

EvalResult run_probe(const cli::RunConfig& cfg, const std::string& checkpoint) {
  set_precision_from(cfg);
  PreparedData prep = prepare_data(cfg);
  if (!prep.train.has_labels) {
    throw std::invalid_argument("probe: dataset has no labels");
  }
  Rng root(cfg.seed);
  Model model(cfg, prep.tokens, prep.train.channels(), prep.meta.classes,
              root.split("init"));
  engine::load_checkpoint(model.store(), checkpoint);
  model.freeze_all_but_classifier();

  // Frozen encoder: features are computed once and the head is trained on
  // them with the same classification objective.
  Tensor train_features = cached_features(model, prep.train);
  Tensor test_features = cached_features(model, prep.test);

  engine::AdamW opt({cfg.optimizer.lr, cfg.optimizer.beta1, cfg.optimizer.beta2,
                     cfg.optimizer.eps, cfg.optimizer.weight_decay});
  const auto head_w = model.store().find("classifier.w");
  const auto head_b = model.store().find("classifier.b");
  for (std::size_t epoch = 1; epoch <= cfg.training.probe_epochs; ++epoch) {
    Graph g(model.store());
    Var logits = engine::linear(engine::constant(train_features),
                                g.use(head_w), g.use(head_b));
    Var loss = objectives::finetune_loss(logits, prep.train.labels);
    engine::backward(loss);
    std::vector<Tensor> grads;
    g.harvest(grads, 1.0);
    opt.step(model.store(), grads);
  }

  EvalResult result;
  result.train_accuracy = head_accuracy(model, train_features, prep.train.labels);
  result.test_accuracy = head_accuracy(model, test_features, prep.test.labels);
  write_run_prelude(cfg, cfg.out_dir);
  result.checkpoint_path = cfg.out_dir + "/probe.ckpt";
  engine::save_checkpoint(model.store(), result.checkpoint_path);
  write_metrics(cfg.out_dir, result);
  write_manifest(cfg.out_dir, {"config_resolved.json", "overrides.json",
                               "probe.ckpt", "metrics.json"});
  return result;
}

EvalResult run_finetune(const cli::RunConfig& cfg,
                        const std::string& checkpoint) {
  set_precision_from(cfg);
  PreparedData prep = prepare_data(cfg);
  if (!prep.train.has_labels) {
    throw std::invalid_argument("finetune: dataset has no labels");
  }
  Rng root(cfg.seed);
  Model model(cfg, prep.tokens, prep.train.channels(), prep.meta.classes,
              root.split("init"));
  engine::load_checkpoint(model.store(), checkpoint);
  model.store().set_all_trainable(true);

  engine::AdamW opt({cfg.optimizer.lr, cfg.optimizer.beta1, cfg.optimizer.beta2,
                     cfg.optimizer.eps, cfg.optimizer.weight_decay});
  const std::size_t n = prep.train.count();
  Rng shuffle_root = root.split("finetune");
  for (std::size_t epoch = 1; epoch <= cfg.training.finetune_epochs; ++epoch) {
    std::vector<std::size_t> order = all_indices(n);
    Rng shuffle_rng = shuffle_root.split("shuffle", epoch);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);
    }
    for (std::size_t start = 0; start < n; start += cfg.training.batch_size) {
      const std::size_t batch_n = std::min(cfg.training.batch_size, n - start);
      std::vector<std::vector<Tensor>> grads(batch_n);
      parallel_for(batch_n, [&](std::size_t i) {
        const Tensor sample = prep.train.sample(order[start + i]);
        Graph g(model.store());
        Var logits = model.build_logits(g, sample);
        Var loss = objectives::finetune_loss(
            logits, {prep.train.labels[order[start + i]]});
        engine::backward(loss);
        g.harvest(grads[i], 1.0 / static_cast<double>(batch_n));
      });
      std::vector<Tensor> acc;
      for (auto& part : grads) merge_grads(acc, part);
      opt.step(model.store(), acc);
    }
  }

  EvalResult result;
  result.train_accuracy = full_accuracy(model, prep.train);
  result.test_accuracy = full_accuracy(model, prep.test);
  write_run_prelude(cfg, cfg.out_dir);
  result.checkpoint_path = cfg.out_dir + "/finetuned.ckpt";
  engine::save_checkpoint(model.store(), result.checkpoint_path);
  write_metrics(cfg.out_dir, result);
  write_manifest(cfg.out_dir, {"config_resolved.json", "overrides.json",
                               "finetuned.ckpt", "metrics.json"});
  return result;
}

void run_diagnose(const cli::RunConfig& cfg, const std::string& checkpoint) {
  set_precision_from(cfg);
  PreparedData prep = prepare_data(cfg);
  Rng root(cfg.seed);
  Model model(cfg, prep.tokens, prep.train.channels(), prep.meta.classes,
              root.split("init"));
  engine::load_checkpoint(model.store(), checkpoint);

  const TimeSeriesBatch& source =
      prep.test.count() > 0 ? prep.test : prep.train;
  const std::size_t samples = std::min<std::size_t>(source.count(), 8);
  if (samples == 0) throw std::invalid_argument("diagnose: empty dataset");

  diagnostics::DiagnosticsReport report;

  // Interaction matrices: head-averaged attention per layer, averaged over
  // samples, then thresholded-SVD rank.
  std::vector<Tensor> layer_sums;
  for (std::size_t i = 0; i < samples; ++i) {
    backbone::AttnCapture capture;
    model.encoder_features(source.sample(i), &capture);
    if (layer_sums.empty()) {
      layer_sums = capture.layer_mean;
    } else {
      for (std::size_t l = 0; l < layer_sums.size(); ++l) {
        layer_sums[l] = specmtm::add(layer_sums[l], capture.layer_mean[l]);
      }
    }
  }
  for (auto& sum : layer_sums) {
    Tensor mean = scaled(sum, 1.0 / static_cast<double>(samples));
    report.layer_ranks.push_back(diagnostics::interaction_rank(mean));
  }

  // Band energies of raw series vs both reconstructions, averaged over the
  // probe samples.
  const std::size_t bands = 10;
  std::vector<double> raw_acc, t_acc, f_acc;
  std::vector<double> curve_profile;
  Rng mask_rng = root.split("diag_mask");
  for (std::size_t i = 0; i < samples; ++i) {
    const Tensor sample = source.sample(i);
    const backbone::MaskPlan plan = backbone::make_mask(
        model.tokens(), cfg.masking.ratio, mask_rng.split("s", i).seed());
    Model::Reconstructions rec = model.reconstruct(sample, plan);
    report.imag_residue_norms.push_back(rec.imag_residue_norm);
    if (i == 0) curve_profile = rec.block0_profile;
    auto accumulate = [&](const Tensor& series, std::vector<double>& acc,
                          diagnostics::EnergyHistogram* keep) {
      diagnostics::EnergyHistogram h =
          diagnostics::energy_histogram(series, bands);
      if (acc.empty()) acc.assign(h.band_energy.size(), 0.0);
      for (std::size_t b = 0; b < h.band_energy.size(); ++b) {
        acc[b] += h.band_energy[b];
      }
      if (keep && keep->band_bins.empty()) keep->band_bins = h.band_bins;
    };
    accumulate(sample, raw_acc, &report.raw_energy);
    accumulate(rec.temporal, t_acc, &report.reconstructed_t_energy);
    if (model.cbd_enabled()) {
      accumulate(rec.frequency_series, f_acc, &report.reconstructed_f_energy);
    }
  }
  auto finish = [&](std::vector<double>& acc, diagnostics::EnergyHistogram& h) {
    h.band_energy = acc;
    double total = 0.0;
    for (double e : h.band_energy) total += e;
    if (total > 0.0) {
      for (double& e : h.band_energy) e /= total;
    }
  };
  finish(raw_acc, report.raw_energy);
  finish(t_acc, report.reconstructed_t_energy);
  if (model.cbd_enabled()) {
    finish(f_acc, report.reconstructed_f_energy);
    // Learned response curve of the first block, gated on the first sample's
    // decoder-input profile.
    report.bernstein_curve =
        diagnostics::export_bernstein(model.gating_params(0), curve_profile, 101);
  }

  write_run_prelude(cfg, cfg.out_dir);
  diagnostics::write_report(report, cfg.out_dir + "/diag");
  write_manifest(cfg.out_dir,
                 {"config_resolved.json", "overrides.json", "diag/ranks.json",
                  "diag/energy.csv", "diag/bernstein.csv"});
}

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash missing file '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(out);
}

void write_manifest(const std::string& out_dir,
                    const std::vector<std::string>& files) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& rel : files) {
    const std::string full = out_dir + "/" + rel;
    entries.push_back({{"path", rel},
                       {"bytes", fs::file_size(full)},
                       {"fnv1a64", file_hash_hex(full)}});
  }
  nlohmann::json manifest = {{"files", entries}};
  std::ofstream out(out_dir + "/manifest.json");
  out << manifest.dump(2) << "\n";
}

}  // namespace specmtm::trainer
