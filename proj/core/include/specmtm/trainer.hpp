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

#ifndef SPECMTM_TRAINER_HPP
#define SPECMTM_TRAINER_HPP

#include <string>
#include <vector>

#include "specmtm/backbone.hpp"
#include "specmtm/cbd.hpp"
#include "specmtm/config.hpp"
#include "specmtm/objectives.hpp"
#include "specmtm/optim.hpp"

namespace specmtm::trainer {

/// Worker count: hardware concurrency, capped by the SPECMTM_THREADS
/// environment variable when set.
std::size_t worker_count();

struct PreparedData {
  TimeSeriesBatch train;
  TimeSeriesBatch test;
  data::DatasetMeta meta;
  std::size_t truncated_length = 0;  // L' = tokens * window
  std::size_t tokens = 0;
  std::size_t dropped_steps = 0;     // right-truncation amount per sample
};

PreparedData prepare_data(const cli::RunConfig& cfg);

/// The full two-branch model bound to one ParameterStore.
class Model {
 public:
  Model(const cli::RunConfig& cfg, std::size_t tokens, std::size_t channels,
        std::size_t num_classes, Rng init_rng);

  engine::ParameterStore& store() { return store_; }
  const engine::ParameterStore& store() const { return store_; }
  std::size_t tokens() const { return tokens_; }
  std::size_t window() const { return window_; }
  std::size_t channels() const { return channels_; }
  bool cbd_enabled() const { return cbd_enabled_; }

  /// Pre-training loss graph for one L' x C sample.
  engine::Var build_pretrain_loss(engine::Graph& g, const Tensor& sample,
                                  const backbone::MaskPlan& plan,
                                  const objectives::LossWeights& weights) const;
  /// Classification logits graph (no masking).
  engine::Var build_logits(engine::Graph& g, const Tensor& sample) const;
  /// Mean-pooled frozen features for one sample (no graph retained).
  Tensor encoder_features(const Tensor& sample,
                          backbone::AttnCapture* capture = nullptr) const;
  /// Temporal-branch prediction and (when enabled) frequency-branch series
  /// prediction for diagnostics.
  struct Reconstructions {
    Tensor temporal;          // L' x C
    Tensor frequency_series;  // L' x C (empty when cbd disabled)
    double imag_residue_norm = 0.0;
    /// Normalized amplitude profile (channel 0) of the decoder input
    /// spectrum, length = tokens; feeds export_bernstein.
    std::vector<double> block0_profile;
  };
  Reconstructions reconstruct(const Tensor& sample,
                              const backbone::MaskPlan& plan) const;

  /// Gating parameters of block `u`, copied out of the store (diagnostics).
  ser::GatingParams gating_params(std::size_t block) const;

  void freeze_all_but_classifier();

 private:
  engine::ParameterStore store_;
  backbone::EncoderRefs encoder_;
  backbone::TemporalDecoderRefs temporal_decoder_;
  std::vector<cbd::CbdBlockRefs> cbd_blocks_;
  engine::ParamRef cbd_posenc_;
  engine::ParamRef cbd_head_w_, cbd_head_b_;
  engine::ParamRef mask_token_;
  backbone::ClassifierRefs classifier_;
  cim::Activation activation_ = cim::Activation::kSplitRelu;
  std::size_t tokens_ = 0;
  std::size_t window_ = 8;
  std::size_t channels_ = 0;
  std::size_t ser_order_ = 12;
  bool ser_per_channel_ = false;
  bool cbd_enabled_ = true;

  cbd::CbdStackVars bind_cbd(engine::Graph& g) const;
};

struct PretrainResult {
  std::vector<double> epoch_losses;
  std::string loss_csv_path;
  std::string checkpoint_path;
};
PretrainResult run_pretrain(const cli::RunConfig& cfg);

struct EvalResult {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::string checkpoint_path;
};
/// Linear probe: loads the checkpoint, freezes everything except the
/// classification head, trains the head, evaluates both splits.
EvalResult run_probe(const cli::RunConfig& cfg, const std::string& checkpoint);
/// Fine-tune: loads the checkpoint and updates all parameters with the
/// classification loss.
EvalResult run_finetune(const cli::RunConfig& cfg, const std::string& checkpoint);

/// Emits ranks.json / energy.csv / bernstein.csv under <out_dir>/diag.
void run_diagnose(const cli::RunConfig& cfg, const std::string& checkpoint);

/// FNV-1a 64 content hash, hex-encoded (run manifests).
std::string file_hash_hex(const std::string& path);
/// Writes <out_dir>/manifest.json listing every artifact with its hash.
void write_manifest(const std::string& out_dir,
                    const std::vector<std::string>& files);

}  // namespace specmtm::trainer

#endif  // SPECMTM_TRAINER_HPP
