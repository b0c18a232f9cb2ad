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

#ifndef SPECMTM_BACKBONE_HPP
#define SPECMTM_BACKBONE_HPP

#include <string>
#include <vector>

#include "specmtm/batch.hpp"
#include "specmtm/mask.hpp"
#include "specmtm/params.hpp"
#include "specmtm/rng.hpp"

namespace specmtm::backbone {

/// Non-overlapping convolutional token embedding (kernel = stride = window)
/// plus learned positional encodings.
struct EmbedParams {
  Tensor w;       // d x (window * C)
  Tensor b;       // 1 x d
  Tensor posenc;  // max_tokens x d
  std::size_t window = 8;

  static EmbedParams init(std::size_t d, std::size_t channels,
                          std::size_t window, std::size_t max_tokens, Rng& rng);
};

/// One pre-norm transformer layer (multi-head self-attention + feed-forward).
struct AttnLayerParams {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor ln1_gain, ln1_bias, ln2_gain, ln2_bias;
  Tensor ffn_w1, ffn_b1, ffn_w2, ffn_b2;

  static AttnLayerParams init(std::size_t d, std::size_t ffn_hidden, Rng& rng);
};

struct EncoderParams {
  EmbedParams embed;
  std::vector<AttnLayerParams> layers;
  std::size_t heads = 4;

  static EncoderParams init(std::size_t d, std::size_t channels,
                            std::size_t window, std::size_t max_tokens,
                            std::size_t num_layers, std::size_t heads,
                            std::size_t ffn_hidden, Rng& rng);
};

/// Vanilla temporal decoder: scatter + positional encodings + transformer
/// layers + per-token linear head back to the raw window.
struct TemporalDecoderParams {
  Tensor posenc;  // max_tokens x d, zero-initialized
  std::vector<AttnLayerParams> layers;
  Tensor head_w;  // (window * C) x d
  Tensor head_b;  // 1 x (window * C)
  std::size_t heads = 4;

  static TemporalDecoderParams init(std::size_t d, std::size_t channels,
                                    std::size_t window, std::size_t max_tokens,
                                    std::size_t num_layers, std::size_t heads,
                                    std::size_t ffn_hidden, Rng& rng);
};

struct ClassifierParams {
  Tensor w;  // num_classes x d
  Tensor b;  // 1 x num_classes
  static ClassifierParams init(std::size_t d, std::size_t num_classes, Rng& rng);
};

// Graph-side mirrors.
struct EmbedVars {
  engine::Var w, b, posenc;
  std::size_t window = 8;
};
struct AttnLayerVars {
  engine::Var wq, bq, wk, bk, wv, bv, wo, bo;
  engine::Var ln1_gain, ln1_bias, ln2_gain, ln2_bias;
  engine::Var ffn_w1, ffn_b1, ffn_w2, ffn_b2;
};
struct EncoderVars {
  EmbedVars embed;
  std::vector<AttnLayerVars> layers;
  std::size_t heads = 4;
};
struct TemporalDecoderVars {
  engine::Var posenc;
  std::vector<AttnLayerVars> layers;
  engine::Var head_w, head_b;
  std::size_t heads = 4;
};
struct ClassifierVars {
  engine::Var w, b;
};

struct EmbedRefs {
  engine::ParamRef w, b, posenc;
  std::size_t window = 8;
  static EmbedRefs create(engine::ParameterStore& store,
                          const std::string& prefix, const EmbedParams& init);
};
struct AttnLayerRefs {
  engine::ParamRef wq, bq, wk, bk, wv, bv, wo, bo;
  engine::ParamRef ln1_gain, ln1_bias, ln2_gain, ln2_bias;
  engine::ParamRef ffn_w1, ffn_b1, ffn_w2, ffn_b2;
  static AttnLayerRefs create(engine::ParameterStore& store,
                              const std::string& prefix,
                              const AttnLayerParams& init);
};
struct EncoderRefs {
  EmbedRefs embed;
  std::vector<AttnLayerRefs> layers;
  std::size_t heads = 4;
  static EncoderRefs create(engine::ParameterStore& store,
                            const std::string& prefix,
                            const EncoderParams& init);
};
struct TemporalDecoderRefs {
  engine::ParamRef posenc;
  std::vector<AttnLayerRefs> layers;
  engine::ParamRef head_w, head_b;
  std::size_t heads = 4;
  static TemporalDecoderRefs create(engine::ParameterStore& store,
                                    const std::string& prefix,
                                    const TemporalDecoderParams& init);
};
struct ClassifierRefs {
  engine::ParamRef w, b;
  static ClassifierRefs create(engine::ParameterStore& store,
                               const std::string& prefix,
                               const ClassifierParams& init);
};

EmbedVars lift(const EmbedParams& p);
AttnLayerVars lift(const AttnLayerParams& p);
EncoderVars lift(const EncoderParams& p);
TemporalDecoderVars lift(const TemporalDecoderParams& p);
ClassifierVars lift(const ClassifierParams& p);
EmbedVars bind(engine::Graph& g, const EmbedRefs& refs);
AttnLayerVars bind(engine::Graph& g, const AttnLayerRefs& refs);
EncoderVars bind(engine::Graph& g, const EncoderRefs& refs);
TemporalDecoderVars bind(engine::Graph& g, const TemporalDecoderRefs& refs);
ClassifierVars bind(engine::Graph& g, const ClassifierRefs& refs);

/// Attention matrices recorded during a forward pass, averaged over heads
/// per layer (and per head when requested).
struct AttnCapture {
  bool want_per_head = false;
  std::vector<Tensor> layer_mean;
  std::vector<std::vector<Tensor>> per_head;
};

/// Number of tokens for a raw length (inputs are right-truncated to a
/// multiple of the window). Rejects lengths shorter than one window.
std::size_t token_count_for(std::size_t length, std::size_t window);
/// The sample cropped to token_count * window rows.
Tensor truncate_to_window(const Tensor& sample, std::size_t window);

/// Tokens for one L' x C sample: window flattening, linear map, positional
/// encodings. L' must be a multiple of the window.
engine::Var embed(const engine::Var& sample, const EmbedVars& p);
Tensor embed(const Tensor& sample, const EmbedParams& p);

/// Pre-norm transformer encoder over the given tokens (visible tokens only
/// during pre-training). Rejects empty input.
engine::Var encode(const engine::Var& tokens, const EncoderVars& p,
                   AttnCapture* capture = nullptr);
Tensor encode(const Tensor& tokens, const EncoderParams& p,
              AttnCapture* capture = nullptr);

/// Scatter + decode + project every token back to its raw window; returns the
/// L' x C reconstruction.
engine::Var temporal_decode(const engine::Var& visible_features,
                            const MaskPlan& plan,
                            const TemporalDecoderVars& p,
                            const engine::Var& mask_token,
                            std::size_t channels);
Tensor temporal_decode(const Tensor& visible_features, const MaskPlan& plan,
                       const TemporalDecoderParams& p, const Tensor& mask_token,
                       std::size_t channels);

/// Mean-pool over tokens then a single linear layer; returns 1 x num_classes
/// logits.
engine::Var classify(const engine::Var& tokens, const ClassifierVars& head);
Tensor classify(const Tensor& tokens, const ClassifierParams& head);

}  // namespace specmtm::backbone

#endif  // SPECMTM_BACKBONE_HPP
