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

#include "specmtm/backbone.hpp"

#include <cmath>
#include <stdexcept>

namespace specmtm::backbone {

using engine::Var;

namespace {

Tensor uniform_init(std::vector<std::size_t> shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& x : t.mut()) x = rng.uniform(-bound, bound);
  return t;
}

}  // namespace

EmbedParams EmbedParams::init(std::size_t d, std::size_t channels,
                              std::size_t window, std::size_t max_tokens,
                              Rng& rng) {
  EmbedParams p;
  p.window = window;
  const std::size_t fan_in = window * channels;
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  p.w = uniform_init({d, fan_in}, bound, rng);
  p.b = Tensor({1, d});
  p.posenc = Tensor({max_tokens, d});
  for (double& x : p.posenc.mut()) x = rng.normal(0.0, 0.02);
  return p;
}

AttnLayerParams AttnLayerParams::init(std::size_t d, std::size_t ffn_hidden,
                                      Rng& rng) {
  AttnLayerParams p;
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  p.wq = uniform_init({d, d}, bound, rng);
  p.wk = uniform_init({d, d}, bound, rng);
  p.wv = uniform_init({d, d}, bound, rng);
  p.wo = uniform_init({d, d}, bound, rng);
  p.bq = Tensor({1, d});
  p.bk = Tensor({1, d});
  p.bv = Tensor({1, d});
  p.bo = Tensor({1, d});
  p.ln1_gain = Tensor::full({1, d}, 1.0);
  p.ln1_bias = Tensor({1, d});
  p.ln2_gain = Tensor::full({1, d}, 1.0);
  p.ln2_bias = Tensor({1, d});
  p.ffn_w1 = uniform_init({ffn_hidden, d}, bound, rng);
  p.ffn_b1 = Tensor({1, ffn_hidden});
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(ffn_hidden));
  p.ffn_w2 = uniform_init({d, ffn_hidden}, bound2, rng);
  p.ffn_b2 = Tensor({1, d});
  return p;
}

EncoderParams EncoderParams::init(std::size_t d, std::size_t channels,
                                  std::size_t window, std::size_t max_tokens,
                                  std::size_t num_layers, std::size_t heads,
                                  std::size_t ffn_hidden, Rng& rng) {
  EncoderParams p;
  p.heads = heads;
  Rng embed_rng = rng.split("embed");
  p.embed = EmbedParams::init(d, channels, window, max_tokens, embed_rng);
  for (std::size_t i = 0; i < num_layers; ++i) {
    Rng layer_rng = rng.split("layer", i);
    p.layers.push_back(AttnLayerParams::init(d, ffn_hidden, layer_rng));
  }
  return p;
}

TemporalDecoderParams TemporalDecoderParams::init(
    std::size_t d, std::size_t channels, std::size_t window,
    std::size_t max_tokens, std::size_t num_layers, std::size_t heads,
    std::size_t ffn_hidden, Rng& rng) {
  TemporalDecoderParams p;
  p.heads = heads;
  p.posenc = Tensor({max_tokens, d});
  for (std::size_t i = 0; i < num_layers; ++i) {
    Rng layer_rng = rng.split("layer", i);
    p.layers.push_back(AttnLayerParams::init(d, ffn_hidden, layer_rng));
  }
  const std::size_t out_width = window * channels;
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  Rng head_rng = rng.split("head");
  p.head_w = uniform_init({out_width, d}, bound, head_rng);
  p.head_b = Tensor({1, out_width});
  return p;
}

ClassifierParams ClassifierParams::init(std::size_t d, std::size_t num_classes,
                                        Rng& rng) {
  ClassifierParams p;
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  p.w = uniform_init({num_classes, d}, bound, rng);
  p.b = Tensor({1, num_classes});
  return p;
}

EmbedRefs EmbedRefs::create(engine::ParameterStore& store,
                            const std::string& prefix,
                            const EmbedParams& init) {
  EmbedRefs r;
  r.window = init.window;
  r.w = store.create(prefix + ".w", init.w);
  r.b = store.create(prefix + ".b", init.b);
  r.posenc = store.create(prefix + ".posenc", init.posenc);
  return r;
}

AttnLayerRefs AttnLayerRefs::create(engine::ParameterStore& store,
                                    const std::string& prefix,
                                    const AttnLayerParams& init) {
  AttnLayerRefs r;
  r.wq = store.create(prefix + ".wq", init.wq);
  r.bq = store.create(prefix + ".bq", init.bq);
  r.wk = store.create(prefix + ".wk", init.wk);
  r.bk = store.create(prefix + ".bk", init.bk);
  r.wv = store.create(prefix + ".wv", init.wv);
  r.bv = store.create(prefix + ".bv", init.bv);
  r.wo = store.create(prefix + ".wo", init.wo);
  r.bo = store.create(prefix + ".bo", init.bo);
  r.ln1_gain = store.create(prefix + ".ln1.gain", init.ln1_gain);
  r.ln1_bias = store.create(prefix + ".ln1.bias", init.ln1_bias);
  r.ln2_gain = store.create(prefix + ".ln2.gain", init.ln2_gain);
  r.ln2_bias = store.create(prefix + ".ln2.bias", init.ln2_bias);
  r.ffn_w1 = store.create(prefix + ".ffn.w1", init.ffn_w1);
  r.ffn_b1 = store.create(prefix + ".ffn.b1", init.ffn_b1);
  r.ffn_w2 = store.create(prefix + ".ffn.w2", init.ffn_w2);
  r.ffn_b2 = store.create(prefix + ".ffn.b2", init.ffn_b2);
  return r;
}

EncoderRefs EncoderRefs::create(engine::ParameterStore& store,
                                const std::string& prefix,
                                const EncoderParams& init) {
  EncoderRefs r;
  r.heads = init.heads;
  r.embed = EmbedRefs::create(store, prefix + ".embed", init.embed);
  for (std::size_t i = 0; i < init.layers.size(); ++i) {
    r.layers.push_back(AttnLayerRefs::create(
        store, prefix + ".layer" + std::to_string(i), init.layers[i]));
  }
  return r;
}

TemporalDecoderRefs TemporalDecoderRefs::create(
    engine::ParameterStore& store, const std::string& prefix,
    const TemporalDecoderParams& init) {
  TemporalDecoderRefs r;
  r.heads = init.heads;
  r.posenc = store.create(prefix + ".posenc", init.posenc);
  for (std::size_t i = 0; i < init.layers.size(); ++i) {
    r.layers.push_back(AttnLayerRefs::create(
        store, prefix + ".layer" + std::to_string(i), init.layers[i]));
  }
  r.head_w = store.create(prefix + ".head.w", init.head_w);
  r.head_b = store.create(prefix + ".head.b", init.head_b);
  return r;
}

ClassifierRefs ClassifierRefs::create(engine::ParameterStore& store,
                                      const std::string& prefix,
                                      const ClassifierParams& init) {
  ClassifierRefs r;
  r.w = store.create(prefix + ".w", init.w);
  r.b = store.create(prefix + ".b", init.b);
  return r;
}

EmbedVars lift(const EmbedParams& p) {
  return EmbedVars{engine::constant(p.w), engine::constant(p.b),
                   engine::constant(p.posenc), p.window};
}

AttnLayerVars lift(const AttnLayerParams& p) {
  AttnLayerVars v;
  v.wq = engine::constant(p.wq);
  v.bq = engine::constant(p.bq);
  v.wk = engine::constant(p.wk);
  v.bk = engine::constant(p.bk);
  v.wv = engine::constant(p.wv);
  v.bv = engine::constant(p.bv);
  v.wo = engine::constant(p.wo);
  v.bo = engine::constant(p.bo);
  v.ln1_gain = engine::constant(p.ln1_gain);
  v.ln1_bias = engine::constant(p.ln1_bias);
  v.ln2_gain = engine::constant(p.ln2_gain);
  v.ln2_bias = engine::constant(p.ln2_bias);
  v.ffn_w1 = engine::constant(p.ffn_w1);
  v.ffn_b1 = engine::constant(p.ffn_b1);
  v.ffn_w2 = engine::constant(p.ffn_w2);
  v.ffn_b2 = engine::constant(p.ffn_b2);
  return v;
}

EncoderVars lift(const EncoderParams& p) {
  EncoderVars v;
  v.heads = p.heads;
  v.embed = lift(p.embed);
  for (const auto& l : p.layers) v.layers.push_back(lift(l));
  return v;
}

TemporalDecoderVars lift(const TemporalDecoderParams& p) {
  TemporalDecoderVars v;
  v.heads = p.heads;
  v.posenc = engine::constant(p.posenc);
  for (const auto& l : p.layers) v.layers.push_back(lift(l));
  v.head_w = engine::constant(p.head_w);
  v.head_b = engine::constant(p.head_b);
  return v;
}

ClassifierVars lift(const ClassifierParams& p) {
  return ClassifierVars{engine::constant(p.w), engine::constant(p.b)};
}

EmbedVars bind(engine::Graph& g, const EmbedRefs& refs) {
  return EmbedVars{g.use(refs.w), g.use(refs.b), g.use(refs.posenc),
                   refs.window};
}

AttnLayerVars bind(engine::Graph& g, const AttnLayerRefs& refs) {
  AttnLayerVars v;
  v.wq = g.use(refs.wq);
  v.bq = g.use(refs.bq);
  v.wk = g.use(refs.wk);
  v.bk = g.use(refs.bk);
  v.wv = g.use(refs.wv);
  v.bv = g.use(refs.bv);
  v.wo = g.use(refs.wo);
  v.bo = g.use(refs.bo);
  v.ln1_gain = g.use(refs.ln1_gain);
  v.ln1_bias = g.use(refs.ln1_bias);
  v.ln2_gain = g.use(refs.ln2_gain);
  v.ln2_bias = g.use(refs.ln2_bias);
  v.ffn_w1 = g.use(refs.ffn_w1);
  v.ffn_b1 = g.use(refs.ffn_b1);
  v.ffn_w2 = g.use(refs.ffn_w2);
  v.ffn_b2 = g.use(refs.ffn_b2);
  return v;
}

EncoderVars bind(engine::Graph& g, const EncoderRefs& refs) {
  EncoderVars v;
  v.heads = refs.heads;
  v.embed = bind(g, refs.embed);
  for (const auto& l : refs.layers) v.layers.push_back(bind(g, l));
  return v;
}

TemporalDecoderVars bind(engine::Graph& g, const TemporalDecoderRefs& refs) {
  TemporalDecoderVars v;
  v.heads = refs.heads;
  v.posenc = g.use(refs.posenc);
  for (const auto& l : refs.layers) v.layers.push_back(bind(g, l));
  v.head_w = g.use(refs.head_w);
  v.head_b = g.use(refs.head_b);
  return v;
}

ClassifierVars bind(engine::Graph& g, const ClassifierRefs& refs) {
  return ClassifierVars{g.use(refs.w), g.use(refs.b)};
}

std::size_t token_count_for(std::size_t length, std::size_t window) {
  if (length < window) {
    throw std::invalid_argument("embed: series length " +
                                std::to_string(length) +
                                " shorter than window " +
                                std::to_string(window));
  }
  return length / window;
}

Tensor truncate_to_window(const Tensor& sample, std::size_t window) {
  const std::size_t tokens = token_count_for(sample.rows(), window);
  const std::size_t kept = tokens * window;
  if (kept == sample.rows()) return sample;
  const std::size_t cols = sample.cols();
  Tensor out({kept, cols});
  auto& o = out.mut();
  const auto& x = sample.data();
  for (std::size_t i = 0; i < kept * cols; ++i) o[i] = x[i];
  return out;
}

namespace {

Var multi_head_attention(const Var& x, const AttnLayerVars& p,
                         std::size_t heads, std::vector<Tensor>* head_attn) {
  const std::size_t d = x.value().cols();
  if (d % heads != 0) {
    throw std::invalid_argument("attention: model width " + std::to_string(d) +
                                " not divisible by " + std::to_string(heads) +
                                " heads");
  }
  const std::size_t dh = d / heads;
  Var q = engine::linear(x, p.wq, p.bq);
  Var k = engine::linear(x, p.wk, p.bk);
  Var v = engine::linear(x, p.wv, p.bv);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> contexts;
  contexts.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    Var qh = engine::slice_cols(q, h * dh, dh);
    Var kh = engine::slice_cols(k, h * dh, dh);
    Var vh = engine::slice_cols(v, h * dh, dh);
    Var scores = engine::scale(engine::matmul(qh, kh, false, true), inv_sqrt);
    Var attn = engine::softmax_rows(scores);
    if (head_attn) head_attn->push_back(attn.value());
    contexts.push_back(engine::matmul(attn, vh));
  }
  Var ctx = heads == 1 ? contexts[0] : engine::concat_cols(contexts);
  return engine::linear(ctx, p.wo, p.bo);
}

Var feed_forward(const Var& x, const AttnLayerVars& p) {
  return engine::linear(engine::gelu(engine::linear(x, p.ffn_w1, p.ffn_b1)),
                        p.ffn_w2, p.ffn_b2);
}

Var transformer_layer(const Var& x, const AttnLayerVars& p, std::size_t heads,
                      std::vector<Tensor>* head_attn) {
  Var normed = engine::layer_norm_rows(x, p.ln1_gain, p.ln1_bias);
  Var h = engine::add(x, multi_head_attention(normed, p, heads, head_attn));
  Var normed2 = engine::layer_norm_rows(h, p.ln2_gain, p.ln2_bias);
  return engine::add(h, feed_forward(normed2, p));
}

Tensor mean_of(const std::vector<Tensor>& mats) {
  Tensor acc = mats[0];
  for (std::size_t i = 1; i < mats.size(); ++i) acc = specmtm::add(acc, mats[i]);
  return scaled(acc, 1.0 / static_cast<double>(mats.size()));
}

}  // namespace

Var embed(const Var& sample, const EmbedVars& p) {
  const Tensor& sv = sample.value();
  const std::size_t window = p.window;
  if (sv.rows() < window) {
    throw std::invalid_argument("embed: series length " +
                                std::to_string(sv.rows()) +
                                " shorter than window " +
                                std::to_string(window));
  }
  if (sv.rows() % window != 0) {
    throw std::invalid_argument(
        "embed: length must be a multiple of the window; truncate first");
  }
  const std::size_t tokens = sv.rows() / window;
  const std::size_t fan_in = window * sv.cols();
  if (p.w.value().cols() != fan_in) {
    throw std::invalid_argument("embed: weight expects window*channels = " +
                                std::to_string(p.w.value().cols()) + ", got " +
                                std::to_string(fan_in));
  }
  if (tokens > p.posenc.value().rows()) {
    throw std::invalid_argument("embed: " + std::to_string(tokens) +
                                " tokens exceed positional table of " +
                                std::to_string(p.posenc.value().rows()));
  }
  // Non-overlapping windows are a pure reshape in row-major layout.
  Var windows = engine::reshape(sample, {tokens, fan_in});
  Var out = engine::linear(windows, p.w, p.b);
  std::vector<std::size_t> idx(tokens);
  for (std::size_t i = 0; i < tokens; ++i) idx[i] = i;
  return engine::add(out, engine::gather_rows(p.posenc, idx));
}

Tensor embed(const Tensor& sample, const EmbedParams& p) {
  return embed(engine::constant(sample), lift(p)).value();
}

Var encode(const Var& tokens, const EncoderVars& p, AttnCapture* capture) {
  if (tokens.value().rows() == 0) {
    throw std::invalid_argument("encode: empty token sequence");
  }
  Var x = tokens;
  for (const auto& layer : p.layers) {
    std::vector<Tensor> head_attn;
    x = transformer_layer(x, layer, p.heads, capture ? &head_attn : nullptr);
    if (capture) {
      capture->layer_mean.push_back(mean_of(head_attn));
      if (capture->want_per_head) capture->per_head.push_back(head_attn);
    }
  }
  return x;
}

Tensor encode(const Tensor& tokens, const EncoderParams& p,
              AttnCapture* capture) {
  return encode(engine::constant(tokens), lift(p), capture).value();
}

Var temporal_decode(const Var& visible_features, const MaskPlan& plan,
                    const TemporalDecoderVars& p, const engine::Var& mask_token,
                    std::size_t channels) {
  const std::size_t total = plan.token_count;
  const std::size_t visible = total - plan.masked_indices.size();
  if (visible_features.value().rows() != visible) {
    throw std::invalid_argument(
        "temporal_decode: visible feature rows " +
        std::to_string(visible_features.value().rows()) +
        " inconsistent with mask plan (" + std::to_string(visible) +
        " visible of " + std::to_string(total) + ")");
  }
  Var x = engine::scatter_rows(visible_features, mask_token,
                               plan.visible_indices(), total);
  std::vector<std::size_t> idx(total);
  for (std::size_t i = 0; i < total; ++i) idx[i] = i;
  x = engine::add(x, engine::gather_rows(p.posenc, idx));
  for (const auto& layer : p.layers) {
    x = transformer_layer(x, layer, p.heads, nullptr);
  }
  Var windows = engine::linear(x, p.head_w, p.head_b);
  const std::size_t window = windows.value().cols() / channels;
  return engine::reshape(windows, {total * window, channels});
}

Tensor temporal_decode(const Tensor& visible_features, const MaskPlan& plan,
                       const TemporalDecoderParams& p, const Tensor& mask_token,
                       std::size_t channels) {
  return temporal_decode(engine::constant(visible_features), plan, lift(p),
                         engine::constant(mask_token), channels)
      .value();
}

Var classify(const Var& tokens, const ClassifierVars& head) {
  return engine::linear(engine::mean_rows(tokens), head.w, head.b);
}

Tensor classify(const Tensor& tokens, const ClassifierParams& head) {
  return classify(engine::constant(tokens), lift(head)).value();
}

}  // namespace specmtm::backbone
