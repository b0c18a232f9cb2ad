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

#include "specmtm/cbd.hpp"

#include <cmath>
#include <stdexcept>

namespace specmtm::cbd {

using engine::Var;
using spectral::SpectrumVar;

CbdBlockParams CbdBlockParams::init(std::size_t d, std::size_t bins,
                                    std::size_t order, bool per_channel,
                                    std::size_t ffn_hidden, Rng& rng) {
  CbdBlockParams p;
  p.cim_params = cim::ComplexAffineParams::init(d, rng);
  p.ser_params = ser::GatingParams::identity_init(order, bins, per_channel, d);
  p.ln_re_gain = Tensor::full({1, d}, 1.0);
  p.ln_re_bias = Tensor({1, d});
  p.ln_im_gain = Tensor::full({1, d}, 1.0);
  p.ln_im_bias = Tensor({1, d});
  const std::size_t width = 2 * d;
  if (ffn_hidden == 0) ffn_hidden = 2 * width;
  const double bound = 1.0 / std::sqrt(static_cast<double>(width));
  p.ffn_w1 = Tensor({ffn_hidden, width});
  for (double& x : p.ffn_w1.mut()) x = rng.uniform(-bound, bound);
  p.ffn_b1 = Tensor({1, ffn_hidden});
  // Output projection starts at zero so every block begins as (near) identity.
  p.ffn_w2 = Tensor({width, ffn_hidden});
  p.ffn_b2 = Tensor({1, width});
  return p;
}

CbdBlockParams CbdBlockParams::identity_init(std::size_t d, std::size_t bins,
                                             std::size_t order,
                                             bool per_channel,
                                             std::size_t ffn_hidden) {
  const std::size_t width = 2 * d;
  if (ffn_hidden == 0) ffn_hidden = 2 * width;
  CbdBlockParams p;
  p.cim_params = cim::ComplexAffineParams::identity_init(d);
  p.ser_params = ser::GatingParams::identity_init(order, bins, per_channel, d);
  p.ln_re_gain = Tensor::full({1, d}, 1.0);
  p.ln_re_bias = Tensor({1, d});
  p.ln_im_gain = Tensor::full({1, d}, 1.0);
  p.ln_im_bias = Tensor({1, d});
  p.ffn_w1 = Tensor({ffn_hidden, width});
  p.ffn_b1 = Tensor({1, ffn_hidden});
  p.ffn_w2 = Tensor({width, ffn_hidden});
  p.ffn_b2 = Tensor({1, width});
  return p;
}

CbdBlockRefs CbdBlockRefs::create(engine::ParameterStore& store,
                                  const std::string& prefix,
                                  const CbdBlockParams& init) {
  CbdBlockRefs r;
  r.cim_refs = cim::CimRefs::create(store, prefix + ".cim", init.cim_params);
  r.ser_refs = ser::SerRefs::create(store, prefix + ".ser", init.ser_params);
  r.ln_re_gain = store.create(prefix + ".ln_re.gain", init.ln_re_gain);
  r.ln_re_bias = store.create(prefix + ".ln_re.bias", init.ln_re_bias);
  r.ln_im_gain = store.create(prefix + ".ln_im.gain", init.ln_im_gain);
  r.ln_im_bias = store.create(prefix + ".ln_im.bias", init.ln_im_bias);
  r.ffn_w1 = store.create(prefix + ".ffn.w1", init.ffn_w1);
  r.ffn_b1 = store.create(prefix + ".ffn.b1", init.ffn_b1);
  r.ffn_w2 = store.create(prefix + ".ffn.w2", init.ffn_w2);
  r.ffn_b2 = store.create(prefix + ".ffn.b2", init.ffn_b2);
  return r;
}

CbdBlockVars lift(const CbdBlockParams& p) {
  CbdBlockVars v;
  v.cim_vars = cim::lift(p.cim_params);
  v.ser_vars = ser::lift(p.ser_params);
  v.ln_re_gain = engine::constant(p.ln_re_gain);
  v.ln_re_bias = engine::constant(p.ln_re_bias);
  v.ln_im_gain = engine::constant(p.ln_im_gain);
  v.ln_im_bias = engine::constant(p.ln_im_bias);
  v.ffn_w1 = engine::constant(p.ffn_w1);
  v.ffn_b1 = engine::constant(p.ffn_b1);
  v.ffn_w2 = engine::constant(p.ffn_w2);
  v.ffn_b2 = engine::constant(p.ffn_b2);
  return v;
}

CbdStackVars lift(const CbdStack& stack) {
  CbdStackVars v;
  v.activation = stack.activation;
  for (const auto& b : stack.blocks) v.blocks.push_back(lift(b));
  return v;
}

CbdBlockVars bind(engine::Graph& g, const CbdBlockRefs& refs) {
  CbdBlockVars v;
  v.cim_vars = cim::bind(g, refs.cim_refs);
  v.ser_vars = ser::bind(g, refs.ser_refs);
  v.ln_re_gain = g.use(refs.ln_re_gain);
  v.ln_re_bias = g.use(refs.ln_re_bias);
  v.ln_im_gain = g.use(refs.ln_im_gain);
  v.ln_im_bias = g.use(refs.ln_im_bias);
  v.ffn_w1 = g.use(refs.ffn_w1);
  v.ffn_b1 = g.use(refs.ffn_b1);
  v.ffn_w2 = g.use(refs.ffn_w2);
  v.ffn_b2 = g.use(refs.ffn_b2);
  return v;
}

SpectrumVar cbd_block(const SpectrumVar& spec, const CbdBlockVars& p,
                      cim::Activation act) {
  SpectrumVar h =
      ser::ser_rebalance(cim::cim_modulate(spec, p.cim_vars, act), p.ser_vars);
  Var re_n = engine::layer_norm_rows(h.re, p.ln_re_gain, p.ln_re_bias);
  Var im_n = engine::layer_norm_rows(h.im, p.ln_im_gain, p.ln_im_bias);
  Var joint = engine::concat_cols({re_n, im_n});
  Var f = engine::linear(engine::gelu(engine::linear(joint, p.ffn_w1, p.ffn_b1)),
                         p.ffn_w2, p.ffn_b2);
  const std::size_t d = spec.re.value().cols();
  SpectrumVar out;
  out.origin_length = spec.origin_length;
  out.re = engine::add(h.re, engine::slice_cols(f, 0, d));
  out.im = engine::add(h.im, engine::slice_cols(f, d, d));
  return out;
}

spectral::Spectrum cbd_block(const spectral::Spectrum& spec,
                             const CbdBlockParams& p, cim::Activation act) {
  return cbd_block(spectral::lift(spec), lift(p), act).detach();
}

SpectrumVar cbd_decode(const Var& visible_features,
                       const backbone::MaskPlan& plan,
                       const CbdStackVars& stack, const Var& mask_token,
                       const Var& posenc) {
  const std::size_t total = plan.token_count;
  const std::size_t visible = plan.token_count - plan.masked_indices.size();
  if (visible_features.value().rows() != visible) {
    throw std::invalid_argument(
        "cbd_decode: visible feature rows " +
        std::to_string(visible_features.value().rows()) +
        " inconsistent with mask plan (" + std::to_string(visible) +
        " visible of " + std::to_string(total) + ")");
  }
  Var full = engine::scatter_rows(visible_features, mask_token,
                                  plan.visible_indices(), total);
  full = engine::add(full, posenc);
  SpectrumVar zf = spectral::dft_graph(full);
  for (const auto& block : stack.blocks) {
    zf = cbd_block(zf, block, stack.activation);
  }
  return zf;
}

spectral::Spectrum cbd_decode(const Tensor& visible_features,
                              const backbone::MaskPlan& plan,
                              const CbdStack& stack, const Tensor& mask_token,
                              const Tensor& posenc) {
  return cbd_decode(engine::constant(visible_features), plan, lift(stack),
                    engine::constant(mask_token), engine::constant(posenc))
      .detach();
}

}  // namespace specmtm::cbd
