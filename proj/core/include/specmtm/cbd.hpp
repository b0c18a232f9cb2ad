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

#ifndef SPECMTM_CBD_HPP
#define SPECMTM_CBD_HPP

#include <vector>

#include "specmtm/cim.hpp"
#include "specmtm/mask.hpp"
#include "specmtm/ser.hpp"

namespace specmtm::cbd {

/// One decoder block: the attention sublayer of a vanilla transformer block
/// is replaced by CIM -> SER on the running spectrum (no residual or norm on
/// that path, so the identity-initialized block is an exact identity), and
/// the position-wise feed-forward sublayer is retained — applied per
/// frequency bin to the re/im pair as one 2d-wide real vector, pre-normalized
/// with independent layer norms on the two parts, with a zero-initialized
/// output projection.
struct CbdBlockParams {
  cim::ComplexAffineParams cim_params;
  ser::GatingParams ser_params;
  Tensor ln_re_gain, ln_re_bias;  // 1 x d
  Tensor ln_im_gain, ln_im_bias;  // 1 x d
  Tensor ffn_w1, ffn_b1;          // hidden x 2d, 1 x hidden
  Tensor ffn_w2, ffn_b2;          // 2d x hidden, 1 x 2d

  static CbdBlockParams init(std::size_t d, std::size_t bins, std::size_t order,
                             bool per_channel, std::size_t ffn_hidden, Rng& rng);
  /// Exact-identity configuration: CIM bias-only, SER unit filter, zero
  /// feed-forward.
  static CbdBlockParams identity_init(std::size_t d, std::size_t bins,
                                      std::size_t order,
                                      bool per_channel = false,
                                      std::size_t ffn_hidden = 0);
};

struct CbdStack {
  std::vector<CbdBlockParams> blocks;
  cim::Activation activation = cim::Activation::kSplitRelu;
};

struct CbdBlockVars {
  cim::CimVars cim_vars;
  ser::SerVars ser_vars;
  engine::Var ln_re_gain, ln_re_bias, ln_im_gain, ln_im_bias;
  engine::Var ffn_w1, ffn_b1, ffn_w2, ffn_b2;
};

struct CbdStackVars {
  std::vector<CbdBlockVars> blocks;
  cim::Activation activation = cim::Activation::kSplitRelu;
};

struct CbdBlockRefs {
  cim::CimRefs cim_refs;
  ser::SerRefs ser_refs;
  engine::ParamRef ln_re_gain, ln_re_bias, ln_im_gain, ln_im_bias;
  engine::ParamRef ffn_w1, ffn_b1, ffn_w2, ffn_b2;
  static CbdBlockRefs create(engine::ParameterStore& store,
                             const std::string& prefix,
                             const CbdBlockParams& init);
};

CbdBlockVars lift(const CbdBlockParams& p);
CbdStackVars lift(const CbdStack& stack);
CbdBlockVars bind(engine::Graph& g, const CbdBlockRefs& refs);

spectral::SpectrumVar cbd_block(const spectral::SpectrumVar& spec,
                                const CbdBlockVars& p, cim::Activation act);
spectral::Spectrum cbd_block(const spectral::Spectrum& spec,
                             const CbdBlockParams& p,
                             cim::Activation act = cim::Activation::kSplitRelu);

/// Scatter visible features + mask token, add the decoder's positional
/// encodings, transform, and run every block in order.
spectral::SpectrumVar cbd_decode(const engine::Var& visible_features,
                                 const backbone::MaskPlan& plan,
                                 const CbdStackVars& stack,
                                 const engine::Var& mask_token,
                                 const engine::Var& posenc);
spectral::Spectrum cbd_decode(const Tensor& visible_features,
                              const backbone::MaskPlan& plan,
                              const CbdStack& stack, const Tensor& mask_token,
                              const Tensor& posenc);

}  // namespace specmtm::cbd

#endif  // SPECMTM_CBD_HPP
