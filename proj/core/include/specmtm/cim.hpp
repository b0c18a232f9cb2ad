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

#ifndef SPECMTM_CIM_HPP
#define SPECMTM_CIM_HPP

#include "specmtm/params.hpp"
#include "specmtm/rng.hpp"
#include "specmtm/spectral_ops.hpp"

namespace specmtm::cim {

/// Activation applied separately to the real and imaginary parts of the
/// modulation pre-activation.
enum class Activation { kSplitRelu, kSplitTanh };

/// One complex d x d affine map, split into real and imaginary blocks and
/// shared across frequency bins.
struct ComplexAffineParams {
  Tensor w_re;  // d x d
  Tensor w_im;  // d x d
  Tensor b_re;  // 1 x d
  Tensor b_im;  // 1 x d

  std::size_t channels() const { return w_re.rows(); }

  /// Training init: weights ~ U(-1/sqrt(d), 1/sqrt(d)), bias (1, 0) so the
  /// modulation starts near the complex identity.
  static ComplexAffineParams init(std::size_t d, Rng& rng);
  /// Bias-only init: weights zero, bias (1, 0); the modulation is exactly 1.
  static ComplexAffineParams identity_init(std::size_t d);
};

struct CimVars {
  engine::Var w_re, w_im, b_re, b_im;
};

CimVars lift(const ComplexAffineParams& p);
CimVars bind(engine::Graph& g, const struct CimRefs& refs);

struct CimRefs {
  engine::ParamRef w_re, w_im, b_re, b_im;
  static CimRefs create(engine::ParameterStore& store, const std::string& prefix,
                        const ComplexAffineParams& init);
};

/// Per-bin complex affine map, unfolded into real arithmetic:
///   out_re = Z_re W_re^T - Z_im W_im^T + b_re
///   out_im = Z_im W_re^T + Z_re W_im^T + b_im
spectral::SpectrumVar complex_affine(const spectral::SpectrumVar& spec,
                                     const CimVars& p);

/// Modulation signal M = sigma(complex_affine(spec)), sigma applied to the
/// real and imaginary parts independently.
spectral::SpectrumVar modulation_signal(const spectral::SpectrumVar& spec,
                                        const CimVars& p,
                                        Activation act = Activation::kSplitRelu);

/// Elementwise complex product M (.) spec.
spectral::SpectrumVar apply_modulation(const spectral::SpectrumVar& m,
                                       const spectral::SpectrumVar& spec);

/// Full unit: spec -> modulation_signal(spec) (.) spec.
spectral::SpectrumVar cim_modulate(const spectral::SpectrumVar& spec,
                                   const CimVars& p,
                                   Activation act = Activation::kSplitRelu);

// Value-level wrappers used by tests and standalone evaluation.
spectral::Spectrum complex_affine(const spectral::Spectrum& spec,
                                  const ComplexAffineParams& p);
spectral::Spectrum modulation_signal(const spectral::Spectrum& spec,
                                     const ComplexAffineParams& p,
                                     Activation act = Activation::kSplitRelu);
spectral::Spectrum cim_modulate(const spectral::Spectrum& spec,
                                const ComplexAffineParams& p,
                                Activation act = Activation::kSplitRelu);

}  // namespace specmtm::cim

#endif  // SPECMTM_CIM_HPP
