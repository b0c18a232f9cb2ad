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

#ifndef SPECMTM_SER_HPP
#define SPECMTM_SER_HPP

#include <vector>

#include "specmtm/params.hpp"
#include "specmtm/spectral_ops.hpp"

namespace specmtm::ser {

/// Energy-aware gate producing the K+1 Bernstein coefficients from the
/// normalized amplitude profile. The weight acts on a length-S profile, so S
/// is fixed when the gate is constructed. When `per_channel` the weight holds
/// one (K+1) x S block per channel, stacked along rows; otherwise a single
/// block is shared by all channels.
struct GatingParams {
  Tensor w_c;   // (K+1) x S, or (d*(K+1)) x S when per-channel
  Tensor b_c;   // (K+1) x 1
  std::size_t order = 0;  // polynomial order K
  bool per_channel = false;

  std::size_t coeff_count() const { return order + 1; }

  /// Identity filter init: w_c = 0, b_c = 1, so every coefficient is 1 and
  /// the scale is identically 1 by partition of unity.
  static GatingParams identity_init(std::size_t order, std::size_t bins,
                                    bool per_channel = false,
                                    std::size_t channels = 1);
};

struct SerVars {
  engine::Var w_c, b_c;
  std::size_t order = 0;
  bool per_channel = false;
};

SerVars lift(const GatingParams& g);

struct SerRefs {
  engine::ParamRef w_c, b_c;
  std::size_t order = 0;
  bool per_channel = false;
  static SerRefs create(engine::ParameterStore& store, const std::string& prefix,
                        const GatingParams& init);
};
SerVars bind(engine::Graph& g, const SerRefs& refs);

/// All K+1 Bernstein basis values at w in [0,1]; entries are nonnegative and
/// sum to one. Rejects w outside the unit interval.
std::vector<double> bernstein_basis(std::size_t order, double w);

/// Column-wise softmax of a nonnegative S x d amplitude matrix: each
/// channel's frequency profile becomes a distribution over bins.
engine::Var normalize_energy(const engine::Var& amplitudes);
Tensor normalize_energy(const Tensor& amplitudes);

/// Affine gate for one channel profile (length S), shared weights.
std::vector<double> gate_coefficients(const std::vector<double>& a_norm,
                                      const GatingParams& g,
                                      std::size_t channel = 0);

/// Coefficients for every channel at once: (K+1) x d.
engine::Var gate_coefficients_graph(const engine::Var& a_norm,
                                    const SerVars& g);

/// Full unit: amplitude -> softmax -> gate -> Bernstein scale, applied as a
/// real per-bin scalar to both parts (phase is preserved where scale > 0).
spectral::SpectrumVar ser_rebalance(const spectral::SpectrumVar& spec,
                                    const SerVars& g);
spectral::Spectrum ser_rebalance(const spectral::Spectrum& spec,
                                 const GatingParams& g);

/// The real scale factors applied by ser_rebalance, S x d (diagnostics).
Tensor rebalance_scales(const spectral::Spectrum& spec, const GatingParams& g);

}  // namespace specmtm::ser

#endif  // SPECMTM_SER_HPP
