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

#include "specmtm/ser.hpp"

#include <stdexcept>

#include "specmtm/bernstein.hpp"

namespace specmtm::ser {

using engine::Var;
using spectral::SpectrumVar;

GatingParams GatingParams::identity_init(std::size_t order, std::size_t bins,
                                         bool per_channel,
                                         std::size_t channels) {
  if (order < 1) throw std::invalid_argument("GatingParams: order must be >= 1");
  GatingParams g;
  g.order = order;
  g.per_channel = per_channel;
  const std::size_t rows =
      per_channel ? channels * (order + 1) : (order + 1);
  g.w_c = Tensor({rows, bins});
  g.b_c = Tensor::full({order + 1, 1}, 1.0);
  return g;
}

SerVars lift(const GatingParams& g) {
  return SerVars{engine::constant(g.w_c), engine::constant(g.b_c), g.order,
                 g.per_channel};
}

SerRefs SerRefs::create(engine::ParameterStore& store, const std::string& prefix,
                        const GatingParams& init) {
  SerRefs refs;
  refs.w_c = store.create(prefix + ".w_c", init.w_c);
  refs.b_c = store.create(prefix + ".b_c", init.b_c);
  refs.order = init.order;
  refs.per_channel = init.per_channel;
  return refs;
}

SerVars bind(engine::Graph& g, const SerRefs& refs) {
  return SerVars{g.use(refs.w_c), g.use(refs.b_c), refs.order,
                 refs.per_channel};
}

std::vector<double> bernstein_basis(std::size_t order, double w) {
  if (!(w >= 0.0 && w <= 1.0)) {
    throw std::invalid_argument("bernstein_basis: argument " +
                                std::to_string(w) + " outside [0, 1]");
  }
  std::vector<double> out(order + 1);
  bernstein_basis_values(order, w, out.data());
  return out;
}

Var normalize_energy(const Var& amplitudes) {
  return engine::softmax_cols(amplitudes);
}

Tensor normalize_energy(const Tensor& amplitudes) {
  require_finite(amplitudes, "normalize_energy input");
  return normalize_energy(engine::constant(amplitudes)).value();
}

std::vector<double> gate_coefficients(const std::vector<double>& a_norm,
                                      const GatingParams& g,
                                      std::size_t channel) {
  const std::size_t bins = g.w_c.cols();
  if (a_norm.size() != bins) {
    throw std::invalid_argument("gate_coefficients: profile length " +
                                std::to_string(a_norm.size()) +
                                " != gate width " + std::to_string(bins));
  }
  const std::size_t kc = g.coeff_count();
  const std::size_t row0 = g.per_channel ? channel * kc : 0;
  std::vector<double> theta(kc);
  const auto& w = g.w_c.data();
  const auto& b = g.b_c.data();
  for (std::size_t k = 0; k < kc; ++k) {
    double acc = b[k];
    const double* row = w.data() + (row0 + k) * bins;
    for (std::size_t s = 0; s < bins; ++s) acc += row[s] * a_norm[s];
    theta[k] = acc;
  }
  return theta;
}

Var gate_coefficients_graph(const Var& a_norm, const SerVars& g) {
  Var theta;
  if (g.per_channel) {
    theta = engine::per_channel_gate(g.w_c, a_norm, g.order + 1);
  } else {
    theta = engine::matmul(g.w_c, a_norm);
  }
  return engine::add_colwise(theta, g.b_c);
}

SpectrumVar ser_rebalance(const SpectrumVar& spec, const SerVars& g) {
  Var amp = spectral::amplitude_graph(spec);
  Var a_norm = normalize_energy(amp);
  Var theta = gate_coefficients_graph(a_norm, g);
  Var scales = engine::bernstein_mix(theta, a_norm);
  SpectrumVar out;
  out.origin_length = spec.origin_length;
  out.re = engine::mul(scales, spec.re);
  out.im = engine::mul(scales, spec.im);
  return out;
}

spectral::Spectrum ser_rebalance(const spectral::Spectrum& spec,
                                 const GatingParams& g) {
  return ser_rebalance(spectral::lift(spec), lift(g)).detach();
}

Tensor rebalance_scales(const spectral::Spectrum& spec, const GatingParams& g) {
  SpectrumVar sv = spectral::lift(spec);
  SerVars gv = lift(g);
  Var amp = spectral::amplitude_graph(sv);
  Var a_norm = normalize_energy(amp);
  Var theta = gate_coefficients_graph(a_norm, gv);
  return engine::bernstein_mix(theta, a_norm).value();
}

}  // namespace specmtm::ser
