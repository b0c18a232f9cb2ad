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

#include "specmtm/cim.hpp"

#include <cmath>
#include <stdexcept>

namespace specmtm::cim {

using engine::Var;
using spectral::SpectrumVar;

ComplexAffineParams ComplexAffineParams::init(std::size_t d, Rng& rng) {
  ComplexAffineParams p;
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  p.w_re = Tensor({d, d});
  p.w_im = Tensor({d, d});
  for (double& x : p.w_re.mut()) x = rng.uniform(-bound, bound);
  for (double& x : p.w_im.mut()) x = rng.uniform(-bound, bound);
  p.b_re = Tensor::full({1, d}, 1.0);
  p.b_im = Tensor({1, d});
  return p;
}

ComplexAffineParams ComplexAffineParams::identity_init(std::size_t d) {
  ComplexAffineParams p;
  p.w_re = Tensor({d, d});
  p.w_im = Tensor({d, d});
  p.b_re = Tensor::full({1, d}, 1.0);
  p.b_im = Tensor({1, d});
  return p;
}

CimVars lift(const ComplexAffineParams& p) {
  return CimVars{engine::constant(p.w_re), engine::constant(p.w_im),
                 engine::constant(p.b_re), engine::constant(p.b_im)};
}

CimRefs CimRefs::create(engine::ParameterStore& store, const std::string& prefix,
                        const ComplexAffineParams& init) {
  CimRefs refs;
  refs.w_re = store.create(prefix + ".w_re", init.w_re);
  refs.w_im = store.create(prefix + ".w_im", init.w_im);
  refs.b_re = store.create(prefix + ".b_re", init.b_re);
  refs.b_im = store.create(prefix + ".b_im", init.b_im);
  return refs;
}

CimVars bind(engine::Graph& g, const CimRefs& refs) {
  return CimVars{g.use(refs.w_re), g.use(refs.w_im), g.use(refs.b_re),
                 g.use(refs.b_im)};
}

SpectrumVar complex_affine(const SpectrumVar& spec, const CimVars& p) {
  const std::size_t d = spec.re.value().cols();
  if (p.w_re.value().rows() != d || p.w_re.value().cols() != d) {
    throw std::invalid_argument("complex_affine: weight shape " +
                                p.w_re.value().shape_str() +
                                " does not match channel count " +
                                std::to_string(d));
  }
  SpectrumVar out;
  out.origin_length = spec.origin_length;
  out.re = engine::add_rowwise(
      engine::sub(engine::matmul(spec.re, p.w_re, false, true),
                  engine::matmul(spec.im, p.w_im, false, true)),
      p.b_re);
  out.im = engine::add_rowwise(
      engine::add(engine::matmul(spec.im, p.w_re, false, true),
                  engine::matmul(spec.re, p.w_im, false, true)),
      p.b_im);
  return out;
}

SpectrumVar modulation_signal(const SpectrumVar& spec, const CimVars& p,
                              Activation act) {
  SpectrumVar pre = complex_affine(spec, p);
  SpectrumVar out;
  out.origin_length = pre.origin_length;
  if (act == Activation::kSplitRelu) {
    out.re = engine::relu(pre.re);
    out.im = engine::relu(pre.im);
  } else {
    out.re = engine::tanh_act(pre.re);
    out.im = engine::tanh_act(pre.im);
  }
  return out;
}

SpectrumVar apply_modulation(const SpectrumVar& m, const SpectrumVar& spec) {
  SpectrumVar out;
  out.origin_length = spec.origin_length;
  out.re = engine::sub(engine::mul(m.re, spec.re), engine::mul(m.im, spec.im));
  out.im = engine::add(engine::mul(m.re, spec.im), engine::mul(m.im, spec.re));
  return out;
}

SpectrumVar cim_modulate(const SpectrumVar& spec, const CimVars& p,
                         Activation act) {
  return apply_modulation(modulation_signal(spec, p, act), spec);
}

spectral::Spectrum complex_affine(const spectral::Spectrum& spec,
                                  const ComplexAffineParams& p) {
  return complex_affine(spectral::lift(spec), lift(p)).detach();
}

spectral::Spectrum modulation_signal(const spectral::Spectrum& spec,
                                     const ComplexAffineParams& p,
                                     Activation act) {
  return modulation_signal(spectral::lift(spec), lift(p), act).detach();
}

spectral::Spectrum cim_modulate(const spectral::Spectrum& spec,
                                const ComplexAffineParams& p, Activation act) {
  return cim_modulate(spectral::lift(spec), lift(p), act).detach();
}

}  // namespace specmtm::cim
