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

#include "specmtm/spectral_ops.hpp"

namespace specmtm::spectral {

using engine::Var;

SpectrumVar lift(const Spectrum& spec) {
  return SpectrumVar{engine::constant(spec.re), engine::constant(spec.im),
                     spec.origin_length};
}

SpectrumVar dft_graph(const Var& z) {
  const std::size_t t_len = z.value().rows();
  auto plan = plan_for(t_len);
  Var cos_mat = engine::constant(plan->cos_mat);
  Var sin_mat = engine::constant(plan->sin_mat);
  SpectrumVar out;
  out.re = engine::matmul(cos_mat, z);
  out.im = engine::scale(engine::matmul(sin_mat, z), -1.0);
  out.origin_length = t_len;
  return out;
}

Var idft_real_graph(const SpectrumVar& spec) {
  const std::size_t t_len = spec.re.value().rows();
  auto plan = plan_for(t_len);
  Var cos_mat = engine::constant(plan->cos_mat);
  Var sin_mat = engine::constant(plan->sin_mat);
  Var out = engine::sub(engine::matmul(cos_mat, spec.re),
                        engine::matmul(sin_mat, spec.im));
  return engine::scale(out, 1.0 / static_cast<double>(t_len));
}

Var idft_imag_graph(const SpectrumVar& spec) {
  const std::size_t t_len = spec.re.value().rows();
  auto plan = plan_for(t_len);
  Var cos_mat = engine::constant(plan->cos_mat);
  Var sin_mat = engine::constant(plan->sin_mat);
  Var out = engine::add(engine::matmul(sin_mat, spec.re),
                        engine::matmul(cos_mat, spec.im));
  return engine::scale(out, 1.0 / static_cast<double>(t_len));
}

Var amplitude_graph(const SpectrumVar& spec) {
  return engine::complex_abs(spec.re, spec.im);
}

}  // namespace specmtm::spectral
