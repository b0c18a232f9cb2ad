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

#ifndef SPECMTM_SPECTRAL_OPS_HPP
#define SPECMTM_SPECTRAL_OPS_HPP

#include "specmtm/autodiff.hpp"
#include "specmtm/spectral.hpp"

namespace specmtm::spectral {

/// Split complex spectrum living on the graph.
struct SpectrumVar {
  engine::Var re;
  engine::Var im;
  std::size_t origin_length = 0;

  Spectrum detach() const {
    return Spectrum{re.value(), im.value(), origin_length};
  }
};

SpectrumVar lift(const Spectrum& spec);

/// Graph version of dft_forward. The transform is a pair of constant matrix
/// products, so its adjoint (the conjugated transform without 1/T) falls out
/// of the matmul backward.
SpectrumVar dft_graph(const engine::Var& z);
engine::Var idft_real_graph(const SpectrumVar& spec);
engine::Var idft_imag_graph(const SpectrumVar& spec);
engine::Var amplitude_graph(const SpectrumVar& spec);

}  // namespace specmtm::spectral

#endif  // SPECMTM_SPECTRAL_OPS_HPP
