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

#ifndef SPECMTM_SPECTRAL_HPP
#define SPECMTM_SPECTRAL_HPP

#include <cstddef>
#include <memory>

#include "specmtm/tensor.hpp"

namespace specmtm::spectral {

/// Complex spectrum of a T×d feature tensor, stored as split real and
/// imaginary parts of identical shape S×d with S = T.
struct Spectrum {
  Tensor re;
  Tensor im;
  std::size_t origin_length = 0;

  std::size_t bins() const { return re.rows(); }
  std::size_t channels() const { return re.cols(); }
};

/// Precomputed twiddle tables for one transform size: cos_mat[s][t] =
/// cos(2*pi*s*t/T) and sin_mat[s][t] = sin(2*pi*s*t/T). Both are symmetric,
/// which is what makes the adjoint come out as the conjugated transform.
struct DftPlan {
  std::size_t length = 0;
  Tensor cos_mat;
  Tensor sin_mat;
};

/// Shared plan for size T, cached per process.
std::shared_ptr<const DftPlan> plan_for(std::size_t length);

/// Full-length transform along the temporal axis, one column per channel:
/// out[s] = sum_t z[t] * exp(-i*2*pi*s*t/T). Unnormalized, S = T bins.
Spectrum dft_forward(const Tensor& z);

/// Inverse transform with the 1/T factor and +i twiddles; keeps the real
/// part. Any imaginary residue is available via dft_inverse_residual.
Tensor dft_inverse(const Spectrum& spec);

/// Imaginary part discarded by dft_inverse; zero for Hermitian spectra.
Tensor dft_inverse_residual(const Spectrum& spec);

/// Entrywise magnitude sqrt(re^2 + im^2).
Tensor amplitude(const Spectrum& spec);

/// Per-channel circular convolution: out[t] = sum_tau k[tau] * z[(t-tau) mod T].
Tensor circular_convolve(const Tensor& kernel, const Tensor& z);

}  // namespace specmtm::spectral

#endif  // SPECMTM_SPECTRAL_HPP
