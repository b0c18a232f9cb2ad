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

#ifndef SPECMTM_BERNSTEIN_HPP
#define SPECMTM_BERNSTEIN_HPP

#include <cstddef>
#include <vector>

namespace specmtm {

/// All K+1 degree-K Bernstein basis values at w, via the de Casteljau-style
/// recurrence (no explicit binomials, stable for the supported orders).
/// `out` must hold K+1 entries. w must already be inside [0,1].
void bernstein_basis_values(std::size_t order, double w, double* out);

/// Derivatives d/dw B_k^K(w) = K * (B_{k-1}^{K-1}(w) - B_k^{K-1}(w)).
void bernstein_basis_derivatives(std::size_t order, double w, double* out);

}  // namespace specmtm

#endif  // SPECMTM_BERNSTEIN_HPP
