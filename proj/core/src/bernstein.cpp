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

#include "specmtm/bernstein.hpp"

#include <vector>

namespace specmtm {

void bernstein_basis_values(std::size_t order, double w, double* out) {
  const double u = 1.0 - w;
  out[0] = 1.0;
  for (std::size_t n = 1; n <= order; ++n) {
    out[n] = w * out[n - 1];
    for (std::size_t k = n - 1; k > 0; --k) {
      out[k] = w * out[k - 1] + u * out[k];
    }
    out[0] *= u;
  }
}

void bernstein_basis_derivatives(std::size_t order, double w, double* out) {
  if (order == 0) {
    out[0] = 0.0;
    return;
  }
  std::vector<double> lower(order);  // degree K-1 basis
  bernstein_basis_values(order - 1, w, lower.data());
  const double k = static_cast<double>(order);
  for (std::size_t i = 0; i <= order; ++i) {
    const double left = (i > 0) ? lower[i - 1] : 0.0;
    const double right = (i < order) ? lower[i] : 0.0;
    out[i] = k * (left - right);
  }
}

}  // namespace specmtm
