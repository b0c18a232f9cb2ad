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

#ifndef SPECMTM_TEST_HELPERS_HPP
#define SPECMTM_TEST_HELPERS_HPP

#include <cmath>
#include <complex>
#include <vector>

#include "specmtm/rng.hpp"
#include "specmtm/spectral.hpp"
#include "specmtm/tensor.hpp"

namespace specmtm::testing {

inline Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng,
                            double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& x : t.mut()) x = rng.normal(0.0, scale);
  return t;
}

inline double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double x : t.data()) m = std::max(m, std::fabs(x));
  return m;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  return max_abs(sub(a, b));
}

inline double rel_diff(const Tensor& a, const Tensor& b) {
  const double scale = std::max({max_abs(a), max_abs(b), 1e-30});
  return max_abs_diff(a, b) / scale;
}

/// Brute-force O(T^2) transform oracle working directly on std::complex,
/// independent of the twiddle-matrix implementation path.
inline std::vector<std::vector<std::complex<double>>> dft_oracle(
    const Tensor& z) {
  const std::size_t t_len = z.rows(), d = z.cols();
  std::vector<std::vector<std::complex<double>>> out(
      t_len, std::vector<std::complex<double>>(d));
  const double two_pi = 2.0 * std::acos(-1.0);
  for (std::size_t s = 0; s < t_len; ++s) {
    for (std::size_t c = 0; c < d; ++c) {
      std::complex<double> acc = 0.0;
      for (std::size_t t = 0; t < t_len; ++t) {
        const double arg = -two_pi * static_cast<double>(s) *
                           static_cast<double>(t) / static_cast<double>(t_len);
        acc += z(t, c) * std::exp(std::complex<double>(0.0, arg));
      }
      out[s][c] = acc;
    }
  }
  return out;
}

}  // namespace specmtm::testing

#endif  // SPECMTM_TEST_HELPERS_HPP
