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

#include "specmtm/spectral.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace specmtm::spectral {

namespace {

void require_spectrum(const Spectrum& spec, const std::string& what) {
  require_same_shape(spec.re, spec.im, what);
  require_finite(spec.re, what + " (real part)");
  require_finite(spec.im, what + " (imaginary part)");
}

}  // namespace

std::shared_ptr<const DftPlan> plan_for(std::size_t length) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const DftPlan>> cache;
  if (length == 0) throw std::invalid_argument("dft: zero-length transform");
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(length);
  if (it != cache.end()) return it->second;

  auto plan = std::make_shared<DftPlan>();
  plan->length = length;
  plan->cos_mat = Tensor({length, length});
  plan->sin_mat = Tensor({length, length});
  auto& c = plan->cos_mat.mut();
  auto& s = plan->sin_mat.mut();
  const double w = 2.0 * std::numbers::pi / static_cast<double>(length);
  for (std::size_t i = 0; i < length; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      // s*t mod T keeps the argument small for large T.
      const double arg = w * static_cast<double>((i * j) % length);
      const double cv = std::cos(arg);
      const double sv = std::sin(arg);
      c[i * length + j] = cv;
      c[j * length + i] = cv;
      s[i * length + j] = sv;
      s[j * length + i] = sv;
    }
  }
  cache.emplace(length, plan);
  return plan;
}

Spectrum dft_forward(const Tensor& z) {
  if (z.rank() != 2) {
    throw std::invalid_argument("dft_forward: expected T x d tensor, got " +
                                z.shape_str());
  }
  require_finite(z, "dft_forward input");
  auto plan = plan_for(z.rows());
  Spectrum out;
  out.re = matmul(plan->cos_mat, z);
  out.im = scaled(matmul(plan->sin_mat, z), -1.0);
  out.origin_length = z.rows();
  return out;
}

Tensor dft_inverse(const Spectrum& spec) {
  require_spectrum(spec, "dft_inverse input");
  auto plan = plan_for(spec.bins());
  const double inv_t = 1.0 / static_cast<double>(spec.bins());
  // Re{(1/T) sum_s spec[s] e^{+i 2 pi s t / T}} = (1/T)(C re - S im).
  Tensor out = sub(matmul(plan->cos_mat, spec.re), matmul(plan->sin_mat, spec.im));
  return scaled(out, inv_t);
}

Tensor dft_inverse_residual(const Spectrum& spec) {
  require_spectrum(spec, "dft_inverse input");
  auto plan = plan_for(spec.bins());
  const double inv_t = 1.0 / static_cast<double>(spec.bins());
  Tensor out = add(matmul(plan->sin_mat, spec.re), matmul(plan->cos_mat, spec.im));
  return scaled(out, inv_t);
}

Tensor amplitude(const Spectrum& spec) {
  require_spectrum(spec, "amplitude input");
  Tensor out = spec.re;
  auto& o = out.mut();
  const auto& im = spec.im.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    o[i] = std::hypot(o[i], im[i]);
  }
  return out;
}

Tensor circular_convolve(const Tensor& kernel, const Tensor& z) {
  if (kernel.rank() != 2 || z.rank() != 2) {
    throw std::invalid_argument("circular_convolve: expected 2-D operands");
  }
  require_same_shape(kernel, z, "circular_convolve");
  const std::size_t t_len = z.rows();
  const std::size_t d = z.cols();
  Tensor out({t_len, d});
  auto& o = out.mut();
  const auto& k = kernel.data();
  const auto& x = z.data();
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t tau = 0; tau < t_len; ++tau) {
      const std::size_t src = (t + t_len - tau) % t_len;
      for (std::size_t c = 0; c < d; ++c) {
        o[t * d + c] += k[tau * d + c] * x[src * d + c];
      }
    }
  }
  return out;
}

}  // namespace specmtm::spectral
