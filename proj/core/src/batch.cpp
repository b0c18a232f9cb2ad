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

#include "specmtm/batch.hpp"

#include <stdexcept>

namespace specmtm {

Tensor TimeSeriesBatch::sample(std::size_t i) const {
  if (values.rank() != 3) {
    throw std::logic_error("TimeSeriesBatch: values must be N x L x C");
  }
  const std::size_t n = values.shape()[0];
  const std::size_t l = values.shape()[1];
  const std::size_t c = values.shape()[2];
  if (i >= n) throw std::out_of_range("TimeSeriesBatch: sample index");
  Tensor out({l, c});
  auto& o = out.mut();
  const auto& d = values.data();
  const std::size_t base = i * l * c;
  for (std::size_t k = 0; k < l * c; ++k) o[k] = d[base + k];
  return out;
}

}  // namespace specmtm
