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

#include "specmtm/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "specmtm/rng.hpp"

namespace specmtm::backbone {

std::vector<std::size_t> MaskPlan::visible_indices() const {
  std::vector<std::size_t> out;
  out.reserve(token_count - masked_indices.size());
  std::size_t next_masked = 0;
  for (std::size_t t = 0; t < token_count; ++t) {
    if (next_masked < masked_indices.size() &&
        masked_indices[next_masked] == t) {
      ++next_masked;
    } else {
      out.push_back(t);
    }
  }
  return out;
}

bool MaskPlan::is_masked(std::size_t token) const {
  return std::binary_search(masked_indices.begin(), masked_indices.end(),
                            token);
}

MaskPlan make_mask(std::size_t token_count, double ratio, std::uint64_t seed) {
  if (ratio < 0.0 || ratio > 1.0) {
    throw std::invalid_argument("make_mask: ratio " + std::to_string(ratio) +
                                " outside [0, 1]");
  }
  const std::size_t target = static_cast<std::size_t>(
      std::lround(ratio * static_cast<double>(token_count)));
  MaskPlan plan;
  plan.token_count = token_count;
  plan.ratio = ratio;
  plan.seed = seed;
  if (target == 0) return plan;

  // Partial Fisher-Yates: the first `target` slots end up a uniform sample
  // without replacement.
  std::vector<std::size_t> pool(token_count);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < target; ++i) {
    const std::size_t j = i + rng.next_below(token_count - i);
    std::swap(pool[i], pool[j]);
  }
  plan.masked_indices.assign(pool.begin(), pool.begin() + target);
  std::sort(plan.masked_indices.begin(), plan.masked_indices.end());
  return plan;
}

}  // namespace specmtm::backbone
