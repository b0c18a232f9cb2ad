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

#ifndef SPECMTM_MASK_HPP
#define SPECMTM_MASK_HPP

#include <cstdint>
#include <vector>

namespace specmtm::backbone {

/// Random token mask: sorted unique masked positions plus the ratio/seed that
/// produced them.
struct MaskPlan {
  std::vector<std::size_t> masked_indices;  // sorted, unique, < token_count
  std::size_t token_count = 0;
  double ratio = 0.0;
  std::uint64_t seed = 0;

  std::vector<std::size_t> visible_indices() const;
  bool is_masked(std::size_t token) const;
};

/// Uniform sample without replacement of round(ratio * token_count)
/// positions; deterministic given the seed. One mask per sample.
MaskPlan make_mask(std::size_t token_count, double ratio, std::uint64_t seed);

}  // namespace specmtm::backbone

#endif  // SPECMTM_MASK_HPP
