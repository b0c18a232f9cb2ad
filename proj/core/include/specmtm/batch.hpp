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

#ifndef SPECMTM_BATCH_HPP
#define SPECMTM_BATCH_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "specmtm/tensor.hpp"

namespace specmtm {

/// A batch of real-valued sequences: values is N x L x C, labels (when
/// present) are 0-based class indices of length N.
struct TimeSeriesBatch {
  Tensor values;  // shape {N, L, C}
  std::vector<int> labels;
  bool has_labels = false;

  std::size_t count() const { return values.rank() == 3 ? values.shape()[0] : 0; }
  std::size_t length() const { return values.rank() == 3 ? values.shape()[1] : 0; }
  std::size_t channels() const {
    return values.rank() == 3 ? values.shape()[2] : 0;
  }

  /// Sample i as an L x C matrix.
  Tensor sample(std::size_t i) const;
};

}  // namespace specmtm

#endif  // SPECMTM_BATCH_HPP
