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

#ifndef SPECMTM_RNG_HPP
#define SPECMTM_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace specmtm {

/// Splittable deterministic generator. One root seed drives all randomness;
/// `split(tag)` / `split(tag, index)` derive independent child streams so
/// masking, init and shuffling stay reproducible regardless of evaluation
/// order or worker count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  Rng split(std::string_view tag) const;
  Rng split(std::string_view tag, std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64();
  double uniform(double lo, double hi);
  double normal(double mean, double stddev);
  /// Uniform integer in [0, bound).
  std::uint64_t next_below(std::uint64_t bound);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace specmtm

#endif  // SPECMTM_RNG_HPP
