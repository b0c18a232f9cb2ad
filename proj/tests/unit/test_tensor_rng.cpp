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

#include <doctest.h>

#include <stdexcept>

#include "specmtm/rng.hpp"
#include "specmtm/tensor.hpp"
#include "test_helpers.hpp"

using namespace specmtm;

TEST_CASE("tensor shape and data basics") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  t.at(1, 2) = 5.0;
  CHECK(t(1, 2) == 5.0);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("tensor copy-on-write isolates mutation") {
  Tensor a({1, 2}, {1.0, 2.0});
  Tensor b = a;
  b.at(0, 0) = 9.0;
  CHECK(a(0, 0) == 1.0);
  CHECK(b(0, 0) == 9.0);
}

TEST_CASE("matmul agrees with a naive triple loop") {
  Rng rng(1);
  Tensor a = testing::random_tensor({5, 7}, rng);
  Tensor b = testing::random_tensor({7, 4}, rng);
  Tensor got = matmul(a, b);
  Tensor want({5, 4});
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 7; ++k) acc += a(i, k) * b(k, j);
      want.at(i, j) = acc;
    }
  }
  CHECK(testing::max_abs_diff(got, want) < 1e-12);

  // Transpose flags hit the same reference result.
  Tensor got_t = matmul(b, a, true, true);  // (a*b)^T
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(got_t(i, j) == doctest::Approx(want(j, i)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(matmul(a, a), std::invalid_argument);
}

TEST_CASE("rng splits are deterministic and independent") {
  Rng a(42), b(42);
  CHECK(a.next_u64() == b.next_u64());
  Rng c1 = Rng(42).split("mask", 3);
  Rng c2 = Rng(42).split("mask", 3);
  Rng other = Rng(42).split("mask", 4);
  CHECK(c1.next_u64() == c2.next_u64());
  CHECK(Rng(42).split("mask", 3).next_u64() != other.next_u64());
  CHECK(Rng(42).split("init").next_u64() != Rng(42).split("shuffle").next_u64());
}
