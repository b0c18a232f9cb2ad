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

#include <cmath>
#include <limits>
#include <stdexcept>

#include "specmtm/spectral.hpp"
#include "test_helpers.hpp"

using namespace specmtm;
using spectral::Spectrum;

TEST_CASE("impulse has a flat spectrum") {
  Tensor z({4, 1}, {1.0, 0.0, 0.0, 0.0});
  Spectrum spec = spectral::dft_forward(z);
  for (std::size_t s = 0; s < 4; ++s) {
    CHECK(spec.re(s, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(spec.im(s, 0) == doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("constant series concentrates at the zero bin") {
  const double c = 2.5;
  Tensor z({4, 1}, {c, c, c, c});
  Spectrum spec = spectral::dft_forward(z);
  CHECK(spec.re(0, 0) == doctest::Approx(4.0 * c));
  for (std::size_t s = 1; s < 4; ++s) {
    CHECK(std::fabs(spec.re(s, 0)) < 1e-12);
    CHECK(std::fabs(spec.im(s, 0)) < 1e-12);
  }
}

TEST_CASE("forward transform matches the direct summation oracle") {
  Rng rng(7);
  Tensor z = testing::random_tensor({128, 16}, rng);
  Spectrum spec = spectral::dft_forward(z);
  auto oracle = testing::dft_oracle(z);
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t s = 0; s < 128; ++s) {
    for (std::size_t c = 0; c < 16; ++c) {
      scale = std::max(scale, std::abs(oracle[s][c]));
      worst = std::max(worst, std::fabs(spec.re(s, c) - oracle[s][c].real()));
      worst = std::max(worst, std::fabs(spec.im(s, c) - oracle[s][c].imag()));
    }
  }
  CHECK(worst / scale <= 1e-10);
}

TEST_CASE("inverse transform rebuilds the series") {
  Rng rng(8);
  Tensor z = testing::random_tensor({128, 3}, rng);
  Tensor back = spectral::dft_inverse(spectral::dft_forward(z));
  CHECK(testing::rel_diff(back, z) <= 1e-10);
  // Real input leaves no imaginary residue.
  Tensor residue = spectral::dft_inverse_residual(spectral::dft_forward(z));
  CHECK(testing::max_abs(residue) < 1e-10);
}

TEST_CASE("DC-only spectrum inverts to a constant series") {
  const std::size_t t_len = 8;
  const double c = -1.25;
  Spectrum spec;
  spec.re = Tensor({t_len, 1});
  spec.im = Tensor({t_len, 1});
  spec.re.at(0, 0) = static_cast<double>(t_len) * c;
  spec.origin_length = t_len;
  Tensor series = spectral::dft_inverse(spec);
  for (std::size_t t = 0; t < t_len; ++t) {
    CHECK(series(t, 0) == doctest::Approx(c).epsilon(1e-12));
  }
}

TEST_CASE("zero spectrum inverts to zero") {
  Spectrum spec{Tensor({6, 2}), Tensor({6, 2}), 6};
  CHECK(testing::max_abs(spectral::dft_inverse(spec)) == 0.0);
}

TEST_CASE("amplitude") {
  SUBCASE("3-4-5 triangle") {
    Spectrum spec{Tensor({1, 1}, {3.0}), Tensor({1, 1}, {4.0}), 1};
    CHECK(spectral::amplitude(spec)(0, 0) == doctest::Approx(5.0));
  }
  SUBCASE("zero spectrum") {
    Spectrum spec{Tensor({3, 2}), Tensor({3, 2}), 3};
    CHECK(testing::max_abs(spectral::amplitude(spec)) == 0.0);
  }
  SUBCASE("random spectrum matches the entrywise oracle") {
    Rng rng(9);
    Spectrum spec{testing::random_tensor({17, 5}, rng),
                  testing::random_tensor({17, 5}, rng), 17};
    Tensor amp = spectral::amplitude(spec);
    for (std::size_t s = 0; s < 17; ++s) {
      for (std::size_t c = 0; c < 5; ++c) {
        const double want =
            std::sqrt(spec.re(s, c) * spec.re(s, c) + spec.im(s, c) * spec.im(s, c));
        CHECK(amp(s, c) == doctest::Approx(want).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("circular convolution") {
  Rng rng(10);
  SUBCASE("identity kernel") {
    Tensor k({4, 2});
    k.at(0, 0) = 1.0;
    k.at(0, 1) = 1.0;
    Tensor z = testing::random_tensor({4, 2}, rng);
    CHECK(testing::max_abs_diff(spectral::circular_convolve(k, z), z) < 1e-15);
  }
  SUBCASE("shift kernel rotates the series") {
    Tensor k({4, 1});
    k.at(1, 0) = 1.0;
    Tensor z({4, 1}, {1.0, 2.0, 3.0, 4.0});
    Tensor out = spectral::circular_convolve(k, z);
    CHECK(out(0, 0) == doctest::Approx(4.0));
    CHECK(out(1, 0) == doctest::Approx(1.0));
    CHECK(out(2, 0) == doctest::Approx(2.0));
    CHECK(out(3, 0) == doctest::Approx(3.0));
  }
  SUBCASE("shape mismatch is rejected") {
    CHECK_THROWS_AS(
        spectral::circular_convolve(Tensor({4, 1}), Tensor({5, 1})),
        std::invalid_argument);
  }
  SUBCASE("transform of a convolution is the product of transforms") {
    Tensor k = testing::random_tensor({64, 2}, rng);
    Tensor z = testing::random_tensor({64, 2}, rng);
    Spectrum conv = spectral::dft_forward(spectral::circular_convolve(k, z));
    Spectrum fk = spectral::dft_forward(k);
    Spectrum fz = spectral::dft_forward(z);
    Tensor prod_re = sub(hadamard(fk.re, fz.re), hadamard(fk.im, fz.im));
    Tensor prod_im = add(hadamard(fk.re, fz.im), hadamard(fk.im, fz.re));
    CHECK(testing::rel_diff(conv.re, prod_re) <= 1e-10);
    CHECK(testing::rel_diff(conv.im, prod_im) <= 1e-10);
  }
}

TEST_CASE("energy identity holds under the 1/T convention") {
  Rng rng(11);
  for (std::size_t t_len : {4u, 16u, 64u, 128u}) {
    Tensor z = testing::random_tensor({t_len, 2}, rng);
    Spectrum spec = spectral::dft_forward(z);
    const double time_energy = dot_all(z, z);
    const double freq_energy =
        (dot_all(spec.re, spec.re) + dot_all(spec.im, spec.im)) /
        static_cast<double>(t_len);
    CHECK(std::fabs(time_energy - freq_energy) / time_energy <= 1e-10);
  }
}

TEST_CASE("hermitian symmetry for real input") {
  Rng rng(12);
  const std::size_t t_len = 33;
  Spectrum spec = spectral::dft_forward(testing::random_tensor({t_len, 2}, rng));
  for (std::size_t s = 1; s < t_len; ++s) {
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(spec.re(s, c) == doctest::Approx(spec.re(t_len - s, c)).epsilon(1e-9));
      CHECK(spec.im(s, c) == doctest::Approx(-spec.im(t_len - s, c)).epsilon(1e-9));
    }
  }
}

TEST_CASE("non-finite inputs are rejected with the offending index") {
  Tensor z({2, 2}, {1.0, 2.0, std::numeric_limits<double>::quiet_NaN(), 4.0});
  CHECK_THROWS_WITH_AS(spectral::dft_forward(z),
                       doctest::Contains("(1,0)"), std::invalid_argument);
  Spectrum bad{Tensor({1, 1}, {std::numeric_limits<double>::infinity()}),
               Tensor({1, 1}), 1};
  CHECK_THROWS_AS(spectral::dft_inverse(bad), std::invalid_argument);
  CHECK_THROWS_AS(spectral::amplitude(bad), std::invalid_argument);
}
