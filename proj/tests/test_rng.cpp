// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Determinism and distribution checks for the splittable generator.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dpmimo/rng.hpp"

using dpmimo::Rng;

TEST_CASE("rng: identical seeds give identical streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: different seeds diverge") {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 64; ++i) same += a.next_u64() == b.next_u64();
  REQUIRE(same == 0);
}

TEST_CASE("rng: child streams do not depend on parent consumption") {
  Rng fresh(7);
  Rng used(7);
  for (int i = 0; i < 123; ++i) used.next_u64();  // burn parent state
  Rng c1 = fresh.child(5);
  Rng c2 = used.child(5);
  for (int i = 0; i < 100; ++i) REQUIRE(c1.next_u64() == c2.next_u64());
}

TEST_CASE("rng: distinct child keys give distinct streams") {
  Rng root(7);
  Rng a = root.child(1), b = root.child(2);
  int same = 0;
  for (int i = 0; i < 64; ++i) same += a.next_u64() == b.next_u64();
  REQUIRE(same == 0);
  // Nested children differ from flat ones too.
  Rng c = root.child(1).child(2);
  Rng d = root.child(2).child(1);
  REQUIRE(c.next_u64() != d.next_u64());
}

TEST_CASE("rng: uniform lies in [0, 1) and fills the range") {
  Rng r(3);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  REQUIRE(lo < 0.01);
  REQUIRE(hi > 0.99);
}

TEST_CASE("rng: uniform_index stays in range and covers all values") {
  Rng r(11);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto idx = r.uniform_index(5);
    REQUIRE(idx < 5);
    ++counts[static_cast<std::size_t>(idx)];
  }
  for (int c : counts) REQUIRE(c > 800);
}

TEST_CASE("rng: normal moments") {
  Rng r(17);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  REQUIRE(std::abs(mean) < 0.01);
  REQUIRE(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("rng: complex normal has unit power, circular symmetry") {
  Rng r(19);
  const int n = 100000;
  double p = 0.0;
  std::complex<double> mean{0.0, 0.0}, pseudo{0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    const auto z = r.complex_normal();
    p += std::norm(z);
    mean += z;
    pseudo += z * z;  // E[z^2] = 0 for circular symmetry
  }
  REQUIRE(std::abs(p / n - 1.0) < 0.02);
  REQUIRE(std::abs(mean / static_cast<double>(n)) < 0.01);
  REQUIRE(std::abs(pseudo / static_cast<double>(n)) < 0.02);
}
