#include "doctest.h"
#include "esum/harmonic.hpp"

using namespace esum;

TEST_CASE("small harmonic numbers") {
  CHECK(harmonic(Sym::H, 4, 1) == Rational(25, 12));
  CHECK(harmonic(Sym::h, 3, 1) == Rational(23, 15));
  CHECK(harmonic(Sym::H, 2, 2) == Rational(5, 4));
  CHECK(harmonic(Sym::A, 2, 1) == Rational(1, 2));
  CHECK(harmonic(Sym::H, 0, 3) == 0);
  CHECK(harmonic(Sym::h, 0, 1) == 0);
}

TEST_CASE("telescoping up to k = 500") {
  for (int n = 1; n <= 4; ++n) {
    for (long k = 1; k <= 500; ++k) {
      Rational kk(k), odd(2 * k - 1);
      Rational dH = harmonic(Sym::H, k, n) - harmonic(Sym::H, k - 1, n);
      Rational dh = harmonic(Sym::h, k, n) - harmonic(Sym::h, k - 1, n);
      Rational pk = 1, po = 1;
      for (int i = 0; i < n; ++i) pk *= kk, po *= odd;
      REQUIRE(dH == 1 / pk);
      REQUIRE(dh == 1 / po);
    }
  }
}

TEST_CASE("h_k = H_2k - H_k / 2") {
  for (long k = 1; k <= 500; ++k) REQUIRE(harmonic(Sym::h, k, 1) == harmonic(Sym::H, 2 * k, 1) - harmonic(Sym::H, k, 1) / 2);
}

TEST_CASE("cache grows on demand and keeps references") {
  HarmonicCache c;
  const Rational& a = c.get(Sym::H, 10, 2);
  c.get(Sym::H, 2000, 2);
  CHECK(c.max_index(Sym::H, 2) >= 2000);
  CHECK(a == harmonic(Sym::H, 10, 2));
}

TEST_CASE("H_500 is exact") {
  // 217 digits, from Python's fractions
  CHECK(harmonic(Sym::H, 500, 1).get_num().get_str().size() == 217);
}
