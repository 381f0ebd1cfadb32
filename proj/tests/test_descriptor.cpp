#include <random>

#include "doctest.h"
#include "esum/descriptor.hpp"
#include "esum/evaluator.hpp"

using namespace esum;

TEST_CASE("exact terms") {
  CHECK(term_exact(*parse_descriptor("H^3 / k^2"), 2) == Rational(27, 32));
  CHECK(term_exact(*parse_descriptor("h^3 / k (2k-1)"), 1) == 1);
  CHECK(term_exact(*parse_descriptor("H / k (k+p)"), 3, 1) == Rational(11, 72));
  CHECK(term_exact(*parse_descriptor("alt H / k^2"), 2) == Rational(-3, 8));
  CHECK(term_exact(*parse_descriptor("H@k-1 / k^2"), 1) == 0);
  CHECK(term_exact(*parse_descriptor("1 / (k-p) k"), 2, 2) == 0);  // k = p term omitted
  CHECK_THROWS_AS(term_exact(*parse_descriptor("H / k (k+p)"), 3), std::invalid_argument);
}

TEST_CASE("finite inner sums") {
  // sum_{k<=2} H_k/k^2 * sum_{i<=k} 1/i = 1 + (3/2)(3/2)/4
  auto d = parse_descriptor("H {1 / k}@k / k^2");
  CHECK(partial_exact(*d, 2) == Rational(1) + Rational(9, 16));
  auto e = parse_descriptor("{H / k^2}@k-1 / k^3");
  CHECK(term_exact(*e, 1) == 0);
  CHECK(term_exact(*e, 2) == Rational(1, 8));
}

TEST_CASE("convergence certificate") {
  CHECK_FALSE(validate(*parse_descriptor("H / k")).ok);
  CHECK(validate(*parse_descriptor("alt H^3 / k^3")).ok);
  CHECK(validate(*parse_descriptor("H^3 / k (2k-1)")).ok);
  CHECK(validate(*parse_descriptor("alt H / k")).ok);
  CHECK_FALSE(validate(*parse_descriptor("{H / k^2}@inf / k^2")).ok);  // uncoupled: write a product
  CHECK(validate(*parse_descriptor("h {H / k (k+p)}@inf / (2k-1)")).ok);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_descriptor("H / (3q+1)"), ParseError);
  CHECK_THROWS_AS(parse_descriptor("H[0] / k^2"), ParseError);
  CHECK_THROWS_AS(parse_descriptor("{H / k^2 / k"), ParseError);
  CHECK_THROWS_AS(parse_descriptor(""), ParseError);
}

TEST_CASE("canonical text round trips") {
  for (const char* s : {"H^3 / k (2k-1)", "alt A^2 A[2] / k^2", "h[2]@k-1 H / (2k+1)^2", "h {H / k (2k+2p-1)}@inf / k",
                        "H {h / (2k-1)^2}@k-1 / k (2k-1)", "k / (k+p)^3", "H[2] {1 / k (2k-1)}@k / (2k-1)^2"}) {
    auto d = parse_descriptor(s);
    CHECK(parse_descriptor(d->str())->str() == d->str());
  }
  CHECK(parse_descriptor("H^3 / (2k-1) k")->str() == parse_descriptor("H^3 / k (2k-1)")->str());
}

TEST_CASE("terms multiply over factor concatenation") {
  auto a = parse_descriptor("H^2 / k");
  auto b = parse_descriptor("h[2] / (2k-1)^2");
  auto ab = multiply(*a, *b);
  for (long k = 1; k <= 40; ++k) REQUIRE(term_exact(ab, k) == term_exact(*a, k) * term_exact(*b, k));
}

TEST_CASE("exact terms match floating tables") {
  auto d = parse_descriptor("H^2 h[3] / k (2k-1)^2");
  const long bits = 256;
  NumericTables tab(bits);
  auto H = tab.get(Sym::H, 1, 10000);
  auto h3 = tab.get(Sym::h, 3, 10000);
  std::mt19937 rng(7);
  for (int i = 0; i < 50; ++i) {
    long k = std::uniform_int_distribution<long>(1, 10000)(rng);
    HPReal f = (*H)[k] * (*H)[k] * (*h3)[k] / k / (2 * k - 1) / (2 * k - 1);
    HPReal e(term_exact(*d, k), bits);
    REQUIRE((abs(f - e) / abs(e)).log10_abs() < -70);
  }
}
