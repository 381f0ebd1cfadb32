#include "doctest.h"
#include "esum/expression.hpp"
#include "support.hpp"

using namespace esum;

TEST_CASE("closed forms parse to canonical text") {
  Expr e = parse_expression("7*z3 - 37/8*z4 + 16*l2^3 - 7*l2*z3");
  CHECK(parse_expression(e.str()) == e);
  CHECK(parse_expression("z3*z2*21/8").str() == "21/8*z2*z3");
  CHECK(parse_expression("0").is_zero());
  CHECK(parse_expression("z2 - z2").is_zero());
  CHECK_THROWS(parse_expression("7*zz3"));
  // divergence is a catalog-level rejection, not a syntax error
  Expr d = parse_expression("S[H / k]");
  CHECK_FALSE(validate(*d.items().begin()->second.desc).ok);
}

TEST_CASE("weights") {
  Expr e = parse_expression("21/8*z2*z3 + l2^5 + 3*S[h / k^3]");
  auto w = e.weights();
  CHECK(std::count(w.begin(), w.end(), 5) == 2);
  CHECK(std::count(w.begin(), w.end(), -1) == 1);
}

TEST_CASE("exact items") {
  // F[H / k]@p at p = 3 is H_1 + H_2/2 + H_3/3
  Expr f = parse_expression("F[H / k]@p");
  CHECK(f.is_exact());
  CHECK(eval_exact(f, 3) == Rational(1) + Rational(3, 4) + Rational(11, 18));
  Expr t = parse_expression("2*T[H / k^2] - T[1 / k]");
  CHECK(eval_exact(t, 2) == Rational(3, 4) - Rational(1, 2));
  CHECK(eval_exact(parse_expression("F[1 / k]@p-1"), 1) == 0);
}

TEST_CASE("substitution and algebra") {
  Expr a = parse_expression("S[h^3 / k^3] + z2*S[h / k^3]");
  Expr b = a.substitute("S[h^3 / k^3]", parse_expression("135/128*z6 + 7/16*z3^2"));
  CHECK(b == parse_expression("135/128*z6 + 7/16*z3^2 + z2*S[h / k^3]"));
  Expr s = parse_expression("z2 + z3");
  CHECK(s.pow(2) == parse_expression("z2^2 + 2*z2*z3 + z3^2"));
  CHECK((s - s).is_zero());
}

TEST_CASE("numeric evaluation is linear") {
  EvalConfig c;
  c.digits = 45;
  NumValue x = eval_numeric(parse_expression("z2"), c);
  NumValue y = eval_numeric(parse_expression("S[H / k^2]"), c);
  NumValue z = eval_numeric(parse_expression("3*z2 - 1/2*S[H / k^2]"), c);
  HPReal want = x.value * 3 - y.value / 2;
  CHECK(testing::log_gap(z.value, want) < -42);
  CHECK(z.bound < 1e-40);
  CHECK(eval_numeric(Expr(), c).value.is_zero());
}
