#include "doctest.h"
#include "esum/pslq.hpp"

using namespace esum;

namespace {

HPReal z(long s, long digits) { return zeta_int(s, digits); }

std::vector<Integer> normalized(std::vector<Integer> r) {
  for (const auto& x : r)
    if (x != 0) {
      if (x < 0)
        for (auto& y : r) y = -y;
      break;
    }
  return r;
}

}  // namespace

TEST_CASE("exact dependency") {
  auto o = pslq({z(3, 60) * 2, z(3, 60)}, 50, Integer(1000));
  REQUIRE(o.relation);
  CHECK(normalized(*o.relation) == std::vector<Integer>{1, -2});
}

TEST_CASE("h^3/k^2 against zeta(2)zeta(3) and zeta(5)") {
  EvalConfig c;
  c.digits = 60;
  HPReal s = global_evaluator().evaluate(*parse_descriptor("h^3 / k^2"), c).value;
  auto o = pslq({s, z(2, 60) * z(3, 60), z(5, 60)}, 50, Integer(1) << 20);
  REQUIRE(o.relation);
  CHECK(normalized(*o.relation) == std::vector<Integer>{8, -21, 0});
}

TEST_CASE("negative control") {
  auto o = pslq({z(2, 60), z(3, 60)}, 50, Integer(1000000));
  CHECK_FALSE(o.relation);
}

TEST_CASE("scale invariance and determinism") {
  std::vector<HPReal> x{z(3, 60) * 3, z(3, 60), z(5, 60)};
  auto a = pslq(x, 50, Integer(1000));
  std::vector<HPReal> y;
  for (const auto& v : x) y.push_back(v * 7 / 5);
  auto b = pslq(y, 50, Integer(1000));
  auto c = pslq(x, 50, Integer(1000));
  REQUIRE(a.relation);
  REQUIRE(b.relation);
  CHECK(normalized(*a.relation) == normalized(*b.relation));
  CHECK(*a.relation == *c.relation);
}

TEST_CASE("weight bases") {
  auto b6 = weight_basis(6, default_basis_atoms());
  std::vector<std::string> s;
  for (const auto& e : b6) s.push_back(e.str());
  CHECK(std::find(s.begin(), s.end(), "z6") != s.end());
  CHECK(std::find(s.begin(), s.end(), "z3^2") != s.end());
  CHECK(std::find(s.begin(), s.end(), "z2^3") == s.end());  // collapsed into z6
  CHECK(detection_digits(3) == 56);
}

TEST_CASE("discover closed forms") {
  auto d = parse_descriptor("H / k^2");
  auto r = discover(*d, {parse_expression("z3")});
  REQUIRE(r.found);
  CHECK(r.closed_form == parse_expression("2*z3"));

  auto e = parse_descriptor("h^3 / k^3");
  auto q = discover(*e, {parse_expression("z6"), parse_expression("z3^2")});
  REQUIRE(q.found);
  CHECK(q.closed_form == parse_expression("135/128*z6 + 7/16*z3^2"));
  CHECK(q.residual < 1e-40);
}
