#include "doctest.h"
#include "esum/evaluator.hpp"
#include "esum/harmonic.hpp"
#include "support.hpp"

using namespace esum;
using testing::log_gap;

namespace {

const long kBits = working_bits(60);

Evaluator& ev() { return global_evaluator(); }

}  // namespace

TEST_CASE("harmonic number expansions") {
  Expansion H = ev().symbol_expansion(Sym::H, 1, 24, kBits, 0);
  CHECK(log_gap(H.coef(1, 0), HPReal(1, kBits)) < -60);
  CHECK(log_gap(H.coef(0, 1), HPReal(Rational(1, 2), kBits)) < -60);
  CHECK(log_gap(H.coef(0, 0), gamma_bits(kBits)) < -60);
  // error at k must shrink like k^-25
  double e3 = log_gap(H.eval(1000), HPReal(harmonic(Sym::H, 1000, 1), kBits));
  double e4 = log_gap(H.eval(10000), HPReal(harmonic(Sym::H, 10000, 1), kBits));
  CHECK(e3 < -60);
  CHECK(e4 < e3);

  Expansion h = ev().symbol_expansion(Sym::h, 1, 24, kBits, 0);
  CHECK(log_gap(h.coef(1, 0), HPReal(Rational(1, 2), kBits)) < -60);
  CHECK(log_gap(h.coef(0, 0), ln2_bits(kBits) + gamma_bits(kBits) / 2) < -60);
  CHECK(log_gap(h.eval(2000), HPReal(harmonic(Sym::h, 2000, 1), kBits)) < -60);

  Expansion H2 = ev().symbol_expansion(Sym::H, 2, 24, kBits, 0);
  CHECK(log_gap(H2.coef(0, 0), zeta_bits(2, kBits)) < -60);
  CHECK(log_gap(H2.coef(0, 1), HPReal(-1, kBits)) < -60);
  CHECK(log_gap(H2.eval(3000), HPReal(harmonic(Sym::H, 3000, 2), kBits)) < -60);
}

TEST_CASE("expansion algebra") {
  Expansion H = ev().symbol_expansion(Sym::H, 1, 16, kBits, 0);
  Expansion one = Expansion::constant(HPReal(1, kBits), 16, kBits);
  Expansion p = H * one;
  for (int b = 0; b <= 16; ++b)
    for (int a = 0; a <= H.max_log(); ++a) CHECK(p.coef(a, b) == H.coef(a, b));
  Expansion h2 = ev().symbol_expansion(Sym::h, 2, 16, kBits, 0);
  Expansion x = H * h2, y = h2 * H;
  for (int b = 0; b <= 16; ++b)
    for (int a = 0; a <= x.max_log(); ++a) CHECK(testing::absdiff(x.coef(a, b), y.coef(a, b)) <= 1e-70 * (1 + std::fabs(x.coef(a, b).to_double())));
}

TEST_CASE("reciprocal linear base") {
  Expansion r = Expansion::linear_power(2, Rational(-1), 1, 20, kBits);
  CHECK(log_gap(r.eval(100), HPReal(1, kBits) / 199) < -40);
  Expansion s = Expansion::linear_power(1, Rational(3), 2, 20, kBits);
  // first omitted term: 20 * 3^19 / 500^21 ~ 5e-47
  CHECK(log_gap(s.eval(500), HPReal(1, kBits) / (503L * 503L)) < -46);
}

TEST_CASE("log-zeta tails") {
  TailResult t = log_zeta_tail(0, 2, 50, 60);
  // order 24 at K = 50 leaves about B_24 / 50^25 ~ 3e-38
  HPReal e2 = abs(t.value + HPReal(harmonic(Sym::H, 50, 2), kBits) - zeta_bits(2, kBits));
  CHECK(e2 <= t.error);
  CHECK(t.error.to_double() < 1e-34);  // bound is conservative by a few hundred
  TailResult t3 = log_zeta_tail(0, 3, 1000, 60, 24);
  CHECK(log_gap(t3.value, zeta_bits(3, kBits) - HPReal(harmonic(Sym::H, 1000, 3), kBits)) < -60);
}

TEST_CASE("log-zeta tail against brute force with integral brackets") {
  // sum_{k>10} ln k / k^2 = sum_{k=11}^{N} + R, with R between the integrals of
  // ln x/x^2 from N+1 and from N, i.e. (ln x + 1)/x at those points.
  const long N = 10000000;
  long double s = 0;
  for (long k = N; k > 10; --k) s += std::log(static_cast<long double>(k)) / (static_cast<long double>(k) * k);
  long double lo = (std::log(static_cast<long double>(N + 1)) + 1) / (N + 1);
  long double hi = (std::log(static_cast<long double>(N)) + 1) / N;
  TailResult t = log_zeta_tail(1, 2, 10, 30);
  double v = t.value.to_double();
  CHECK(v > static_cast<double>(s + lo) - 1e-12);
  CHECK(v < static_cast<double>(s + hi) + 1e-12);
}

TEST_CASE("tail_sum") {
  const long K = 100;
  Expansion e = Expansion::monomial(0, 2, HPReal(1, kBits), 24, kBits);
  TailResult a = tail_sum(e, K);
  CHECK(log_gap(a.value, log_zeta_tail(0, 2, K, 60).value) < -60);

  Expansion bad = Expansion::monomial(0, 1, HPReal(1, kBits), 24, kBits);
  CHECK_THROWS_AS(tail_sum(bad, K), DivergenceError);

  // H_k / k^3 at K = 100 against the direct sum to 10^6 plus its own remainder
  Expansion H = ev().symbol_expansion(Sym::H, 1, 24, kBits, 0);
  Expansion g = H * Expansion::monomial(0, 3, HPReal(1, kBits), 24, kBits);
  TailResult t = tail_sum(g, K);
  HPReal direct(0L, kBits), Hk(harmonic(Sym::H, K, 1), kBits);
  const long M = 1000000;
  for (long k = K + 1; k <= M; ++k) {
    Hk += HPReal(1, kBits) / k;
    direct += Hk / k / k / k;
  }
  direct += tail_sum(g, M).value;
  CHECK(abs(direct - t.value) <= t.error + HPReal::pow2(-150, kBits));
}

TEST_CASE("bootstrap constants") {
  auto partial = [](auto term, long K) {
    HPReal s(0L, kBits);
    for (long k = 1; k <= K; ++k) s += term(k);
    return s;
  };
  auto check = [&](auto term, const Expansion& g, const HPReal& want, double digits) {
    Expansion F = partial_sum(g);
    HPReal s1 = partial(term, 1000), s2 = partial(term, 10000);
    BootstrapResult b = bootstrap_constant(s1, 1000, s2, 10000, F);
    CHECK(log_gap(b.constant, want) < -digits);
  };
  const int B = 24;
  check([](long k) { return HPReal(1, kBits) / k; }, Expansion::monomial(0, 1, HPReal(1, kBits), B, kBits),
        gamma_bits(kBits), 55);
  check([](long k) { return HPReal(1, kBits) / (2 * k - 1); }, Expansion::linear_power(2, Rational(-1), 1, B, kBits),
        ln2_bits(kBits) + gamma_bits(kBits) / 2, 55);
  check([](long k) { return HPReal(1, kBits) / k / k; }, Expansion::monomial(0, 2, HPReal(1, kBits), B, kBits),
        zeta_bits(2, kBits), 55);
}
