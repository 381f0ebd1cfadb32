#include "esum/hpreal.hpp"

#include <cmath>
#include <cstdlib>
#include <vector>

namespace esum {

long digits_to_bits(long digits) {
  return static_cast<long>(std::ceil(digits * 3.3219280948873623)) + 8;
}

long bits_to_digits(long bits) { return static_cast<long>(std::floor(bits * 0.30102999566398120)); }

long working_bits(long digits) { return digits_to_bits(digits + kGuardDigits); }

HPReal::HPReal() { mpfr_init2(v_, 64); mpfr_set_zero(v_, 1); }

HPReal::HPReal(long prec_bits) { mpfr_init2(v_, prec_bits); mpfr_set_zero(v_, 1); }

HPReal::HPReal(long v, long prec_bits) { mpfr_init2(v_, prec_bits); mpfr_set_si(v_, v, MPFR_RNDN); }

HPReal::HPReal(const Rational& q, long prec_bits) {
  mpfr_init2(v_, prec_bits);
  mpfr_set_q(v_, q.get_mpq_t(), MPFR_RNDN);
}

HPReal::HPReal(const Integer& z, long prec_bits) {
  mpfr_init2(v_, prec_bits);
  mpfr_set_z(v_, z.get_mpz_t(), MPFR_RNDN);
}

HPReal::HPReal(const HPReal& o) { mpfr_init2(v_, o.prec()); mpfr_set(v_, o.v_, MPFR_RNDN); }

HPReal::HPReal(HPReal&& o) noexcept {
  mpfr_init2(v_, MPFR_PREC_MIN);
  mpfr_swap(v_, o.v_);
}

HPReal::~HPReal() { mpfr_clear(v_); }

HPReal& HPReal::operator=(const HPReal& o) {
  if (this != &o) {
    mpfr_set_prec(v_, o.prec());
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  return *this;
}

HPReal& HPReal::operator=(HPReal&& o) noexcept {
  mpfr_swap(v_, o.v_);
  return *this;
}

HPReal& HPReal::operator=(long v) {
  mpfr_set_si(v_, v, MPFR_RNDN);
  return *this;
}

HPReal HPReal::parse(const std::string& s, long prec_bits) {
  HPReal r(prec_bits);
  if (mpfr_set_str(r.v_, s.c_str(), 10, MPFR_RNDN) != 0) throw std::invalid_argument("bad number: " + s);
  return r;
}

HPReal HPReal::pow2(long e, long prec_bits) {
  HPReal r(1, prec_bits);
  mpfr_mul_2si(r.v_, r.v_, e, MPFR_RNDN);
  return r;
}

HPReal HPReal::with_prec(long bits) const {
  HPReal r(bits);
  mpfr_set(r.v_, v_, MPFR_RNDN);
  return r;
}

double HPReal::log10_abs() const {
  if (mpfr_zero_p(v_)) return -INFINITY;
  long e = 0;
  double m = mpfr_get_d_2exp(&e, v_, MPFR_RNDN);
  return std::log10(std::fabs(m)) + e * 0.30102999566398120;
}

std::string HPReal::to_string(int digits) const {
  if (digits < 1) digits = 1;
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*Re", digits - 1, v_);
  std::string s(buf);
  mpfr_free_str(buf);
  return s;
}

static long pmin(const HPReal& a, const HPReal& b) { return std::min(a.prec(), b.prec()); }

HPReal& HPReal::operator+=(const HPReal& o) { mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
HPReal& HPReal::operator-=(const HPReal& o) { mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
HPReal& HPReal::operator*=(const HPReal& o) { mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }
HPReal& HPReal::operator/=(const HPReal& o) { mpfr_div(v_, v_, o.v_, MPFR_RNDN); return *this; }
HPReal& HPReal::operator*=(long o) { mpfr_mul_si(v_, v_, o, MPFR_RNDN); return *this; }
HPReal& HPReal::operator/=(long o) { mpfr_div_si(v_, v_, o, MPFR_RNDN); return *this; }

HPReal HPReal::operator-() const {
  HPReal r(prec());
  mpfr_neg(r.v_, v_, MPFR_RNDN);
  return r;
}

HPReal operator+(const HPReal& a, const HPReal& b) {
  HPReal r(pmin(a, b));
  mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}
HPReal operator-(const HPReal& a, const HPReal& b) {
  HPReal r(pmin(a, b));
  mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}
HPReal operator*(const HPReal& a, const HPReal& b) {
  HPReal r(pmin(a, b));
  mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}
HPReal operator/(const HPReal& a, const HPReal& b) {
  HPReal r(pmin(a, b));
  mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}
HPReal operator*(const HPReal& a, long b) {
  HPReal r(a.prec());
  mpfr_mul_si(r.v_, a.v_, b, MPFR_RNDN);
  return r;
}
HPReal operator/(const HPReal& a, long b) {
  HPReal r(a.prec());
  mpfr_div_si(r.v_, a.v_, b, MPFR_RNDN);
  return r;
}

HPReal abs(const HPReal& x) {
  HPReal r(x.prec());
  mpfr_abs(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}
HPReal sqrt(const HPReal& x) {
  HPReal r(x.prec());
  mpfr_sqrt(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}
HPReal log(const HPReal& x) {
  HPReal r(x.prec());
  mpfr_log(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}
HPReal exp(const HPReal& x) {
  HPReal r(x.prec());
  mpfr_exp(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}
HPReal pow(const HPReal& x, long n) {
  HPReal r(x.prec());
  mpfr_pow_si(r.raw(), x.raw(), n, MPFR_RNDN);
  return r;
}
HPReal max(const HPReal& a, const HPReal& b) { return a < b ? b : a; }

HPReal ten_pow(long e, long prec_bits) {
  HPReal r(10, prec_bits);
  mpfr_pow_si(r.raw(), r.raw(), e, MPFR_RNDN);
  return r;
}

Integer round_to_integer(const HPReal& x) {
  Integer z;
  mpfr_get_z(z.get_mpz_t(), x.raw(), MPFR_RNDN);
  return z;
}

HPReal pi_bits(long bits) {
  HPReal r(bits);
  mpfr_const_pi(r.raw(), MPFR_RNDN);
  return r;
}
HPReal ln2_bits(long bits) {
  HPReal r(bits);
  mpfr_const_log2(r.raw(), MPFR_RNDN);
  return r;
}
HPReal gamma_bits(long bits) {
  HPReal r(bits);
  mpfr_const_euler(r.raw(), MPFR_RNDN);
  return r;
}
HPReal zeta_bits(long s, long bits) {
  if (s <= 1) throw DomainError("zeta(s) requires integer s >= 2");
  HPReal r(bits);
  mpfr_zeta_ui(r.raw(), static_cast<unsigned long>(s), MPFR_RNDN);
  return r;
}

HPReal polylog_bits(long s, const Rational& x, long bits) {
  if (s < 1) throw DomainError("polylog order must be >= 1");
  if (abs(x) * 2 > 1) throw DomainError("polylog argument must satisfy |x| <= 1/2");
  HPReal r(bits);
  if (x == 0) return r;
  const long wb = bits + 32;
  HPReal xv(x, wb), term(xv), sum(wb), t(wb);
  // Stop once |x|^N / N^s < 2^-(bits+16); with |x| <= 1/2 the omitted
  // tail is at most twice that term.
  const double lx = -std::log2(std::fabs(mpq_get_d(x.get_mpq_t())));
  long n_max = 1;
  while (n_max * lx + s * std::log2(static_cast<double>(n_max)) < bits + 16) ++n_max;
  for (long k = 1; k <= n_max; ++k) {
    mpfr_set(t.raw(), term.raw(), MPFR_RNDN);
    for (long j = 0; j < s; ++j) mpfr_div_ui(t.raw(), t.raw(), static_cast<unsigned long>(k), MPFR_RNDN);
    mpfr_add(sum.raw(), sum.raw(), t.raw(), MPFR_RNDN);
    mpfr_mul(term.raw(), term.raw(), xv.raw(), MPFR_RNDN);
  }
  mpfr_set(r.raw(), sum.raw(), MPFR_RNDN);
  return r;
}

HPReal pi(long digits) {
  if (digits < 10) throw DomainError("precision must be >= 10 digits");
  return pi_bits(working_bits(digits));
}
HPReal ln2(long digits) {
  if (digits < 10) throw DomainError("precision must be >= 10 digits");
  return ln2_bits(working_bits(digits));
}
HPReal euler_gamma(long digits) {
  if (digits < 10) throw DomainError("precision must be >= 10 digits");
  return gamma_bits(working_bits(digits));
}
HPReal zeta_int(long s, long digits) {
  if (s <= 1) throw DomainError("zeta(s) has a pole at s=1 and is unsupported for s<1");
  if (digits < 10) throw DomainError("precision must be >= 10 digits");
  return zeta_bits(s, working_bits(digits));
}
HPReal polylog(long s, const Rational& x, long digits) {
  if (digits < 10) throw DomainError("precision must be >= 10 digits");
  return polylog_bits(s, x, working_bits(digits));
}

}  // namespace esum
