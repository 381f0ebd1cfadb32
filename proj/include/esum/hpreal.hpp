#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <stdexcept>
#include <string>

namespace esum {

using Integer = mpz_class;
using Rational = mpq_class;

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Guard digits added to every decimal target before converting to bits.
inline constexpr long kGuardDigits = 15;

long digits_to_bits(long digits);
long bits_to_digits(long bits);
// Bits used internally for a target of `digits` decimal digits.
long working_bits(long digits);

class HPReal {
 public:
  HPReal();
  explicit HPReal(long prec_bits);
  HPReal(long v, long prec_bits);
  HPReal(const Rational& q, long prec_bits);
  HPReal(const Integer& z, long prec_bits);
  HPReal(const HPReal& o);
  HPReal(HPReal&& o) noexcept;
  ~HPReal();

  HPReal& operator=(const HPReal& o);
  HPReal& operator=(HPReal&& o) noexcept;
  HPReal& operator=(long v);

  static HPReal parse(const std::string& s, long prec_bits);
  static HPReal pow2(long e, long prec_bits);

  long prec() const { return mpfr_get_prec(v_); }
  HPReal with_prec(long bits) const;

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

  bool is_zero() const { return mpfr_zero_p(v_); }
  bool is_finite() const { return mpfr_number_p(v_); }
  int sign() const { return mpfr_sgn(v_); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  // log10 of |x|; -inf for zero.
  double log10_abs() const;

  // Scientific notation with `digits` significant digits, round to nearest.
  std::string to_string(int digits) const;

  HPReal& operator+=(const HPReal& o);
  HPReal& operator-=(const HPReal& o);
  HPReal& operator*=(const HPReal& o);
  HPReal& operator/=(const HPReal& o);
  HPReal& operator*=(long o);
  HPReal& operator/=(long o);

  HPReal operator-() const;

  friend HPReal operator+(const HPReal& a, const HPReal& b);
  friend HPReal operator-(const HPReal& a, const HPReal& b);
  friend HPReal operator*(const HPReal& a, const HPReal& b);
  friend HPReal operator/(const HPReal& a, const HPReal& b);
  friend HPReal operator*(const HPReal& a, long b);
  friend HPReal operator*(long a, const HPReal& b) { return b * a; }
  friend HPReal operator/(const HPReal& a, long b);

  friend bool operator<(const HPReal& a, const HPReal& b) { return mpfr_less_p(a.v_, b.v_); }
  friend bool operator>(const HPReal& a, const HPReal& b) { return mpfr_greater_p(a.v_, b.v_); }
  friend bool operator<=(const HPReal& a, const HPReal& b) { return mpfr_lessequal_p(a.v_, b.v_); }
  friend bool operator>=(const HPReal& a, const HPReal& b) { return mpfr_greaterequal_p(a.v_, b.v_); }
  friend bool operator==(const HPReal& a, const HPReal& b) { return mpfr_equal_p(a.v_, b.v_); }

 private:
  mpfr_t v_;
};

HPReal abs(const HPReal& x);
HPReal sqrt(const HPReal& x);
HPReal log(const HPReal& x);
HPReal exp(const HPReal& x);
HPReal pow(const HPReal& x, long n);
HPReal max(const HPReal& a, const HPReal& b);
// 10^e at the given precision.
HPReal ten_pow(long e, long prec_bits);
// Round to the nearest integer.
Integer round_to_integer(const HPReal& x);

// Constants. The `digits` overloads return a value with absolute error
// below 10^-digits, carried at working_bits(digits).
HPReal pi(long digits);
HPReal ln2(long digits);
HPReal euler_gamma(long digits);
HPReal zeta_int(long s, long digits);
// Li_s(x) for |x| <= 1/2, s >= 1, by direct series.
HPReal polylog(long s, const Rational& x, long digits);

// Bit-precision variants used internally.
HPReal pi_bits(long bits);
HPReal ln2_bits(long bits);
HPReal gamma_bits(long bits);
HPReal zeta_bits(long s, long bits);
HPReal polylog_bits(long s, const Rational& x, long bits);

}  // namespace esum
