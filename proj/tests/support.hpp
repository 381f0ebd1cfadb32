#pragma once

#include <cmath>
#include <string>

#include "esum/hpreal.hpp"

namespace testing {

inline double absdiff(const esum::HPReal& a, const esum::HPReal& b) { return esum::abs(a - b).to_double(); }

// log10 |a - b|, or -inf when equal.
inline double log_gap(const esum::HPReal& a, const esum::HPReal& b) { return (a - b).log10_abs(); }

// pi from Machin's formula in exact rationals, independent of MPFR's constant.
inline esum::HPReal machin_pi(long bits) {
  auto atan_inv = [bits](long n) {
    esum::Rational sum(0), pw(1, n), n2(n * n);
    long digits = esum::bits_to_digits(bits) + 5;
    for (long j = 0;; ++j) {
      esum::Rational t = pw / (2 * j + 1);
      sum += (j % 2 == 0) ? t : esum::Rational(-t);
      pw /= n2;
      if (esum::HPReal(pw, 64).log10_abs() < -digits) break;
    }
    return esum::HPReal(sum, bits);
  };
  return atan_inv(5) * 16 - atan_inv(239) * 4;
}

// ln 2 = 2 atanh(1/3), summed in rationals.
inline esum::HPReal series_ln2(long bits) {
  esum::Rational sum(0), pw(1, 3);
  long digits = esum::bits_to_digits(bits) + 5;
  for (long j = 0;; ++j) {
    sum += pw / (2 * j + 1);
    pw /= 9;
    if (esum::HPReal(pw, 64).log10_abs() < -digits) break;
  }
  return esum::HPReal(sum * 2, bits);
}

}  // namespace testing
