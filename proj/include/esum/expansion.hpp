#pragma once

#include <vector>

#include "esum/hpreal.hpp"

namespace esum {

struct DivergenceError : std::domain_error {
  using std::domain_error::domain_error;
};

// Finite asymptotic expansion  sum c[a][b] (ln k)^a k^-b,  0 <= b <= order.
class Expansion {
 public:
  Expansion(int order, long bits);

  static Expansion constant(const HPReal& c, int order, long bits);
  static Expansion monomial(int a, int b, const HPReal& c, int order, long bits);
  // (alpha*k + beta)^-power expanded in k.
  static Expansion linear_power(long alpha, const Rational& beta, int power, int order, long bits);

  int order() const { return order_; }
  long bits() const { return bits_; }
  int max_log() const { return static_cast<int>(c_.size()) - 1; }
  bool empty() const;

  const HPReal& coef(int a, int b) const;
  HPReal& at(int a, int b);

  Expansion& operator+=(const Expansion& o);
  Expansion& operator-=(const Expansion& o);
  Expansion& operator*=(const HPReal& s);
  friend Expansion operator+(Expansion a, const Expansion& b) { return a += b; }
  friend Expansion operator-(Expansion a, const Expansion& b) { return a -= b; }
  friend Expansion operator*(const Expansion& a, const Expansion& b);
  friend Expansion operator*(Expansion a, const HPReal& s) { return a *= s; }

  Expansion pow(int n) const;
  Expansion derivative() const;
  // Antiderivative vanishing at infinity (b >= 2 terms) or pure log terms
  // (b = 1); b = 0 terms have no such antiderivative.
  Expansion antiderivative() const;
  // E(alpha*j + beta) re-expanded in j.
  Expansion compose(long alpha, const Rational& beta) const;
  Expansion truncated(int order) const;

  HPReal eval(long k) const;
  // Largest |c| over monomials with b <= bmax.
  HPReal max_abs_upto(int bmax) const;
  void zero_upto(int bmax);

 private:
  int order_;
  long bits_;
  std::vector<std::vector<HPReal>> c_;  // c_[a][b]
  void ensure_log(int a);
  void trim();
};

// Exact Bernoulli number B_n.
const Rational& bernoulli(int n);

// F with  sum_{j<=k} g(j) = C + F(k)  asymptotically (Euler-Maclaurin);
// F has no constant term.
Expansion partial_sum(const Expansion& g);

struct TailResult {
  HPReal value;
  HPReal error;
};

// sum_{k>K} e(k) for an expansion whose monomials all have b >= 2.
// Monomials with b < 2 whose coefficient exceeds `cancel_tol` raise
// DivergenceError; smaller ones are treated as cancellation residue.
TailResult tail_sum(const Expansion& e, long K, double cancel_log10 = -1e9);

// T(a, b, K) = sum_{k>K} (ln k)^a / k^b.
TailResult log_zeta_tail(int a, int b, long K, long digits, int order = 24);

// Additive constant C of a partial-sum expansion from two anchors.
// `s1`, `s2` are partial sums at K1 and K2 = 2*K1 or more.
struct BootstrapResult {
  HPReal constant;
  HPReal disagreement;
};
BootstrapResult bootstrap_constant(const HPReal& s1, long K1, const HPReal& s2, long K2, const Expansion& f);

}  // namespace esum
