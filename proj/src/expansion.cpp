#include "esum/expansion.hpp"

#include <map>
#include <mutex>

namespace esum {

Expansion::Expansion(int order, long bits) : order_(order), bits_(bits) {}

Expansion Expansion::constant(const HPReal& c, int order, long bits) {
  Expansion e(order, bits);
  e.at(0, 0) = c.with_prec(bits);
  return e;
}

Expansion Expansion::monomial(int a, int b, const HPReal& c, int order, long bits) {
  Expansion e(order, bits);
  if (b <= order) e.at(a, b) = c.with_prec(bits);
  return e;
}

Expansion Expansion::linear_power(long alpha, const Rational& beta, int power, int order, long bits) {
  // (alpha k + beta)^-m = alpha^-m k^-m (1 + u)^-m, u = beta/(alpha k).
  Expansion e(order, bits);
  const Rational r = beta / Rational(alpha);
  HPReal rv(r, bits);
  HPReal lead = esum::pow(HPReal(alpha, bits), -power);
  HPReal c = lead;
  for (int j = 0; power + j <= order; ++j) {
    e.at(0, power + j) = c;
    // binomial(-m, j+1) / binomial(-m, j) = -(m + j) / (j + 1)
    c *= rv;
    c *= -(power + j);
    c /= (j + 1);
  }
  return e;
}

bool Expansion::empty() const {
  for (const auto& row : c_)
    for (const auto& x : row)
      if (!x.is_zero()) return false;
  return true;
}

void Expansion::ensure_log(int a) {
  while (static_cast<int>(c_.size()) <= a) {
    c_.emplace_back();
    auto& row = c_.back();
    row.reserve(static_cast<size_t>(order_) + 1);
    for (int b = 0; b <= order_; ++b) row.emplace_back(bits_);
  }
}

void Expansion::trim() {
  while (!c_.empty()) {
    bool zero = true;
    for (const auto& x : c_.back())
      if (!x.is_zero()) { zero = false; break; }
    if (!zero) break;
    c_.pop_back();
  }
}

const HPReal& Expansion::coef(int a, int b) const {
  static thread_local std::map<long, HPReal> zeros;
  if (a < static_cast<int>(c_.size()) && b >= 0 && b <= order_) return c_[a][b];
  auto it = zeros.find(bits_);
  if (it == zeros.end()) it = zeros.emplace(bits_, HPReal(bits_)).first;
  return it->second;
}

HPReal& Expansion::at(int a, int b) {
  if (b < 0 || b > order_) throw std::out_of_range("expansion index out of range");
  ensure_log(a);
  return c_[a][b];
}

Expansion& Expansion::operator+=(const Expansion& o) {
  ensure_log(o.max_log());
  for (int a = 0; a <= o.max_log(); ++a)
    for (int b = 0; b <= std::min(order_, o.order_); ++b)
      if (!o.c_[a][b].is_zero()) mpfr_add(c_[a][b].raw(), c_[a][b].raw(), o.c_[a][b].raw(), MPFR_RNDN);
  if (o.order_ < order_) order_ = o.order_;
  for (auto& row : c_) row.resize(static_cast<size_t>(order_) + 1);
  return *this;
}

Expansion& Expansion::operator-=(const Expansion& o) {
  ensure_log(o.max_log());
  for (int a = 0; a <= o.max_log(); ++a)
    for (int b = 0; b <= std::min(order_, o.order_); ++b)
      if (!o.c_[a][b].is_zero()) mpfr_sub(c_[a][b].raw(), c_[a][b].raw(), o.c_[a][b].raw(), MPFR_RNDN);
  if (o.order_ < order_) order_ = o.order_;
  for (auto& row : c_) row.resize(static_cast<size_t>(order_) + 1);
  return *this;
}

Expansion& Expansion::operator*=(const HPReal& s) {
  for (auto& row : c_)
    for (auto& x : row)
      if (!x.is_zero()) mpfr_mul(x.raw(), x.raw(), s.raw(), MPFR_RNDN);
  return *this;
}

Expansion operator*(const Expansion& x, const Expansion& y) {
  const int order = std::min(x.order_, y.order_);
  const long bits = std::min(x.bits_, y.bits_);
  Expansion r(order, bits);
  if (x.c_.empty() || y.c_.empty()) return r;
  r.ensure_log(x.max_log() + y.max_log());
  HPReal t(bits);
  for (int a1 = 0; a1 <= x.max_log(); ++a1)
    for (int b1 = 0; b1 <= order; ++b1) {
      const HPReal& u = x.c_[a1][b1];
      if (u.is_zero()) continue;
      for (int a2 = 0; a2 <= y.max_log(); ++a2)
        for (int b2 = 0; b1 + b2 <= order; ++b2) {
          const HPReal& v = y.c_[a2][b2];
          if (v.is_zero()) continue;
          mpfr_mul(t.raw(), u.raw(), v.raw(), MPFR_RNDN);
          HPReal& dst = r.c_[a1 + a2][b1 + b2];
          mpfr_add(dst.raw(), dst.raw(), t.raw(), MPFR_RNDN);
        }
    }
  r.trim();
  return r;
}

Expansion Expansion::pow(int n) const {
  Expansion r = constant(HPReal(1, bits_), order_, bits_);
  for (int i = 0; i < n; ++i) r = r * *this;
  return r;
}

Expansion Expansion::derivative() const {
  // d/dk L^a k^-b = a L^(a-1) k^-(b+1) - b L^a k^-(b+1)
  Expansion r(order_, bits_);
  HPReal t(bits_);
  for (int a = 0; a <= max_log(); ++a)
    for (int b = 0; b < order_; ++b) {
      const HPReal& c = c_[a][b];
      if (c.is_zero()) continue;
      if (a > 0) {
        mpfr_mul_si(t.raw(), c.raw(), a, MPFR_RNDN);
        HPReal& d = r.at(a - 1, b + 1);
        mpfr_add(d.raw(), d.raw(), t.raw(), MPFR_RNDN);
      }
      if (b > 0) {
        mpfr_mul_si(t.raw(), c.raw(), b, MPFR_RNDN);
        HPReal& d = r.at(a, b + 1);
        mpfr_sub(d.raw(), d.raw(), t.raw(), MPFR_RNDN);
      }
    }
  r.trim();
  return r;
}

Expansion Expansion::antiderivative() const {
  Expansion r(order_, bits_);
  HPReal t(bits_);
  for (int a = 0; a <= max_log(); ++a) {
    if (!c_[a][0].is_zero()) throw DivergenceError("antiderivative of a non-decaying monomial");
    // b = 1: L^a / k -> L^(a+1) / (a+1)
    if (!c_[a][1].is_zero()) {
      mpfr_div_si(t.raw(), c_[a][1].raw(), a + 1, MPFR_RNDN);
      HPReal& d = r.at(a + 1, 0);
      mpfr_add(d.raw(), d.raw(), t.raw(), MPFR_RNDN);
    }
    // b >= 2: int L^a k^-b = -k^(1-b) sum_m a!/(a-m)! L^(a-m) / (b-1)^(m+1)
    for (int b = 2; b <= order_; ++b) {
      const HPReal& c = c_[a][b];
      if (c.is_zero()) continue;
      mpfr_neg(t.raw(), c.raw(), MPFR_RNDN);
      for (int m = 0; m <= a; ++m) {
        mpfr_div_si(t.raw(), t.raw(), b - 1, MPFR_RNDN);
        HPReal& d = r.at(a - m, b - 1);
        mpfr_add(d.raw(), d.raw(), t.raw(), MPFR_RNDN);
        mpfr_mul_si(t.raw(), t.raw(), a - m, MPFR_RNDN);
      }
    }
  }
  r.trim();
  return r;
}

Expansion Expansion::compose(long alpha, const Rational& beta) const {
  if (alpha < 1) throw std::invalid_argument("compose requires alpha >= 1");
  if (alpha == 1 && beta == 0) return *this;
  Expansion r(order_, bits_);
  if (c_.empty()) return r;
  HPReal la = log(HPReal(alpha, bits_));
  if (beta == 0) {
    // L_x = ln(alpha) + L, x^-b = alpha^-b k^-b
    Expansion logx = constant(la, order_, bits_);
    logx.at(1, 0) = HPReal(1, bits_);
    std::vector<Expansion> lp{constant(HPReal(1, bits_), order_, bits_)};
    for (int a = 1; a <= max_log(); ++a) lp.push_back(lp.back() * logx);
    for (int a = 0; a <= max_log(); ++a) {
      Expansion ra(order_, bits_);
      bool any = false;
      for (int b = 0; b <= order_; ++b) {
        if (c_[a][b].is_zero()) continue;
        ra.at(0, b) = c_[a][b] * esum::pow(HPReal(alpha, bits_), -b);
        any = true;
      }
      if (any) r += lp[a] * ra;
    }
    r.trim();
    return r;
  }
  const Rational u = beta / Rational(alpha);
  HPReal uv(u, bits_);
  // ln(1+u/k) = sum_{m>=1} (-1)^(m+1) u^m / (m k^m)
  Expansion logx = constant(la, order_, bits_);
  logx.at(1, 0) = HPReal(1, bits_);
  {
    HPReal um = uv;
    for (int m = 1; m <= order_; ++m) {
      HPReal t = um / m;
      if (m % 2 == 0) t = -t;
      logx.at(0, m) += t;
      um *= uv;
    }
  }
  std::vector<Expansion> lp{constant(HPReal(1, bits_), order_, bits_)};
  for (int a = 1; a <= max_log(); ++a) lp.push_back(lp.back() * logx);
  for (int a = 0; a <= max_log(); ++a) {
    Expansion ra(order_, bits_);
    bool any = false;
    for (int b = 0; b <= order_; ++b) {
      if (c_[a][b].is_zero()) continue;
      any = true;
      if (b == 0) {
        ra.at(0, 0) += c_[a][0];
        continue;
      }
      Expansion q = linear_power(alpha, beta, b, order_, bits_);
      for (int j = b; j <= order_; ++j) ra.at(0, j) += q.coef(0, j) * c_[a][b];
    }
    if (any) r += lp[a] * ra;
  }
  r.trim();
  return r;
}

Expansion Expansion::truncated(int order) const {
  Expansion r(std::min(order, order_), bits_);
  for (int a = 0; a <= max_log(); ++a)
    for (int b = 0; b <= r.order_; ++b)
      if (!c_[a][b].is_zero()) r.at(a, b) = c_[a][b];
  return r;
}

HPReal Expansion::eval(long k) const {
  const long wb = bits_;
  HPReal L = log(HPReal(k, wb));
  HPReal kinv = HPReal(1, wb) / HPReal(k, wb);
  HPReal sum(wb), t(wb);
  // Horner in 1/k for each log power, then in L.
  HPReal lp(1, wb);
  for (int a = 0; a <= max_log(); ++a) {
    HPReal row(wb);
    for (int b = order_; b >= 0; --b) {
      mpfr_mul(row.raw(), row.raw(), kinv.raw(), MPFR_RNDN);
      mpfr_add(row.raw(), row.raw(), c_[a][b].raw(), MPFR_RNDN);
    }
    mpfr_mul(t.raw(), row.raw(), lp.raw(), MPFR_RNDN);
    mpfr_add(sum.raw(), sum.raw(), t.raw(), MPFR_RNDN);
    mpfr_mul(lp.raw(), lp.raw(), L.raw(), MPFR_RNDN);
  }
  return sum;
}

HPReal Expansion::max_abs_upto(int bmax) const {
  HPReal m(bits_);
  for (int a = 0; a <= max_log(); ++a)
    for (int b = 0; b <= std::min(bmax, order_); ++b) {
      HPReal x = abs(c_[a][b]);
      if (x > m) m = x;
    }
  return m;
}

void Expansion::zero_upto(int bmax) {
  for (auto& row : c_)
    for (int b = 0; b <= std::min(bmax, order_); ++b) mpfr_set_zero(row[b].raw(), 1);
  trim();
}

const Rational& bernoulli(int n) {
  static std::mutex mu;
  static std::vector<Rational> table;
  std::lock_guard<std::mutex> lock(mu);
  if (table.empty()) table.emplace_back(1);
  // sum_{j=0}^{m} C(m+1, j) B_j = 0
  while (static_cast<int>(table.size()) <= n) {
    int m = static_cast<int>(table.size());
    Rational s(0);
    Integer binom(1);
    for (int j = 0; j < m; ++j) {
      s += Rational(binom) * table[static_cast<size_t>(j)];
      binom = binom * (m + 1 - j) / (j + 1);
    }
    Rational b = -s / Rational(m + 1);
    b.canonicalize();
    table.push_back(b);
  }
  return table[static_cast<size_t>(n)];
}

Expansion partial_sum(const Expansion& g) {
  // F = M + g/2 + sum_j B_2j/(2j)! g^(2j-1)
  const int order = g.order();
  const long bits = g.bits();
  Expansion F = g.antiderivative();
  F += g * HPReal(Rational(1, 2), bits);
  Expansion d = g.derivative();
  Integer fact(2);
  for (int j = 1; 2 * j <= order + 1; ++j) {
    if (d.empty()) break;
    Rational c = bernoulli(2 * j) / Rational(fact);
    F += d * HPReal(c, bits);
    d = d.derivative().derivative();
    fact *= (2 * j + 1) * (2 * j + 2);
  }
  return F;
}

TailResult tail_sum(const Expansion& e, long K, double cancel_log10) {
  if (K < 8) throw std::invalid_argument("tail cutoff must be >= 8");
  Expansion g = e;
  for (int a = 0; a <= g.max_log(); ++a)
    for (int b = 0; b <= std::min(1, g.order()); ++b) {
      const HPReal& c = g.coef(a, b);
      if (c.is_zero()) continue;
      if (c.log10_abs() > cancel_log10)
        throw DivergenceError("summand expansion has a non-summable term (ln k)^" + std::to_string(a) +
                              " k^-" + std::to_string(b));
    }
  g.zero_upto(1);
  Expansion F = partial_sum(g);
  TailResult r{-F.eval(K), HPReal(g.bits())};
  // Error estimate: the last two retained orders of F at K. Successive
  // orders shrink by roughly 1/K^2 deep in the asymptotic regime.
  Expansion last(F.order(), F.bits());
  for (int a = 0; a <= F.max_log(); ++a)
    for (int b = std::max(0, F.order() - 1); b <= F.order(); ++b) last.at(a, b) = abs(F.coef(a, b));
  HPReal est = last.eval(K);
  // Rounding of the evaluation itself.
  HPReal ulp = abs(r.value) * HPReal::pow2(-(g.bits() - 8), g.bits());
  r.error = est + ulp;
  return r;
}

TailResult log_zeta_tail(int a, int b, long K, long digits, int order) {
  if (b < 2) throw DivergenceError("log-zeta tail requires b >= 2");
  const long bits = working_bits(digits);
  return tail_sum(Expansion::monomial(a, b, HPReal(1, bits), std::max(order, b + 2), bits), K);
}

BootstrapResult bootstrap_constant(const HPReal& s1, long K1, const HPReal& s2, long K2, const Expansion& f) {
  if (K2 < 2 * K1) throw std::invalid_argument("bootstrap anchors need K2 >= 2*K1");
  HPReal c1 = s1 - f.eval(K1);
  HPReal c2 = s2 - f.eval(K2);
  return {c2, abs(c2 - c1)};
}

}  // namespace esum
