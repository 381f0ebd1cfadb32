#include "esum/descriptor.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace esum {

std::string Linear::str(char var, char par) const {
  std::string s;
  auto term = [&](long coef, char v) {
    if (coef == 0) return;
    if (coef < 0) s += '-';
    else if (!s.empty()) s += '+';
    long m = coef < 0 ? -coef : coef;
    if (m != 1) s += std::to_string(m);
    s += v;
  };
  term(a, var);
  term(c, par);
  if (b != 0 || s.empty()) {
    if (b < 0) s += '-';
    else if (!s.empty()) s += '+';
    s += std::to_string(b < 0 ? -b : b);
  }
  return s;
}

bool SumDescriptor::uses_param() const {
  for (const auto& l : linear)
    if (l.base.uses_p()) return true;
  return false;
}

bool SumDescriptor::has_coupled_inner() const {
  for (const auto& in : inner)
    if (in.body->uses_param()) return true;
  return false;
}

bool SumDescriptor::has_infinite_inner() const {
  for (const auto& in : inner)
    if (in.infinite) return true;
  return false;
}

int SumDescriptor::degree() const {
  int d = 0;
  for (const auto& l : linear)
    if (l.base.a != 0) d += l.power;
  return d;
}

int SumDescriptor::max_symbol_index_scale() const {
  int m = 1;
  for (const auto& f : factors) m = std::max<int>(m, static_cast<int>(f.arg.a));
  for (const auto& in : inner)
    if (!in.infinite) m = std::max<int>(m, static_cast<int>(in.upper.a));
  return m;
}

namespace {

std::string factor_str(const Factor& f) {
  std::string s(1, sym_char(f.sym));
  if (f.order != 1) s += "[" + std::to_string(f.order) + "]";
  if (!(f.arg.a == 1 && f.arg.b == 0)) {
    std::string a = f.arg.str();
    s += (f.arg.a == 1 ? "@" + a : "@(" + a + ")");
  }
  if (f.power != 1) s += "^" + std::to_string(f.power);
  return s;
}

std::string linear_str(const Linear& l, int power) {
  std::string s = (l.a == 1 && l.b == 0 && l.c == 0) ? "k" : "(" + l.str() + ")";
  if (power != 1) s += "^" + std::to_string(power);
  return s;
}

std::string inner_str(const InnerSum& in) {
  std::string s = "{" + in.body->str() + "}@";
  if (in.infinite) s += "inf";
  else if (in.upper.a == 1) s += in.upper.str();
  else s += "(" + in.upper.str() + ")";
  if (in.power != 1) s += "^" + std::to_string(in.power);
  return s;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  SumDescriptor parse_all() {
    SumDescriptor d = parse_desc();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return d;
  }

 private:
  const std::string& s_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("descriptor '" + s_ + "' at column " + std::to_string(pos_) + ": " + msg);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  bool accept(char c) {
    if (peek(c)) { ++pos_; return true; }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }
  bool accept_word(const char* w) {
    skip();
    size_t n = std::char_traits<char>::length(w);
    if (s_.compare(pos_, n, w) == 0) {
      size_t e = pos_ + n;
      if (e < s_.size() && std::isalnum(static_cast<unsigned char>(s_[e]))) return false;
      pos_ = e;
      return true;
    }
    return false;
  }
  long number() {
    skip();
    size_t st = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (st == pos_) fail("expected integer");
    return std::stol(s_.substr(st, pos_ - st));
  }
  int opt_power() {
    if (pos_ < s_.size() && s_[pos_] == '^') {
      ++pos_;
      long v = number();
      if (v < 1) fail("power must be >= 1");
      return static_cast<int>(v);
    }
    return 1;
  }

  // Linear form in k and p; `allow_p` false restricts to k and constants.
  Linear linear(bool allow_p) {
    Linear l{0, 0, 0};
    bool first = true;
    for (;;) {
      skip();
      long sign = 1;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
        sign = s_[pos_] == '-' ? -1 : 1;
        ++pos_;
      } else if (!first) {
        break;
      }
      skip();
      long coef = 1;
      bool has_num = false;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        coef = number();
        has_num = true;
      }
      if (pos_ < s_.size() && s_[pos_] == 'k') {
        ++pos_;
        l.a += sign * coef;
      } else if (pos_ < s_.size() && s_[pos_] == 'p') {
        if (!allow_p) fail("parameter not allowed here");
        ++pos_;
        l.c += sign * coef;
      } else {
        if (!has_num) fail("expected term of linear form");
        l.b += sign * coef;
      }
      first = false;
    }
    return l;
  }

  // Unparenthesized symbol argument or upper limit: [n]k[(+|-)m].
  Linear bare_linear() {
    skip();
    Linear l{0, 0, 0};
    long coef = 1;
    if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) coef = number();
    if (pos_ >= s_.size() || s_[pos_] != 'k') fail("expected 'k' in index expression");
    ++pos_;
    l.a = coef;
    if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
      long sign = s_[pos_] == '-' ? -1 : 1;
      ++pos_;
      l.b = sign * number();
    }
    return l;
  }

  Linear index_expr() {
    skip();
    if (accept('(')) {
      Linear l = linear(false);
      expect(')');
      return l;
    }
    return bare_linear();
  }

  SumDescriptor parse_desc() {
    SumDescriptor d;
    if (accept_word("alt")) d.alternating = true;
    bool any = false;
    for (;;) {
      skip();
      if (pos_ >= s_.size()) break;
      char c = s_[pos_];
      if (c == '/' || c == '}') break;
      if (c == 'H' || c == 'h' || c == 'A') {
        ++pos_;
        Factor f;
        f.sym = c == 'H' ? Sym::H : (c == 'h' ? Sym::h : Sym::A);
        f.arg = Linear{1, 0, 0};
        if (pos_ < s_.size() && s_[pos_] == '[') {
          ++pos_;
          f.order = static_cast<int>(number());
          if (f.order < 1) fail("harmonic order must be >= 1");
          expect(']');
        }
        if (pos_ < s_.size() && s_[pos_] == '@') {
          ++pos_;
          f.arg = index_expr();
          if (f.arg.a < 1) fail("symbol argument must increase with k");
        }
        f.power = opt_power();
        d.factors.push_back(f);
      } else if (c == '{') {
        ++pos_;
        auto body = std::make_shared<SumDescriptor>(parse_desc());
        expect('}');
        expect('@');
        InnerSum in;
        in.body = body;
        if (accept_word("inf")) {
          in.infinite = true;
        } else {
          in.upper = index_expr();
        }
        in.power = opt_power();
        if (body->alternating) fail("inner sums may not alternate; use the A symbol");
        if (!body->inner.empty()) fail("inner sums may not nest");
        d.inner.push_back(in);
      } else if (c == '(') {
        ++pos_;
        Linear l = linear(true);
        expect(')');
        d.linear.push_back({l, -opt_power()});
      } else if (c == 'k') {
        ++pos_;
        d.linear.push_back({Linear{1, 0, 0}, -opt_power()});
      } else if (c == '1') {
        ++pos_;
      } else {
        fail(std::string("unexpected character '") + c + "'");
      }
      any = true;
    }
    if (accept('/')) {
      bool got = false;
      for (;;) {
        skip();
        if (pos_ >= s_.size()) break;
        char c = s_[pos_];
        if (c == '}') break;
        if (c == 'k') {
          ++pos_;
          d.linear.push_back({Linear{1, 0, 0}, opt_power()});
        } else if (c == '(') {
          ++pos_;
          Linear l = linear(true);
          expect(')');
          d.linear.push_back({l, opt_power()});
        } else {
          fail("expected denominator factor");
        }
        got = true;
      }
      if (!got) fail("empty denominator");
    } else if (!any) {
      fail("empty descriptor");
    }
    return canonicalize(std::move(d));
  }
};

}  // namespace

SumDescriptor canonicalize(SumDescriptor d) {
  // Merge equal symbols.
  std::sort(d.factors.begin(), d.factors.end(), [](const Factor& x, const Factor& y) {
    return std::tie(x.sym, x.order, x.arg) < std::tie(y.sym, y.order, y.arg);
  });
  std::vector<Factor> fs;
  for (const auto& f : d.factors) {
    if (!fs.empty() && fs.back().sym == f.sym && fs.back().order == f.order && fs.back().arg == f.arg)
      fs.back().power += f.power;
    else
      fs.push_back(f);
  }
  d.factors = std::move(fs);

  // Normalize linear factors to positive leading coefficient; a sign flip
  // on an odd power is not representable, so only sort and merge.
  std::sort(d.linear.begin(), d.linear.end(),
            [](const LinearFactor& x, const LinearFactor& y) { return x.base < y.base; });
  std::vector<LinearFactor> ls;
  for (const auto& l : d.linear) {
    if (!ls.empty() && ls.back().base == l.base) ls.back().power += l.power;
    else ls.push_back(l);
  }
  ls.erase(std::remove_if(ls.begin(), ls.end(), [](const LinearFactor& l) { return l.power == 0; }), ls.end());
  d.linear = std::move(ls);

  std::sort(d.inner.begin(), d.inner.end(),
            [](const InnerSum& x, const InnerSum& y) { return inner_str(x) < inner_str(y); });
  std::vector<InnerSum> is;
  for (const auto& in : d.inner) {
    if (!is.empty() && is.back().infinite == in.infinite && is.back().upper == in.upper &&
        is.back().body->str() == in.body->str())
      is.back().power += in.power;
    else
      is.push_back(in);
  }
  d.inner = std::move(is);
  return d;
}

std::string SumDescriptor::str() const {
  std::vector<std::string> num, den;
  for (const auto& f : factors) num.push_back(factor_str(f));
  for (const auto& in : inner) num.push_back(inner_str(in));
  for (const auto& l : linear) {
    if (l.power < 0) num.push_back(linear_str(l.base, -l.power));
    else den.push_back(linear_str(l.base, l.power));
  }
  std::string s = alternating ? "alt " : "";
  if (num.empty()) s += "1";
  for (size_t i = 0; i < num.size(); ++i) s += (i ? " " : "") + num[i];
  if (!den.empty()) {
    s += " /";
    for (const auto& x : den) s += " " + x;
  }
  return s;
}

DescPtr parse_descriptor(const std::string& text) {
  Parser p(text);
  return std::make_shared<SumDescriptor>(p.parse_all());
}

Validation validate(const SumDescriptor& d) {
  Validation v;
  for (const auto& l : d.linear) {
    if (l.base.a < 0) {
      v.ok = false;
      v.reason = "linear factor (" + l.base.str() + ") must have non-negative k coefficient";
      return v;
    }
  }
  for (const auto& f : d.factors) {
    if (f.arg.c != 0 || f.arg.a < 1) {
      v.ok = false;
      v.reason = "symbol argument must be a*k+b with a >= 1";
      return v;
    }
  }
  for (const auto& in : d.inner) {
    const SumDescriptor& b = *in.body;
    if (in.infinite) {
      if (!b.uses_param()) {
        v.ok = false;
        v.reason = "uncoupled infinite inner sum; write it as a product of sums";
        return v;
      }
      if (b.degree() < 2) {
        v.ok = false;
        v.reason = "coupled inner sum has degree " + std::to_string(b.degree()) + " < 2";
        return v;
      }
    } else if (b.degree() < 1) {
      v.ok = false;
      v.reason = "inner summand grows polynomially (degree " + std::to_string(b.degree()) + " < 1)";
      return v;
    }
  }
  int deg = d.degree();
  for (const auto& in : d.inner) {
    if (!in.body->uses_param()) continue;
    // sum_i g(i)/(i+k)^m decays like k^-m when g is summable, else like k^(1-m-deg g)
    int m = 0;
    for (const auto& l : in.body->linear)
      if (l.base.c != 0 && l.base.a != 0) m += l.power;
    int dg = in.body->degree() - m;
    deg += in.power * (dg >= 1 ? m : m + dg - 1);
  }
  if (deg >= 2 || (deg >= 1 && d.alternating)) return v;
  v.ok = false;
  v.reason = d.alternating ? "alternating sum with degree " + std::to_string(deg) + " < 1"
                           : "degree " + std::to_string(deg) + " < 2 without alternation";
  return v;
}

namespace {

Rational rpow(const Rational& q, int n) {
  Rational r(1);
  for (int i = 0; i < n; ++i) r *= q;
  return r;
}

}  // namespace

Rational term_exact(const SumDescriptor& d, long k, std::optional<long> p) {
  if (d.uses_param() && !p) throw std::invalid_argument("descriptor '" + d.str() + "' needs a parameter");
  const long pv = p.value_or(0);
  Rational r(1);
  for (const auto& l : d.linear) {
    long v = l.base.at(k, pv);
    if (l.power > 0) {
      if (v == 0) return Rational(0);
      Integer den;
      mpz_pow_ui(den.get_mpz_t(), Integer(v).get_mpz_t(), static_cast<unsigned long>(l.power));
      r /= Rational(den);
    } else {
      r *= rpow(Rational(v), -l.power);
    }
  }
  for (const auto& f : d.factors) {
    long idx = f.arg.at(k, 0);
    if (idx < 0) throw std::domain_error("negative harmonic index in '" + d.str() + "'");
    r *= rpow(harmonic(f.sym, idx, f.order), f.power);
    if (r == 0) return r;
  }
  for (const auto& in : d.inner) {
    if (in.infinite) throw std::domain_error("infinite inner sum has no exact value");
    long up = in.upper.at(k, 0);
    Rational s(0);
    for (long i = 1; i <= up; ++i) s += term_exact(*in.body, i, k);
    r *= rpow(s, in.power);
  }
  if (d.alternating && k % 2 == 0) r = -r;
  return r;
}

Rational partial_exact(const SumDescriptor& d, long upper, std::optional<long> p) {
  // Inner sums that do not depend on the outer index are accumulated once.
  std::vector<std::vector<Rational>> prefix(d.inner.size());
  SumDescriptor outer = d;
  outer.inner.clear();
  for (size_t j = 0; j < d.inner.size(); ++j) {
    const auto& in = d.inner[j];
    if (in.infinite || in.body->uses_param()) return [&] {
      Rational s(0);
      for (long k = 1; k <= upper; ++k) s += term_exact(d, k, p);
      return s;
    }();
    long top = std::max<long>(0, in.upper.at(upper, 0));
    auto& v = prefix[j];
    v.reserve(static_cast<size_t>(top) + 1);
    v.emplace_back(0);
    for (long i = 1; i <= top; ++i) v.push_back(v.back() + term_exact(*in.body, i, std::nullopt));
  }
  Rational s(0);
  for (long k = 1; k <= upper; ++k) {
    Rational t = term_exact(outer, k, p);
    if (t == 0) continue;
    for (size_t j = 0; j < d.inner.size(); ++j) {
      long up = std::max<long>(0, d.inner[j].upper.at(k, 0));
      t *= rpow(prefix[j][static_cast<size_t>(up)], d.inner[j].power);
    }
    s += t;
  }
  return s;
}

SumDescriptor multiply(const SumDescriptor& a, const SumDescriptor& b) {
  SumDescriptor r = a;
  r.alternating = a.alternating != b.alternating;
  r.factors.insert(r.factors.end(), b.factors.begin(), b.factors.end());
  r.inner.insert(r.inner.end(), b.inner.begin(), b.inner.end());
  r.linear.insert(r.linear.end(), b.linear.begin(), b.linear.end());
  return canonicalize(std::move(r));
}

}  // namespace esum
