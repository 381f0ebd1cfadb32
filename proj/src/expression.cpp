#include "esum/expression.hpp"

#include <cctype>
#include <cmath>
#include <mutex>

namespace esum {

std::string Item::key() const {
  switch (kind) {
    case ItemKind::Atom:
      return atom;
    case ItemKind::Sum:
      return "S[" + desc->str() + "]";
    case ItemKind::Term:
      return "T[" + desc->str() + "]";
    case ItemKind::Finite: {
      std::string u = Linear{upper.a, upper.b, 0}.str('p');
      return "F[" + desc->str() + "]@" + (upper.a == 1 || upper.a == 0 ? u : "(" + u + ")");
    }
  }
  return "";
}

bool Item::uses_param() const {
  switch (kind) {
    case ItemKind::Atom:
      return false;
    case ItemKind::Sum:
      return desc->uses_param();
    case ItemKind::Term:
    case ItemKind::Finite:
      return true;
  }
  return false;
}

Expr Expr::constant(const Rational& c) {
  Expr e;
  e.add_term({}, c);
  return e;
}

Expr Expr::item(const Item& it) {
  Expr e;
  std::string k = it.key();
  e.items_.emplace(k, it);
  e.add_term({{k, 1}}, Rational(1));
  return e;
}

void Expr::add_term(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, c);
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

void Expr::prune() {
  std::map<std::string, Item> used;
  for (const auto& [m, c] : terms_)
    for (const auto& [k, pw] : m) used.emplace(k, items_.at(k));
  items_.swap(used);
}

bool Expr::uses_param() const {
  for (const auto& [k, it] : items_)
    if (it.uses_param()) return true;
  return false;
}

bool Expr::is_exact() const {
  for (const auto& [k, it] : items_)
    if (it.kind == ItemKind::Atom || it.kind == ItemKind::Sum) return false;
  return true;
}

std::string Expr::str() const {
  if (terms_.empty()) return "0";
  std::string s;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    Rational a = abs(c);
    if (first) {
      if (c < 0) s += "-";
    } else {
      s += c < 0 ? " - " : " + ";
    }
    first = false;
    std::string body;
    for (const auto& [k, pw] : m) {
      if (!body.empty()) body += "*";
      body += k;
      if (pw != 1) body += "^" + std::to_string(pw);
    }
    if (body.empty()) {
      s += a.get_str();
    } else if (a == 1) {
      s += body;
    } else {
      s += a.get_str() + "*" + body;
    }
  }
  return s;
}

std::vector<int> Expr::weights() const {
  std::vector<int> w;
  for (const auto& [m, c] : terms_) {
    int t = 0;
    for (const auto& [k, pw] : m) {
      const Item& it = items_.at(k);
      if (it.kind != ItemKind::Atom) {
        t = -1;
        break;
      }
      t += find_atom(it.atom)->weight * pw;
    }
    w.push_back(t);
  }
  return w;
}

Expr& Expr::operator+=(const Expr& o) {
  for (const auto& [k, it] : o.items_) items_.emplace(k, it);
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  prune();
  return *this;
}

Expr& Expr::operator-=(const Expr& o) {
  for (const auto& [k, it] : o.items_) items_.emplace(k, it);
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  prune();
  return *this;
}

Expr& Expr::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    items_.clear();
    return *this;
  }
  for (auto& [m, v] : terms_) v *= c;
  return *this;
}

Expr operator*(const Expr& a, const Expr& b) {
  Expr r;
  r.items_ = a.items_;
  for (const auto& [k, it] : b.items_) r.items_.emplace(k, it);
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) {
      Monomial m = ma;
      for (const auto& [k, pw] : mb) m[k] += pw;
      r.add_term(m, ca * cb);
    }
  }
  r.prune();
  return r;
}

Expr Expr::pow(int n) const {
  if (n < 0) throw std::invalid_argument("negative power of an expression");
  Expr r = constant(Rational(1));
  for (int i = 0; i < n; ++i) r = r * *this;
  return r;
}

Expr Expr::substitute(const std::string& key, const Expr& e) const {
  Expr r;
  for (const auto& [m, c] : terms_) {
    Monomial rest = m;
    int pw = 0;
    auto it = rest.find(key);
    if (it != rest.end()) {
      pw = it->second;
      rest.erase(it);
    }
    Expr t;
    for (const auto& [k, p] : rest) t.items_.emplace(k, items_.at(k));
    t.add_term(rest, c);
    r += pw ? t * e.pow(pw) : t;
  }
  return r;
}

namespace {

class ExprParser {
 public:
  explicit ExprParser(const std::string& s) : s_(s) {}

  Expr parse_all() {
    Expr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  const std::string& s_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression '" + s_ + "' at column " + std::to_string(pos_) + ": " + msg);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }
  Integer integer() {
    skip();
    size_t st = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (st == pos_) fail("expected integer");
    return Integer(s_.substr(st, pos_ - st));
  }

  Expr expr() {
    Expr e;
    bool first = true;
    for (;;) {
      skip();
      int sign = 1;
      if (accept('+')) {
      } else if (accept('-')) {
        sign = -1;
      } else if (!first) {
        break;
      }
      Expr t = term();
      if (sign < 0) t *= Rational(-1);
      e += t;
      first = false;
      skip();
      if (pos_ >= s_.size() || s_[pos_] == ')') break;
    }
    return e;
  }

  Expr term() {
    Expr t = factor();
    while (accept('*')) t = t * factor();
    return t;
  }

  Expr factor() {
    Expr b = primary();
    if (accept('^')) {
      Integer n = integer();
      if (n < 0 || n > 64) fail("bad exponent");
      b = b.pow(static_cast<int>(n.get_si()));
    }
    return b;
  }

  std::string bracket() {
    if (!accept('[')) fail("expected '['");
    size_t st = pos_;
    int depth = 1;
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '[') ++depth;
      if (c == ']' && --depth == 0) break;
      ++pos_;
    }
    if (pos_ >= s_.size()) fail("unterminated '['");
    std::string in = s_.substr(st, pos_ - st);
    ++pos_;
    return in;
  }

  // Affine upper limit in p: p, p-1, (2p+1), 3.
  Linear upper() {
    skip();
    bool paren = accept('(');
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
      bool num = false;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        coef = integer().get_si();
        num = true;
      }
      if (pos_ < s_.size() && s_[pos_] == 'p') {
        ++pos_;
        l.a += sign * coef;
      } else if (num) {
        l.b += sign * coef;
      } else {
        fail("expected upper limit in p");
      }
      first = false;
      if (!paren) {
        // unparenthesized form is [n]p[(+|-)m]
        if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-') && l.a != 0 && l.b == 0) continue;
        break;
      }
    }
    if (paren && !accept(')')) fail("expected ')'");
    return l;
  }

  Expr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      Integer n = integer();
      Integer d = 1;
      if (accept('/')) d = integer();
      if (d == 0) fail("zero denominator");
      Rational q(n, d);
      q.canonicalize();
      return Expr::constant(q);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t st = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::string w = s_.substr(st, pos_ - st);
      if ((w == "S" || w == "T" || w == "F") && peek('[')) {
        std::string inner = bracket();
        Item it;
        try {
          it.desc = parse_descriptor(inner);
        } catch (const ParseError& e) {
          fail(e.what());
        }
        if (w == "S") {
          it.kind = ItemKind::Sum;
        } else if (w == "T") {
          it.kind = ItemKind::Term;
          if (it.desc->uses_param()) fail("T[...] summand may not use p");
        } else {
          it.kind = ItemKind::Finite;
          if (!accept('@')) fail("expected '@' after F[...]");
          it.upper = upper();
        }
        return Expr::item(it);
      }
      if (!find_atom(w)) fail("unknown atom '" + w + "'");
      Item it;
      it.kind = ItemKind::Atom;
      it.atom = w;
      return Expr::item(it);
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

struct PrefixCache {
  std::mutex mu;
  std::map<std::string, std::vector<Rational>> v;
};

PrefixCache& prefix_cache() {
  static PrefixCache c;
  return c;
}

Rational finite_value(const Item& it, long p) {
  long top = Linear{it.upper.a, it.upper.b, 0}.at(p, 0);
  if (top <= 0) return Rational(0);
  if (it.desc->uses_param()) return partial_exact(*it.desc, top, p);
  if (!it.desc->inner.empty()) return partial_exact(*it.desc, top);
  std::string key = it.desc->str();
  auto& pc = prefix_cache();
  {
    std::lock_guard<std::mutex> lock(pc.mu);
    auto& v = pc.v[key];
    if (static_cast<long>(v.size()) > top) return v[static_cast<size_t>(top)];
  }
  std::vector<Rational> local;
  {
    std::lock_guard<std::mutex> lock(pc.mu);
    local = pc.v[key];
  }
  if (local.empty()) local.emplace_back(0);
  while (static_cast<long>(local.size()) <= top) {
    long k = static_cast<long>(local.size());
    local.push_back(local.back() + term_exact(*it.desc, k));
  }
  Rational r = local[static_cast<size_t>(top)];
  std::lock_guard<std::mutex> lock(pc.mu);
  auto& v = pc.v[key];
  if (local.size() > v.size()) v.swap(local);
  return r;
}

Rational exact_item(const Item& it, std::optional<long> p) {
  if (!p) throw std::invalid_argument("item '" + it.key() + "' needs a parameter value");
  if (it.kind == ItemKind::Term) return term_exact(*it.desc, *p, *p);
  if (it.kind == ItemKind::Finite) return finite_value(it, *p);
  throw std::invalid_argument("item '" + it.key() + "' has no exact value");
}

}  // namespace

Expr parse_expression(const std::string& text) {
  ExprParser p(text);
  return p.parse_all();
}

Rational eval_exact(const Expr& e, std::optional<long> p) {
  Rational total(0);
  for (const auto& [m, c] : e.terms()) {
    Rational t = c;
    for (const auto& [k, pw] : m) {
      Rational v = exact_item(e.item_of(k), p);
      for (int i = 0; i < pw; ++i) t *= v;
      if (t == 0) break;
    }
    total += t;
  }
  return total;
}

NumValue eval_numeric(const Expr& e, const EvalConfig& cfg, std::optional<long> p) {
  const long bits = working_bits(cfg.digits);
  std::map<std::string, NumValue> vals;
  for (const auto& [k, it] : e.items()) {
    NumValue v;
    switch (it.kind) {
      case ItemKind::Atom:
        v = atom_value(it.atom, cfg);
        break;
      case ItemKind::Sum: {
        EvalResult r = global_evaluator().evaluate(*it.desc, cfg, it.desc->uses_param() ? p : std::nullopt);
        v.value = r.value;
        v.bound = r.bound.to_double();
        break;
      }
      case ItemKind::Term:
      case ItemKind::Finite:
        v.value = HPReal(exact_item(it, p), bits);
        v.bound = std::fabs(v.value.to_double()) * std::ldexp(1.0, -static_cast<int>(bits) + 1);
        break;
    }
    vals.emplace(k, std::move(v));
  }
  NumValue out;
  out.value = HPReal(bits);
  double ulp = std::ldexp(1.0, -static_cast<int>(bits) + 2);
  for (const auto& [m, c] : e.terms()) {
    HPReal t(c, bits);
    double cabs = std::fabs(c.get_d());
    double mag = 1;
    int nops = 1;
    for (const auto& [k, pw] : m) {
      const NumValue& v = vals.at(k);
      t *= pow(v.value, pw);
      mag *= std::pow(std::fabs(v.value.to_double()), pw);
      nops += pw;
    }
    double prop = 0;
    for (const auto& [k, pw] : m) {
      const NumValue& v = vals.at(k);
      double x = std::fabs(v.value.to_double());
      double others = 1;
      for (const auto& [k2, pw2] : m)
        if (k2 != k) others *= std::pow(std::fabs(vals.at(k2).value.to_double()), pw2);
      // mean value bound for (x + b)^n - x^n
      prop += others * pw * std::pow(x + v.bound, pw - 1) * v.bound;
    }
    out.value += t;
    out.bound += cabs * (prop + mag * nops * ulp);
  }
  out.bound += std::fabs(out.value.to_double()) * ulp;
  return out;
}

}  // namespace esum
