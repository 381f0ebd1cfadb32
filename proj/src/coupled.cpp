#include "esum/coupled.hpp"

#include <cmath>
#include <algorithm>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

namespace esum {

namespace {

using HProd = std::map<std::pair<int, int>, int>;     // (sym, order) -> power
using LinMap = std::map<std::pair<long, long>, int>;  // a*i + b -> power

// c(i, q) = a*(i + sg*q) + b
struct Shape {
  long a = 1;
  long b = 0;
  int sg = 1;
};

Rational rpow(const Rational& x, int e) {
  Rational r = 1;
  for (int i = 0; i < std::abs(e); ++i) r *= x;
  if (e < 0) r = 1 / r;
  r.canonicalize();
  return r;
}

// Primitive a*i + b (a > 0) and the constant c with a_in*i + b_in = c*(a*i + b).
std::pair<std::pair<long, long>, long> primitive(long a, long b) {
  long g = std::gcd(a, b);
  if (g == 0) g = 1;
  if (a < 0) g = -g;
  return {{a / g, b / g}, g};
}

std::string hprod_str(const HProd& g) {
  std::string s;
  for (const auto& [k, e] : g) s += sym_char(static_cast<Sym>(k.first)) + std::to_string(k.second) + "^" + std::to_string(e);
  return s.empty() ? "1" : s;
}

std::string lin_str(const LinMap& r) {
  std::string s;
  for (const auto& [ab, e] : r) s += "(" + std::to_string(ab.first) + "," + std::to_string(ab.second) + ")^" + std::to_string(e);
  return s;
}

// Sum of c * prod (d*q + n)^-e.
struct CoefFn {
  struct Term {
    Rational c;
    LinMap f;
  };
  std::vector<Term> terms;

  static CoefFn constant(const Rational& c) {
    CoefFn r;
    if (c != 0) r.terms.push_back({c, {}});
    return r;
  }
  // c * (d*q + n)^-e
  static CoefFn factor(const Rational& c, long d, long n, int e) {
    if (d == 0) return constant(c * rpow(Rational(n), -e));
    auto [ab, g] = primitive(d, n);
    CoefFn r;
    r.terms.push_back({c * rpow(Rational(g), -e), {{ab, e}}});
    return r;
  }
  CoefFn operator*(const CoefFn& o) const {
    CoefFn r;
    for (const auto& x : terms)
      for (const auto& y : o.terms) {
        Term t{x.c * y.c, x.f};
        for (const auto& [ab, e] : y.f) t.f[ab] += e;
        r.terms.push_back(std::move(t));
      }
    r.merge();
    return r;
  }
  CoefFn& operator+=(const CoefFn& o) {
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    merge();
    return *this;
  }
  void merge() {
    std::map<LinMap, Rational> m;
    for (const auto& t : terms) m[t.f] += t.c;
    terms.clear();
    for (auto& [f, c] : m)
      if (c != 0) terms.push_back({c, f});
  }
  bool singular(long q) const {
    for (const auto& t : terms)
      for (const auto& [ab, e] : t.f)
        if (ab.first * q + ab.second == 0) return true;
    return false;
  }
  void roots(std::vector<long>& out) const {
    for (const auto& t : terms)
      for (const auto& [ab, e] : t.f)
        if (ab.second % ab.first == 0) out.push_back(-ab.second / ab.first);
  }
  HPReal eval(long q, long bits) const {
    HPReal s(bits);
    for (const auto& t : terms) {
      HPReal v(t.c, bits);
      for (const auto& [ab, e] : t.f) v *= pow(HPReal(ab.first * q + ab.second, bits), -e);
      s += v;
    }
    return s;
  }
  Expansion expansion(int order, long bits) const {
    Expansion s(order, bits);
    for (const auto& t : terms) {
      Expansion v = Expansion::constant(HPReal(t.c, bits), order, bits);
      for (const auto& [ab, e] : t.f) v = v * Expansion::linear_power(ab.first, Rational(ab.second), e, order, bits);
      s += v;
    }
    return s;
  }
  bool empty() const { return terms.empty(); }
};

enum class Kind { Const, One, G, U, W, Q, V };

struct PieceKind {
  Kind kind = Kind::One;
  HProd g;
  LinMap r;      // Const: the summand is g*r; U: r holds the single factor
  Shape sh;      // W, Q, V
  int s = 1;     // W, V
  long shift = 0;  // G: g at q + shift

  std::string key() const {
    std::ostringstream os;
    os << static_cast<int>(kind) << '|' << hprod_str(g) << '|' << lin_str(r) << '|' << sh.a << ',' << sh.b << ',' << sh.sg << '|' << s
       << '|' << shift;
    return os.str();
  }
};

struct Piece {
  CoefFn coef;
  PieceKind kind_of;
};

void add_piece(std::map<std::string, Piece>& out, const PieceKind& sp, const CoefFn& c) {
  if (c.empty()) return;
  auto [it, fresh] = out.try_emplace(sp.key(), Piece{c, sp});
  if (!fresh) it->second.coef += c;
}

struct Root {
  Rational rho;  // the root is rho + sig*q
  int sig = 0;
  int m = 0;
};

// Partial fractions in i of  c0 * g(i) * r(i) * c(i,q)^-t  summed over i >= 1
// (or i = 1..q when finite). Coefficients are functions of q. With sg = -1
// the term i = q is left out of every piece.
void decompose(std::map<std::string, Piece>& out, const Rational& c0, const HProd& g, const LinMap& r,
               const Shape* sh, int t, bool finite) {
  Rational K0 = c0;
  std::vector<Root> roots;
  for (const auto& [ab, m] : r) {
    K0 *= rpow(Rational(ab.first), -m);
    Rational rho(-ab.second, ab.first);
    rho.canonicalize();
    bool merged = false;
    for (auto& x : roots)
      if (x.sig == 0 && x.rho == rho) {
        x.m += m;
        merged = true;
      }
    if (!merged) roots.push_back({rho, 0, m});
  }
  if (sh && t > 0) {
    K0 *= rpow(Rational(sh->a), -t);
    Rational rho(-sh->b, sh->a);
    rho.canonicalize();
    roots.push_back({rho, -sh->sg, t});
  }
  // (rho_l - rho_j)^-e
  auto diff_pow = [&](size_t l, size_t j, int e) -> CoefFn {
    Rational mu = roots[l].rho - roots[j].rho;
    int lam = roots[l].sig - roots[j].sig;
    if (lam == 0) return CoefFn::constant(rpow(mu, -e));
    // lam*q + mu = lam*(q + lam*mu)
    Rational nu = mu * lam;
    nu.canonicalize();
    Rational sgn = (lam < 0 && e % 2) ? -1 : 1;
    long d = nu.get_den().get_si(), n = nu.get_num().get_si();
    return CoefFn::factor(sgn * rpow(Rational(d), e), d, n, e);
  };
  auto binom_neg = [](int m, int n) {  // C(-m, n)
    Integer b = 1;
    for (int i = 1; i <= n; ++i) b = b * (m + i - 1) / i;
    return Rational(n % 2 ? -b : b);
  };
  for (size_t l = 0; l < roots.size(); ++l) {
    for (int s = 1; s <= roots[l].m; ++s) {
      CoefFn A;
      std::vector<size_t> others;
      for (size_t j = 0; j < roots.size(); ++j)
        if (j != l) others.push_back(j);
      std::function<void(size_t, int, CoefFn)> rec = [&](size_t idx, int rem, CoefFn acc) {
        if (idx == others.size()) {
          if (rem == 0) A += acc;
          return;
        }
        size_t j = others[idx];
        for (int n = 0; n <= rem; ++n)
          rec(idx + 1, rem - n, acc * CoefFn::constant(binom_neg(roots[j].m, n)) * diff_pow(l, j, roots[j].m + n));
      };
      rec(0, roots[l].m - s, CoefFn::constant(K0));
      if (A.empty()) continue;
      PieceKind sp;
      sp.g = g;
      const bool minus = sh && sh->sg < 0;
      PieceKind at_q;
      at_q.kind = Kind::G;
      at_q.g = g;
      if (roots[l].sig == 0) {
        long al = roots[l].rho.get_den().get_si(), bl = -roots[l].rho.get_num().get_si();
        CoefFn c = A * CoefFn::constant(rpow(Rational(al), s));
        if (finite) {
          sp.kind = Kind::U;
          sp.r = {{{al, bl}, s}};
          add_piece(out, sp, c);
        } else if (s >= 2) {
          sp.kind = Kind::Const;
          sp.r = {{{al, bl}, s}};
          add_piece(out, sp, c);
          if (minus) add_piece(out, at_q, c * CoefFn::factor(Rational(-1), al, bl, s));
        } else if (bl != 0) {
          // paired with -A/i:  A*al/(al i + bl) - A/i = -A*bl / (i (al i + bl))
          sp.kind = Kind::Const;
          sp.r = {{{1, 0}, 1}};
          sp.r[{al, bl}] += 1;
          CoefFn cb = A * CoefFn::constant(Rational(-bl));
          add_piece(out, sp, cb);
          if (minus) add_piece(out, at_q, cb * CoefFn::factor(Rational(-1), 1, 0, 1) * CoefFn::factor(Rational(1), al, bl, 1));
        }
      } else {
        sp.sh = *sh;
        sp.s = s;
        CoefFn c = A * CoefFn::constant(rpow(Rational(sh->a), s));
        sp.kind = finite ? Kind::V : (s >= 2 ? Kind::W : Kind::Q);
        if (sp.kind == Kind::Q) sp.s = 1;
        add_piece(out, sp, c);
      }
    }
  }
}

struct GTerm {
  Rational c;
  HProd g;
  LinMap r;
};

void step_factor(LinMap& r, int sym, int order, int times) {
  if (times == 0) return;
  if (static_cast<Sym>(sym) == Sym::H) r[{1, 0}] += order * times;
  else r[{2, -1}] += order * times;
}

// g(j) - g(j-1) as a sum of c * g'(j) * r(j).
std::vector<GTerm> delta_g(const HProd& g) {
  std::vector<GTerm> out;
  std::vector<std::pair<std::pair<int, int>, int>> fs(g.begin(), g.end());
  std::function<void(size_t, GTerm, bool)> rec = [&](size_t idx, GTerm acc, bool any) {
    if (idx == fs.size()) {
      if (any) {
        acc.c = -acc.c;
        out.push_back(acc);
      }
      return;
    }
    auto [key, e] = fs[idx];
    Integer b = 1;
    for (int k = 0; k <= e; ++k) {
      GTerm n = acc;
      n.c *= Rational(k % 2 ? -b : b);
      if (e - k) n.g[key] = e - k;
      step_factor(n.r, key.first, key.second, k);
      rec(idx + 1, n, any || k > 0);
      b = b * (e - k) / (k + 1);
    }
  };
  rec(0, GTerm{1, {}, {}}, false);
  return out;
}

struct Body {
  std::vector<GTerm> terms;
  Shape sh;
  int t = 0;
};

Body normalize_body(const SumDescriptor& d) {
  if (d.alternating) throw UnsupportedError("alternating coupled inner sum");
  Body b;
  b.terms.push_back(GTerm{1, {}, {}});
  for (const auto& f : d.factors) {
    if (f.sym == Sym::A) throw UnsupportedError("alternating harmonic inside a coupled inner sum");
    if (f.arg.a != 1 || (f.arg.b != 0 && f.arg.b != -1))
      throw UnsupportedError("coupled inner sum with harmonic argument " + f.arg.str());
    std::pair<int, int> key{static_cast<int>(f.sym), f.order};
    std::vector<GTerm> next;
    for (const auto& t : b.terms) {
      if (f.arg.b == 0) {
        GTerm n = t;
        n.g[key] += f.power;
        next.push_back(n);
        continue;
      }
      // X(i-1) = X(i) - x(i)
      Integer bin = 1;
      for (int k = 0; k <= f.power; ++k) {
        GTerm n = t;
        n.c *= Rational(k % 2 ? -bin : bin);
        if (f.power - k) n.g[key] += f.power - k;
        step_factor(n.r, key.first, key.second, k);
        next.push_back(n);
        bin = bin * (f.power - k) / (k + 1);
      }
    }
    b.terms = next;
  }
  Rational scale = 1;
  bool have = false;
  for (const auto& l : d.linear) {
    if (l.power <= 0) throw UnsupportedError("numerator factor in a coupled inner sum");
    if (l.base.c != 0) {
      if (have) throw UnsupportedError("two coupled factors in one inner sum");
      if (l.base.c != l.base.a && !(l.base.c == -l.base.a && l.base.b == 0))
        throw UnsupportedError("coupled factor " + l.base.str('i', 'k'));
      auto [ab, g] = primitive(l.base.a, l.base.b);
      b.sh = {ab.first, ab.second, l.base.c > 0 ? 1 : -1};
      b.t = l.power;
      scale *= rpow(Rational(g), -l.power);
      have = true;
      continue;
    }
    if (l.base.a == 0) {
      scale *= rpow(Rational(l.base.b), -l.power);
      continue;
    }
    auto [ab, g] = primitive(l.base.a, l.base.b);
    scale *= rpow(Rational(g), -l.power);
    for (auto& t : b.terms) t.r[ab] += l.power;
  }
  if (!have) throw std::logic_error("inner sum is not coupled");
  for (auto& t : b.terms) t.c *= scale;
  return b;
}

DescPtr make_desc(const HProd& g, const LinMap& r) {
  SumDescriptor d;
  for (const auto& [k, e] : g) d.factors.push_back(Factor{static_cast<Sym>(k.first), k.second, Linear{1, 0, 0}, e});
  for (const auto& [ab, e] : r) d.linear.push_back(LinearFactor{Linear{ab.first, ab.second, 0}, e});
  return std::make_shared<SumDescriptor>(canonicalize(d));
}

using SeqPtr = std::shared_ptr<const CoupledSequence>;

const HPReal& at(const CoupledSequence& s, long q) {
  return s.vals.size() == 1 ? s.vals[0] : s.vals[static_cast<size_t>(q)];
}

struct Ctx {
  Evaluator& ev;
  EvalConfig cfg;
  long N;
  long bits;
  int order;
  std::string suffix;
};

std::mutex g_mu;
std::map<std::string, SeqPtr> g_cache;

double to_d(const HPReal& x) { return std::fabs(x.to_double()); }

HPReal engine_sum(Ctx& cx, const HProd& g, const LinMap& r, double& err) {
  EvalConfig c = cx.cfg;
  EvalResult er = cx.ev.evaluate(*make_desc(g, r), c);
  err += to_d(er.bound);
  return er.value.with_prec(cx.bits);
}

// Exact g(j) from harmonic tables.
Rational g_exact(const HProd& g, long j) {
  Rational v = 1;
  for (const auto& [k, e] : g) v *= rpow(harmonic(static_cast<Sym>(k.first), j, k.second), e);
  return v;
}

SeqPtr get(Ctx& cx, const PieceKind& sp);

Expansion g_expansion(Ctx& cx, const HProd& g) {
  Expansion e = Expansion::constant(HPReal(1, cx.bits), cx.order, cx.bits);
  for (const auto& [k, pw] : g)
    e = e * cx.ev.symbol_expansion(static_cast<Sym>(k.first), k.second, cx.order, cx.bits, cx.cfg.gamma_delta).pow(pw);
  return e;
}

std::vector<HPReal> g_values(Ctx& cx, const HProd& g, long top) {
  NumericTables& T = cx.ev.tables(cx.bits);
  std::vector<HPReal> v(static_cast<size_t>(top) + 1, HPReal(1, cx.bits));
  for (const auto& [k, pw] : g) {
    auto tab = T.get(static_cast<Sym>(k.first), k.second, top);
    for (long j = 0; j <= top; ++j) v[static_cast<size_t>(j)] *= pow((*tab)[static_cast<size_t>(j)], pw);
  }
  return v;
}

// Constant b = 0 part of a decaying expansion must be rounding residue.
void drop_constant(Expansion& e, const std::string& what) {
  HPReal m = e.max_abs_upto(0);
  if (!m.is_zero() && m.log10_abs() > -static_cast<double>(bits_to_digits(e.bits())) + 12)
    throw std::logic_error(what + ": increment does not decay");
  e.zero_upto(0);
}

void check_fit(Ctx& cx, const CoupledSequence& s, const std::string& what) {
  HPReal thr = ten_pow(-(cx.cfg.digits + 3), cx.bits) * max(HPReal(1, cx.bits), abs(s.vals.back()));
  if (HPReal(s.exp_err, cx.bits) > thr)
    throw InsufficientOrderError("coupled sum '" + what + "' expansion misfit " + std::to_string(s.exp_err));
}

SeqPtr build(Ctx& cx, const PieceKind& sp) {
  auto out = std::make_shared<CoupledSequence>(CoupledSequence{{}, Expansion(cx.order, cx.bits), 0, 0});
  const long N = cx.N, bits = cx.bits;
  switch (sp.kind) {
    case Kind::One:
      out->vals.emplace_back(1, bits);
      out->exp = Expansion::constant(HPReal(1, bits), cx.order, bits);
      return out;
    case Kind::Const: {
      double err = 0;
      out->vals.push_back(engine_sum(cx, sp.g, sp.r, err));
      out->err = err;
      out->exp = Expansion::constant(out->vals[0], cx.order, bits);
      return out;
    }
    case Kind::G: {
      auto gv = g_values(cx, sp.g, N + std::max(0L, sp.shift));
      for (long q = 0; q <= N; ++q)
        out->vals.push_back(q + sp.shift < 0 ? HPReal(bits) : gv[static_cast<size_t>(q + sp.shift)]);
      out->exp = g_expansion(cx, sp.g).compose(1, Rational(sp.shift));
      out->err = std::ldexp(to_d(out->vals.back()) * N, -static_cast<int>(bits) + 4);
      return out;
    }
    case Kind::U: {
      auto [ab, s] = *sp.r.begin();
      auto gv = g_values(cx, sp.g, N);
      out->vals.reserve(static_cast<size_t>(N) + 1);
      out->vals.emplace_back(bits);
      for (long j = 1; j <= N; ++j)
        out->vals.push_back(out->vals.back() + gv[static_cast<size_t>(j)] * pow(HPReal(ab.first * j + ab.second, bits), -s));
      Expansion F = partial_sum(g_expansion(cx, sp.g) *
                                Expansion::linear_power(ab.first, Rational(ab.second), s, cx.order, bits));
      auto bs = bootstrap_constant(out->vals[static_cast<size_t>(N / 2)], N / 2, out->vals.back(), N, F);
      F.at(0, 0) += bs.constant;
      out->exp = F;
      out->exp_err = to_d(bs.disagreement);
      out->err = std::ldexp(to_d(out->vals.back()) * N, -static_cast<int>(bits) + 4);
      check_fit(cx, *out, sp.key());
      return out;
    }
    default:
      break;
  }

  // W, Q, V. With c(i, q) = a(i+q)+b the value at q+1 is the value at q
  // plus D(q); with c(i, q) = i-q the value at q is the value at q-1 plus D(q).
  const bool finite = sp.kind == Kind::V;
  const Shape sh = sp.sh;
  const bool minus = sh.sg < 0;
  const int s = sp.s;
  const long lag = minus ? 0 : 1;
  std::map<std::string, Piece> pm;
  std::vector<GTerm> taus = delta_g(sp.g);
  for (const auto& tau : taus) decompose(pm, minus ? tau.c : -tau.c, tau.g, tau.r, &sh, s, finite);
  if (sp.g.empty()) {
    if (minus) add_piece(pm, PieceKind{}, CoefFn::factor(Rational(1), -1, 1, s));
    else add_piece(pm, PieceKind{}, CoefFn::factor(Rational(-1), sh.a, sh.a + sh.b, s));
  }
  if (minus && sp.kind == Kind::Q) {
    // the left-out reference terms -g(i)/i at i = q and i = q-1
    PieceKind g0;
    g0.kind = Kind::G;
    g0.g = sp.g;
    add_piece(pm, g0, CoefFn::factor(Rational(1), 1, 0, 1));
    g0.shift = -1;
    add_piece(pm, g0, CoefFn::factor(Rational(-1), 1, -1, 1));
  }
  if (finite) {
    PieceKind g0;
    g0.kind = Kind::G;
    g0.g = sp.g;
    add_piece(pm, g0, CoefFn::factor(Rational(1), 2 * sh.a, sh.a + sh.b, s));
    g0.shift = 1;
    add_piece(pm, g0, CoefFn::factor(Rational(1), 2 * sh.a, 2 * sh.a + sh.b, s));
  }
  std::vector<Piece> pieces;
  std::vector<SeqPtr> prims;
  std::vector<long> sing;
  for (auto& [k, p] : pm) {
    pieces.push_back(p);
    prims.push_back(get(cx, p.kind_of));
    p.coef.roots(sing);
  }

  // Base value at q = 0.
  HPReal base(bits);
  double err = 0;
  if (sp.kind == Kind::W) {
    base = engine_sum(cx, sp.g, {{{sh.a, sh.b}, s}}, err);
  } else if (sp.kind == Kind::Q && sh.b != 0) {
    LinMap r{{{1, 0}, 1}};
    r[{sh.a, sh.b}] += 1;
    base = engine_sum(cx, sp.g, r, err) * HPReal(Rational(-sh.b, sh.a), bits);
  }

  // D(q) with the coupled factor frozen at q.
  auto direct = [&](long q) -> HPReal {
    HPReal d(bits);
    if (!finite) {
      auto [ab, gc] = primitive(sh.a, sh.sg * sh.a * q + sh.b);
      for (const auto& tau : taus) {
        LinMap r = tau.r;
        r[ab] += s;
        Rational c = (minus ? tau.c : -tau.c) * rpow(Rational(gc), -s);
        d += engine_sum(cx, tau.g, r, err) * HPReal(c, bits);
      }
      if (sp.g.empty() && minus && q != 1) d += HPReal(rpow(Rational(1 - q), -s), bits);
      if (minus && sp.kind == Kind::Q) {
        Rational x = q > 0 ? g_exact(sp.g, q) / q : Rational(0);
        if (q >= 2) x -= g_exact(sp.g, q - 1) / (q - 1);
        d += HPReal(x, bits);
      }
      if (sp.g.empty() && !minus) d -= HPReal(rpow(Rational(sh.a * (q + 1) + sh.b), -s), bits);
      return d;
    }
    Rational acc = 0;
    auto f = [&](long j) { return rpow(Rational(sh.a * (j + q) + sh.b), -s); };
    for (long j = 1; j <= q; ++j) acc -= (g_exact(sp.g, j) - g_exact(sp.g, j - 1)) * f(j);
    acc -= g_exact(sp.g, 0) * f(1);
    acc += g_exact(sp.g, q) * f(q + 1) + g_exact(sp.g, q + 1) * f(q + 2);
    return HPReal(acc, bits);
  };

  out->vals.reserve(static_cast<size_t>(N) + 1);
  out->vals.push_back(base);
  double maxv = to_d(base);
  for (long p = 1; p <= N; ++p) {
    const long q = p - lag;
    HPReal d(bits);
    if (std::find(sing.begin(), sing.end(), q) != sing.end()) {
      d = direct(q);
    } else {
      for (size_t i = 0; i < pieces.size(); ++i) {
        HPReal c = pieces[i].coef.eval(q, bits);
        err += to_d(c) * prims[i]->err;
        d += c * at(*prims[i], q);
      }
    }
    out->vals.push_back(out->vals.back() + d);
    maxv = std::max(maxv, to_d(out->vals.back()));
  }
  out->err = err + std::ldexp(maxv * N * 4, -static_cast<int>(bits) + 4);

  Expansion D(cx.order, bits);
  for (size_t i = 0; i < pieces.size(); ++i) D += pieces[i].coef.expansion(cx.order, bits) * prims[i]->exp;
  drop_constant(D, sp.key());
  Expansion F = partial_sum(D);
  // value(p) = C + F(p - lag)
  HPReal C = out->vals.back() - F.eval(N - lag);
  HPReal mis = out->vals[static_cast<size_t>(N / 2)] - F.eval(N / 2 - lag) - C;
  out->exp = lag ? F.compose(1, Rational(-lag)) : F;
  out->exp.at(0, 0) += C;
  out->exp_err = to_d(mis);
  check_fit(cx, *out, sp.key());
  return out;
}

SeqPtr get(Ctx& cx, const PieceKind& sp) {
  std::string key = sp.key() + cx.suffix;
  {
    std::lock_guard<std::mutex> lock(g_mu);
    auto it = g_cache.find(key);
    if (it != g_cache.end()) return it->second;
  }
  SeqPtr s = build(cx, sp);
  std::lock_guard<std::mutex> lock(g_mu);
  g_cache.emplace(key, s);
  return s;
}

// Shape and offset for an inner sum: q = k + beta.
struct Top {
  Body body;
  long beta = 0;
  bool finite = false;
};

Top top_of(const InnerSum& in) {
  Top t;
  t.body = normalize_body(*in.body);
  t.finite = !in.infinite;
  if (t.finite) {
    if (t.body.sh.sg < 0) throw UnsupportedError("finite inner sum with an (i-k) denominator");
    if (in.upper.a != 1 || in.upper.b > 0) throw UnsupportedError("coupled inner sum with upper limit " + in.upper.str());
    t.beta = in.upper.b;
    // a(i + k) + b = a(i + q) + (b - a*beta)
    auto [ab, g] = primitive(t.body.sh.a, t.body.sh.b - t.body.sh.a * t.beta);
    t.body.sh = {ab.first, ab.second, 1};
    for (auto& x : t.body.terms) x.c *= rpow(Rational(g), -t.body.t);
  }
  return t;
}

SumDescriptor substituted(const SumDescriptor& body, long k) {
  SumDescriptor d = body;
  for (auto& l : d.linear) {
    l.base.b += l.base.c * k;
    l.base.c = 0;
  }
  return canonicalize(d);
}

}  // namespace

HPReal coupled_inner_at(Evaluator& ev, const InnerSum& in, long k, const EvalConfig& cfg) {
  SumDescriptor d = substituted(*in.body, k);
  if (!in.infinite) return HPReal(partial_exact(d, in.upper.at(k, 0)), working_bits(cfg.digits));
  // the tail expansion in 1/i needs i well beyond k
  EvalConfig c = cfg;
  c.K = std::max(cfg.K, 16 * k);
  return ev.evaluate(d, c).value;
}

CoupledSequence coupled_inner(Evaluator& ev, const InnerSum& in, long N, const EvalConfig& cfg) {
  Top top = top_of(in);
  Ctx cx{ev, cfg, N, working_bits(cfg.digits), cfg.B, ""};
  {
    std::ostringstream os;
    os << "|N=" << N << "|" << cfg.key();
    cx.suffix = os.str();
  }
  const long bits = cx.bits;
  std::map<std::string, Piece> pm;
  for (const auto& t : top.body.terms) decompose(pm, t.c, t.g, t.r, &top.body.sh, top.body.t, top.finite);
  std::vector<Piece> pieces;
  std::vector<SeqPtr> prims;
  std::vector<long> sing;
  for (auto& [k, p] : pm) {
    pieces.push_back(p);
    prims.push_back(get(cx, p.kind_of));
    p.coef.roots(sing);
  }
  CoupledSequence out{{}, Expansion(cx.order, bits), 0, 0};
  out.vals.reserve(static_cast<size_t>(N) + 1);
  out.vals.emplace_back(bits);
  double err = 0;
  for (long k = 1; k <= N; ++k) {
    long q = k + top.beta;
    HPReal v(bits);
    if (std::find(sing.begin(), sing.end(), q) != sing.end()) {
      if (top.finite) {
        v = coupled_inner_at(ev, in, k, cfg).with_prec(bits);
      } else {
        EvalResult r = ev.evaluate(substituted(*in.body, k), cfg);
        v = r.value.with_prec(bits);
        err = std::max(err, to_d(r.bound));
      }
    } else {
      double e = 0;
      for (size_t i = 0; i < pieces.size(); ++i) {
        HPReal c = pieces[i].coef.eval(q, bits);
        e += to_d(c) * prims[i]->err;
        v += c * at(*prims[i], q);
      }
      err = std::max(err, e);
    }
    out.vals.push_back(std::move(v));
  }
  out.err = err + std::ldexp(to_d(out.vals.back()) * 64, -static_cast<int>(bits) + 4);
  Expansion E(cx.order, bits);
  for (size_t i = 0; i < pieces.size(); ++i) E += pieces[i].coef.expansion(cx.order, bits) * prims[i]->exp;
  if (top.beta != 0) E = E.compose(1, Rational(top.beta));
  out.exp = E;
  out.exp_err = to_d(E.eval(N / 2) - out.vals[static_cast<size_t>(N / 2)]);
  return out;
}

void clear_coupled_cache() {
  std::lock_guard<std::mutex> lock(g_mu);
  g_cache.clear();
}

}  // namespace esum
