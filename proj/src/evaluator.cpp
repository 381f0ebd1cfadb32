#include "esum/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "esum/coupled.hpp"

namespace esum {

std::string EvalConfig::key() const {
  std::ostringstream os;
  os << "K=" << K << ",B=" << B << ",d=" << digits << ",g=" << gamma_delta.get_str();
  return os.str();
}

NumericTables::Table NumericTables::get(Sym s, int n, long max_index) {
  std::lock_guard<std::mutex> lock(mu_);
  auto& cur = t_[{static_cast<int>(s), n}];
  if (cur && static_cast<long>(cur->size()) > max_index) return cur;
  auto v = std::make_shared<std::vector<HPReal>>();
  if (cur) *v = *cur;
  if (v->empty()) v->emplace_back(bits_);
  v->reserve(static_cast<size_t>(max_index) + 1);
  HPReal step(bits_);
  while (static_cast<long>(v->size()) <= max_index) {
    long j = static_cast<long>(v->size());
    unsigned long base = static_cast<unsigned long>(s == Sym::h ? 2 * j - 1 : j);
    mpfr_set_ui(step.raw(), base, MPFR_RNDN);
    mpfr_pow_ui(step.raw(), step.raw(), static_cast<unsigned long>(n), MPFR_RNDN);
    mpfr_ui_div(step.raw(), 1, step.raw(), MPFR_RNDN);
    if (s == Sym::A && j % 2 == 0) mpfr_neg(step.raw(), step.raw(), MPFR_RNDN);
    HPReal next = v->back();
    mpfr_add(next.raw(), next.raw(), step.raw(), MPFR_RNDN);
    v->push_back(std::move(next));
  }
  cur = v;
  return cur;
}

NumericTables& Evaluator::tables(long bits) {
  std::lock_guard<std::mutex> lock(mu_);
  auto& t = tables_[bits];
  if (!t) t = std::make_unique<NumericTables>(bits);
  return *t;
}

void Evaluator::clear_cache() {
  std::lock_guard<std::mutex> lock(mu_);
  results_.clear();
  clear_coupled_cache();
}

Expansion Evaluator::symbol_expansion(Sym s, int n, int order, long bits, const Rational& gamma_delta) {
  if (s == Sym::A) throw std::invalid_argument("alternating harmonic numbers have no smooth expansion");
  std::ostringstream key;
  key << sym_char(s) << n << ':' << order << ':' << bits << ':' << gamma_delta.get_str();
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = sym_cache_.find(key.str());
    if (it != sym_cache_.end()) return it->second;
  }
  Expansion g = s == Sym::H ? Expansion::monomial(0, n, HPReal(1, bits), order, bits)
                            : Expansion::linear_power(2, Rational(-1), n, order, bits);
  Expansion e = partial_sum(g);
  HPReal c(bits);
  HPReal gam = gamma_bits(bits) + HPReal(gamma_delta, bits);
  if (s == Sym::H) {
    c = n == 1 ? gam : zeta_bits(n, bits);
  } else if (n == 1) {
    c = ln2_bits(bits) + gam / 2;
  } else {
    c = zeta_bits(n, bits) * (HPReal(1, bits) - HPReal::pow2(-n, bits));
  }
  e.at(0, 0) += c;
  std::lock_guard<std::mutex> lock(mu_);
  sym_cache_.emplace(key.str(), e);
  return e;
}

namespace {

struct Mode {
  long scale = 1;  // k = scale*j + delta
  long delta = 0;
};

bool uses_A(const SumDescriptor& d) {
  for (const auto& f : d.factors)
    if (f.sym == Sym::A) return true;
  return false;
}

// Numeric term of an inner-free descriptor at index k.
void term_float(mpfr_ptr out, const SumDescriptor& d, long k, long p,
                const std::vector<NumericTables::Table>& tabs, mpfr_ptr scratch) {
  mpfr_set_ui(out, 1, MPFR_RNDN);
  for (size_t i = 0; i < d.factors.size(); ++i) {
    const auto& f = d.factors[i];
    long idx = f.arg.at(k, 0);
    if (idx < 0) throw std::domain_error("negative harmonic index");
    const HPReal& v = (*tabs[i])[static_cast<size_t>(idx)];
    if (f.power == 1) {
      mpfr_mul(out, out, v.raw(), MPFR_RNDN);
    } else {
      mpfr_pow_ui(scratch, v.raw(), static_cast<unsigned long>(f.power), MPFR_RNDN);
      mpfr_mul(out, out, scratch, MPFR_RNDN);
    }
  }
  for (const auto& l : d.linear) {
    long v = l.base.at(k, p);
    if (l.power > 0) {
      if (v == 0) {
        mpfr_set_zero(out, 1);
        return;
      }
      mpfr_set_si(scratch, v, MPFR_RNDN);
      mpfr_pow_ui(scratch, scratch, static_cast<unsigned long>(l.power), MPFR_RNDN);
      mpfr_div(out, out, scratch, MPFR_RNDN);
    } else {
      mpfr_set_si(scratch, v, MPFR_RNDN);
      mpfr_pow_ui(scratch, scratch, static_cast<unsigned long>(-l.power), MPFR_RNDN);
      mpfr_mul(out, out, scratch, MPFR_RNDN);
    }
  }
  if (d.alternating && k % 2 == 0) mpfr_neg(out, out, MPFR_RNDN);
}

}  // namespace

EvalResult Evaluator::evaluate(const SumDescriptor& d, const EvalConfig& cfg, std::optional<long> p) {
  std::string key = d.str() + "|p=" + (p ? std::to_string(*p) : "-") + "|" + cfg.key();
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = results_.find(key);
    if (it != results_.end()) return it->second;
  }
  EvalResult r;
  try {
    r = evaluate_once(d, cfg, p);
  } catch (const PrecisionShortfall&) {
    if (!cfg.retry) throw;
    EvalConfig c2 = cfg;
    c2.K *= 4;
    c2.B += 8;
    c2.retry = false;
    r = evaluate_once(d, c2, p);
  } catch (const InsufficientOrderError&) {
    if (!cfg.retry) throw;
    EvalConfig c2 = cfg;
    c2.K *= 4;
    c2.B += 8;
    c2.retry = false;
    r = evaluate_once(d, c2, p);
  }
  std::lock_guard<std::mutex> lock(mu_);
  results_.emplace(key, r);
  return r;
}

EvalResult Evaluator::evaluate_once(const SumDescriptor& d, const EvalConfig& cfg, std::optional<long> p) {
  Validation val = validate(d);
  if (!val.ok) throw DivergenceError("'" + d.str() + "': " + val.reason);
  if (d.uses_param() && !p) throw std::invalid_argument("'" + d.str() + "' needs a parameter value");
  for (const auto& l : d.linear)
    if (l.power < 0 && l.base.a != 0)
      throw UnsupportedError("'" + d.str() + "': polynomial numerator factors are not supported");
  for (const auto& in : d.inner)
    if (uses_A(*in.body)) throw UnsupportedError("'" + d.str() + "': alternating harmonic inside an inner sum");

  const long bits = working_bits(cfg.digits);
  const int order = cfg.B;
  const long K = cfg.K + (cfg.K % 2);
  if (K < 16) throw std::invalid_argument("head cutoff must be >= 16");
  const long pv = p.value_or(0);
  const bool split = d.alternating || uses_A(d);

  NumericTables& T = tables(bits);
  HPReal scratch(bits), t(bits);

  // Inner sums: prefix tables for k-free finite bodies, tabulated values for
  // bodies coupled to k, a single value for k-free infinite bodies.
  enum class InnerKind { Prefix, Coupled, Constant };
  std::vector<InnerKind> ikind(d.inner.size(), InnerKind::Prefix);
  std::vector<std::vector<HPReal>> prefix(d.inner.size());
  std::vector<long> tops(d.inner.size());
  std::vector<Expansion> inner_exp(d.inner.size(), Expansion(order, bits));
  double inner_err_rel = 0, inner_val_rel = 0;
  for (size_t j = 0; j < d.inner.size(); ++j) {
    const auto& in = d.inner[j];
    const SumDescriptor& body = *in.body;
    if (body.uses_param()) {
      ikind[j] = InnerKind::Coupled;
      CoupledSequence cs = coupled_inner(*this, in, K, cfg);
      double lo = HUGE_VAL;
      for (long k = 1; k <= K; ++k) lo = std::min(lo, std::fabs(cs.vals[static_cast<size_t>(k)].to_double()));
      if (lo > 0) {
        inner_val_rel += in.power * cs.err / lo;
        inner_err_rel += in.power * cs.exp_err / lo;
      }
      prefix[j] = std::move(cs.vals);
      inner_exp[j] = std::move(cs.exp);
      continue;
    }
    if (in.infinite) {
      ikind[j] = InnerKind::Constant;
      EvalResult r = evaluate(body, cfg);
      prefix[j].push_back(r.value.with_prec(bits));
      inner_exp[j] = Expansion::constant(prefix[j][0], order, bits);
      if (!r.value.is_zero()) inner_val_rel += in.power * std::fabs(r.bound.to_double() / r.value.to_double());
      continue;
    }
    long top = std::max<long>(0, in.upper.at(K, 0));
    tops[j] = top;
    std::vector<NumericTables::Table> tabs;
    for (const auto& f : body.factors) tabs.push_back(T.get(f.sym, f.order, f.arg.at(top, 0)));
    auto& pre = prefix[j];
    pre.reserve(static_cast<size_t>(top) + 1);
    pre.emplace_back(bits);
    for (long i = 1; i <= top; ++i) {
      term_float(t.raw(), body, i, 0, tabs, scratch.raw());
      HPReal next = pre.back();
      mpfr_add(next.raw(), next.raw(), t.raw(), MPFR_RNDN);
      pre.push_back(std::move(next));
    }
  }
  auto inner_index = [&](size_t j, long k) -> size_t {
    if (ikind[j] == InnerKind::Coupled) return static_cast<size_t>(k);
    if (ikind[j] == InnerKind::Constant) return 0;
    return static_cast<size_t>(std::max<long>(0, d.inner[j].upper.at(k, 0)));
  };

  // Head.
  std::vector<NumericTables::Table> tabs;
  for (const auto& f : d.factors) tabs.push_back(T.get(f.sym, f.order, f.arg.at(K, 0)));
  HPReal head(bits);
  double abs_sum = 0;
  for (long k = 1; k <= K; ++k) {
    term_float(t.raw(), d, k, pv, tabs, scratch.raw());
    if (t.is_zero()) continue;
    for (size_t j = 0; j < d.inner.size(); ++j) {
      const HPReal& g = prefix[j][inner_index(j, k)];
      mpfr_pow_ui(scratch.raw(), g.raw(), static_cast<unsigned long>(d.inner[j].power), MPFR_RNDN);
      mpfr_mul(t.raw(), t.raw(), scratch.raw(), MPFR_RNDN);
    }
    mpfr_add(head.raw(), head.raw(), t.raw(), MPFR_RNDN);
    abs_sum += std::fabs(t.to_double());
  }

  EvalResult res;
  res.K = K;
  res.B = order;
  res.head_terms = K;

  // Inner partial-sum expansions with bootstrapped constants.
  auto symbol = [&](Sym s, int n) { return symbol_expansion(s, n, order, bits, cfg.gamma_delta); };
  auto factor_exp = [&](const Factor& f, Mode m) -> Expansion {
    long alpha = f.arg.a * m.scale;
    long beta = f.arg.a * m.delta + f.arg.b;
    Expansion e(order, bits);
    if (f.sym != Sym::A) {
      e = symbol(f.sym, f.order).compose(alpha, Rational(beta));
    } else {
      if (m.scale != 2) throw std::logic_error("alternating harmonic outside split mode");
      // A_{2m} = h_m - 2^-n H_m, A_{2m-1} = A_{2m} + (2m)^-n
      Expansion base = symbol(Sym::h, f.order) - symbol(Sym::H, f.order) * HPReal::pow2(-f.order, bits);
      long a2 = alpha / 2;
      if (beta % 2 == 0) {
        e = base.compose(a2, Rational(beta / 2));
      } else {
        long b2 = (beta + 1) / 2;
        e = base.compose(a2, Rational(b2)) + Expansion::linear_power(alpha, Rational(beta + 1), f.order, order, bits);
      }
    }
    return f.power == 1 ? e : e.pow(f.power);
  };
  auto linear_exp = [&](const LinearFactor& l, Mode m) -> Expansion {
    long alpha = l.base.a * m.scale;
    long beta = l.base.a * m.delta + l.base.b + l.base.c * pv;
    if (alpha == 0) {
      HPReal c = pow(HPReal(beta, bits), -l.power);
      return Expansion::constant(c, order, bits);
    }
    return Expansion::linear_power(alpha, Rational(beta), l.power, order, bits);
  };
  auto plain_exp = [&](const SumDescriptor& s, Mode m) -> Expansion {
    Expansion e = Expansion::constant(HPReal(1, bits), order, bits);
    for (const auto& f : s.factors) e = e * factor_exp(f, m);
    for (const auto& l : s.linear) e = e * linear_exp(l, m);
    return e;
  };

  for (size_t j = 0; j < d.inner.size(); ++j) {
    if (ikind[j] != InnerKind::Prefix) continue;
    Expansion g = plain_exp(*d.inner[j].body, Mode{});
    Expansion F = partial_sum(g);
    long m2 = tops[j];
    long m1 = m2 / 2;
    if (m1 < 8) throw std::invalid_argument("inner sum anchors too small");
    auto bs = bootstrap_constant(prefix[j][static_cast<size_t>(m1)], m1, prefix[j][static_cast<size_t>(m2)], m2, F);
    HPReal thr = ten_pow(-(cfg.digits + 3), bits) * max(HPReal(1, bits), abs(bs.constant));
    if (bs.disagreement > thr)
      throw InsufficientOrderError("inner sum '" + d.inner[j].body->str() + "' anchors disagree by " +
                                   bs.disagreement.to_string(3));
    F.at(0, 0) += bs.constant;
    inner_exp[j] = F;
    res.bootstrap.push_back(d.inner[j].body->str() + " = " + bs.constant.to_string(30));
    double gk = std::fabs(prefix[j].back().to_double());
    double dc = std::pow(10.0, std::max(bs.disagreement.log10_abs(), -(double)bits_to_digits(bits)));
    if (gk > 0) inner_err_rel += d.inner[j].power * dc / gk;
  }

  auto summand_exp = [&](Mode m) -> Expansion {
    Expansion e = plain_exp(d, m);
    for (size_t j = 0; j < d.inner.size(); ++j) {
      const auto& in = d.inner[j];
      Expansion g = inner_exp[j];
      if (ikind[j] == InnerKind::Coupled) g = g.compose(m.scale, Rational(m.delta));
      else if (ikind[j] == InnerKind::Prefix)
        g = g.compose(in.upper.a * m.scale, Rational(in.upper.a * m.delta + in.upper.b));
      e = e * (in.power == 1 ? g : g.pow(in.power));
    }
    return e;
  };

  Expansion total(order, bits);
  long J = K;
  if (split) {
    total = summand_exp(Mode{2, -1});
    Expansion even = summand_exp(Mode{2, 0});
    if (d.alternating) total -= even;
    else total += even;
    J = K / 2;
  } else {
    total = summand_exp(Mode{});
  }
  for (int a = 0; a <= total.max_log(); ++a)
    for (int b = 0; b <= total.order(); ++b)
      if (!total.coef(a, b).is_zero()) ++res.tail_monomials;

  double cancel = -static_cast<double>(bits_to_digits(bits)) + 12;
  TailResult tail = tail_sum(total, J, cancel);

  res.value = head + tail.value;
  double head_err = abs_sum * (d.factors.size() + d.inner.size() + 2) * (2.0 * K + 10) *
                    std::ldexp(1.0, -static_cast<int>(bits) + 2);
  double tail_abs = std::fabs(tail.value.to_double());
  double err = head_err + tail.error.to_double() + inner_err_rel * tail_abs + inner_val_rel * (abs_sum + tail_abs);
  // Doubles underflow near 1e-308; keep the bound representable.
  res.bound = HPReal(bits);
  mpfr_set_d(res.bound.raw(), err, MPFR_RNDU);
  if (err == 0) res.bound = HPReal::pow2(-(bits - 8), bits);
  if (res.bound > ten_pow(-cfg.digits, bits))
    throw PrecisionShortfall("'" + d.str() + "': error bound " + res.bound.to_string(3) + " exceeds 1e-" +
                             std::to_string(cfg.digits));
  return res;
}

Evaluator& global_evaluator() {
  static Evaluator ev;
  return ev;
}

}  // namespace esum
