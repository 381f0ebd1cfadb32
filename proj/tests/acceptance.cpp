// Acceptance run: one PASS/FAIL line per criterion, diagnostics indented below.
// Exit status is 0 only when every criterion passes.

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "esum/coupled.hpp"
#include "esum/pslq.hpp"
#include "esum/verifier.hpp"

using namespace esum;

namespace {

constexpr double kLemmaSeconds = 60;
constexpr double kHelpTol = 1e-30;
const std::vector<long> kHelpParams = {1, 2, 3, 5, 10, 25};
constexpr double kAnchorSeconds = 30;
constexpr double kFullRunSeconds = 20 * 60;
constexpr double kEq128Tol = 1e-30;
constexpr int kInvarianceSamples = 20;
constexpr unsigned kSeed = 20240601;
constexpr long kBruteN = 10000000;
constexpr double kPslqSeconds = 60;
constexpr double kClassCTol = 1e-20;
constexpr double kClassCSeconds = 10 * 60;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string summary;
  std::vector<std::string> notes;
  void note(const std::string& s) { notes.push_back(s); }
  void fail(const std::string& s) {
    pass = false;
    notes.push_back("FAIL " + s);
  }
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

HPReal signed_residual(const VerificationRecord& r, long bits) {
  return HPReal::parse(r.lhs_value, bits) - HPReal::parse(r.rhs_value, bits);
}

// 1. Finite lemmas, exact, k = 1..500.
Outcome lemmas(const Catalog& cat) {
  Outcome o;
  VerifyOptions opt;
  opt.kmax = 500;
  Verifier v(cat, opt);
  auto t0 = Clock::now();
  auto entries = query(cat, {.kind = "finite-identity"});
  auto recs = v.verify_all(entries);
  double secs = since(t0);
  for (const auto& r : recs) {
    if (r.verdict != Verdict::Pass || r.checked != 500) o.fail(fmt("%s: %s after %ld values", r.id.c_str(), verdict_name(r.verdict), r.checked));
  }
  if (recs.size() != 6) o.fail(fmt("expected 6 finite lemmas, found %zu", recs.size()));
  if (secs >= kLemmaSeconds) o.fail(fmt("runtime %.1f s", secs));
  o.summary = fmt("%zu lemmas x 500 exact checks, %.1f s", recs.size(), secs);
  return o;
}

// 2. Help functions at p in {1,2,3,5,10,25}.
Outcome help_functions(const Catalog& cat) {
  Outcome o;
  Verifier v(cat);
  int ok = 0, total = 0;
  for (const char* id : {"eq5", "eq6", "eq15", "eq71", "eq129", "eq144", "eq194"}) {
    const IdentityEntry* e = cat.find(id);
    EvalConfig cfg = v.config_for(*e);
    std::vector<long> bad;
    double worst = 0;
    for (long p : kHelpParams) {
      NumValue L = eval_numeric(e->L, cfg, p), R = eval_numeric(e->R, cfg, p);
      double d = abs(L.value - R.value).to_double();
      worst = std::max(worst, d);
      ++total;
      if (classify(d, L.bound, R.bound, kHelpTol) == Verdict::Pass) ++ok;
      else bad.push_back(p);
    }
    if (bad.empty()) {
      o.note(fmt("%s: all parameters within %.0e (worst %.2e)", id, kHelpTol, worst));
    } else {
      std::string ps;
      for (long p : bad) ps += (ps.empty() ? "" : ",") + std::to_string(p);
      o.fail(fmt("%s: |delta| up to %.3e at p in {%s}", id, worst, ps.c_str()));
    }
  }
  o.summary = fmt("%d of %d (entry, parameter) checks below %.0e", ok, total, kHelpTol);
  o.pass = ok == total;
  return o;
}

// 3. Literature-anchored closed forms.
Outcome anchors(const Catalog& cat) {
  Outcome o;
  Verifier v(cat);
  const std::vector<std::pair<const char*, double>> targets = {{"eq34", 1e-35},  {"eq124", 1e-35}, {"eq186", 1e-35},
                                                               {"eq321", 1e-35}, {"eq322", 1e-35}, {"eq126", 1e-30},
                                                               {"eq323", 1e-30}};
  double slowest = 0;
  for (const auto& [id, tol] : targets) {
    global_evaluator().clear_cache();
    auto t0 = Clock::now();
    auto r = v.verify(id);
    double secs = since(t0);
    slowest = std::max(slowest, secs);
    Verdict vd = classify(r.delta, r.lhs_bound, r.rhs_bound, tol);
    std::string line = fmt("%s: |delta| %.3e, tol %.0e, %.2f s", id, r.delta, tol, secs);
    if (vd != Verdict::Pass || secs >= kAnchorSeconds) o.fail(line + " (" + verdict_name(vd) + ")");
    else o.note(line);
  }
  o.summary = fmt("%zu anchored identities, slowest %.2f s", targets.size(), slowest);
  return o;
}

// 4. Full catalog run.
Outcome full_run(const Catalog& cat, std::vector<VerificationRecord>& recs) {
  Outcome o;
  Verifier v(cat);
  std::vector<const IdentityEntry*> all;
  for (const auto& e : cat.entries) all.push_back(&e);
  global_evaluator().clear_cache();
  auto t0 = Clock::now();
  recs = v.verify_all(all);
  double secs = since(t0);
  int pass = 0, fail = 0, inc = 0;
  for (const auto& r : recs) {
    if (r.verdict == Verdict::Pass) ++pass;
    if (r.verdict == Verdict::Fail) {
      ++fail;
      o.note(fmt("fail %s (%s, order %d): |delta| %.3e", r.id.c_str(), r.status.c_str(), r.order, r.delta));
    }
    if (r.verdict == Verdict::Inconclusive) {
      ++inc;
      o.fail(fmt("inconclusive %s: %s", r.id.c_str(), r.note.c_str()));
    }
  }
  if (secs >= kFullRunSeconds) o.fail(fmt("runtime %.1f s", secs));
  o.summary = fmt("%zu entries: %d pass, %d fail, %d inconclusive, %.1f s", recs.size(), pass, fail, inc, secs);
  return o;
}

// 5. Algebraic consistency.
Outcome consistency(const Catalog& cat) {
  Outcome o;
  for (const char* id : {"eq322", "eq127"}) {
    auto r = consistency_check(cat, id);
    std::string links;
    for (const auto& l : r.links) links += (links.empty() ? "" : "+") + l;
    if (r.holds) o.note(fmt("%s from %s: exact, residual 0", id, links.c_str()));
    else o.fail(fmt("%s from %s: residual %s", id, links.c_str(), r.residual.c_str()));
  }
  Verifier v(cat);
  const IdentityEntry* e = cat.find("eq128");
  EvalConfig cfg = v.config_for(*e);
  NumValue L = eval_numeric(e->L, cfg), R = eval_numeric(e->R, cfg);
  double d = abs(L.value - R.value).to_double();
  if (classify(d, L.bound, R.bound, kEq128Tol) == Verdict::Pass) {
    o.note(fmt("eq128: |delta| %.3e", d));
  } else {
    o.fail(fmt("eq128 as stated: |delta| %.3e", d));
    // even/odd splitting with H_2k = h_k + H_k/2 gives -3/8 for the H h^2 term
    Expr fixed = e->R + parse_expression("3/8*S[H h^2 / k^3]");
    NumValue F = eval_numeric(fixed, cfg);
    o.note(fmt("eq128 with -3/8 in place of -3/4: |delta| %.3e", abs(L.value - F.value).to_double()));
  }
  o.summary = "two termwise substitutions and the eq128 decomposition";
  return o;
}

// Long double brute force for sums without inner sums or parameters whose
// symbol arguments are k or k-1. The remainder past N is estimated as
// est = N t_N / (b-1) and added with uncertainty est; log factors push the
// true remainder above est by a factor 1 + O(1/ln N), well inside [0, 2 est].
bool brute_force(const SumDescriptor& d, long N, long double& value, long double& err) {
  if (!d.inner.empty() || d.uses_param()) return false;
  for (const auto& f : d.factors)
    if (f.arg.a != 1 || f.arg.b > 0 || f.arg.b < -1) return false;
  std::vector<long double> cur(d.factors.size(), 0);
  long double s = 0, c = 0, t = 0;
  for (long k = 1; k <= N; ++k) {
    long double term = 1;
    for (size_t j = 0; j < d.factors.size(); ++j) {
      const Factor& f = d.factors[j];
      long idx = k + f.arg.b;
      if (idx >= 1) {
        long double base = f.sym == Sym::h ? 2.0L * idx - 1 : static_cast<long double>(idx);
        long double step = 1 / std::pow(base, f.order);
        if (f.sym == Sym::A && idx % 2 == 0) step = -step;
        cur[j] += step;
      }
      term *= std::pow(cur[j], f.power);
    }
    for (const auto& l : d.linear) {
      long v = l.base.at(k, 0);
      term = v == 0 ? 0 : term / std::pow(static_cast<long double>(v), l.power);
    }
    if (d.alternating && k % 2 == 0) term = -term;
    // Kahan summation
    long double y = term - c;
    long double u = s + y;
    c = (u - s) - y;
    s = u;
    t = term;
  }
  int b = d.degree();
  if (d.alternating) {
    value = s;
    err = std::fabs(t);
  } else {
    long double est = t * N / (b - 1);
    value = s + est;
    err = std::fabs(est);
  }
  err += 1e-16L;  // accumulated rounding over 10^7 long double terms
  return true;
}

// 6. Engine properties.
Outcome engine_properties(const Catalog& cat, const std::vector<VerificationRecord>& base) {
  Outcome o;
  std::set<std::string> seen;
  std::vector<DescPtr> sums;
  for (const auto& e : cat.entries)
    for (const Expr* x : {&e.L, &e.R})
      for (const auto& [key, it] : x->items())
        if (it.kind == ItemKind::Sum && !it.desc->uses_param() && seen.insert(it.desc->str()).second)
          sums.push_back(it.desc);

  // K-invariance on a seeded sample.
  std::mt19937 rng(kSeed);
  std::vector<DescPtr> sample = sums;
  std::shuffle(sample.begin(), sample.end(), rng);
  sample.resize(std::min<size_t>(sample.size(), kInvarianceSamples));
  int kin_ok = 0;
  for (const auto& d : sample) {
    EvalConfig a;
    a.digits = 45;
    EvalConfig b = a;
    b.K = 2 * a.K;
    auto ra = global_evaluator().evaluate(*d, a);
    auto rb = global_evaluator().evaluate(*d, b);
    HPReal diff = abs(ra.value - rb.value);
    if (diff <= ra.bound + rb.bound) ++kin_ok;
    else o.fail(fmt("K-invariance %s: change %.3e > bounds %.3e", d->str().c_str(), diff.to_double(), (ra.bound + rb.bound).to_double()));
  }
  o.note(fmt("K-invariance: %d of %zu sampled descriptors (seed %u)", kin_ok, sample.size(), kSeed));

  // gamma perturbation, per precision class
  int gam_ok = 0, gam_total = 0;
  double worst_ratio = 0;
  for (const char* cls : {"A", "B", "C"}) {
    long digits = precision_class(cls).digits;
    VerifyOptions opt;
    Integer p10 = 1;
    for (long i = 0; i < digits / 2; ++i) p10 *= 10;
    opt.gamma_delta = Rational(1, 1) / Rational(p10);
    Verifier v(cat, opt);
    std::vector<const IdentityEntry*> picked;
    for (const auto& e : cat.entries)
      if (e.cls == cls && (e.kind == "infinite-identity" || e.kind == "inter-sum-relation")) picked.push_back(&e);
    global_evaluator().clear_cache();
    auto recs = v.verify_all(picked);
    long bits = working_bits(digits);
    double limit = std::pow(10.0, -static_cast<double>(digits) / 2 + 5);
    for (const auto& r : recs) {
      auto it = std::find_if(base.begin(), base.end(), [&](const VerificationRecord& b) { return b.id == r.id; });
      if (it == base.end() || r.lhs_value.empty() || it->lhs_value.empty()) continue;
      ++gam_total;
      double change = abs(signed_residual(r, bits) - signed_residual(*it, bits)).to_double();
      worst_ratio = std::max(worst_ratio, change / limit);
      if (change < limit) ++gam_ok;
      else o.fail(fmt("gamma shift moves the residual of %s by %.3e (limit %.0e)", r.id.c_str(), change, limit));
    }
  }
  global_evaluator().clear_cache();
  o.note(fmt("gamma perturbation 10^(-digits/2): %d of %d residuals unchanged to 10^(-digits/2+5) (worst at %.1e of the limit)",
             gam_ok, gam_total, worst_ratio));

  // tail bounds against direct summation
  int tb_ok = 0, tb_total = 0, tb_sharp = 0;
  for (const auto& d : sums) {
    if (d->degree() < 3) continue;
    long double bv = 0, berr = 0;
    if (!brute_force(*d, kBruteN, bv, berr)) continue;
    for (long K : {20L, 50L}) {
      EvalConfig c;
      c.K = K;
      c.B = 8;
      c.digits = 6;
      c.retry = false;
      EvalResult r;
      try {
        r = global_evaluator().evaluate(*d, c);
      } catch (const std::exception& ex) {
        o.fail(fmt("tail %s at K=%ld: %s", d->str().c_str(), K, ex.what()));
        continue;
      }
      ++tb_total;
      if (berr < static_cast<long double>(r.bound.to_double())) ++tb_sharp;
      long double gap = std::fabs(static_cast<long double>(r.value.to_double()) - bv) - berr;
      if (gap <= static_cast<long double>(r.bound.to_double())) ++tb_ok;
      else o.fail(fmt("tail %s at K=%ld: error %.3Le exceeds bound %.3e", d->str().c_str(), K, gap, r.bound.to_double()));
    }
  }
  o.note(fmt("tail bounds: %d of %d (descriptor, K) cases dominate the brute-force error (N = %ld); "
             "%d with oracle uncertainty below the bound",
             tb_ok, tb_total, kBruteN, tb_sharp));
  o.summary = "K-invariance, gamma perturbation, tail bounds";
  return o;
}

// 7. Discovery.
Outcome discovery(const Catalog& cat) {
  Outcome o;
  const std::vector<std::tuple<const char*, const char*, int>> targets = {
      {"eq124", "h^3 / k^2", 5}, {"eq321", "h^3 / k^3", 6}, {"eq328", "h^3 / k^4", 7}};
  for (const auto& [id, desc, w] : targets) {
    auto t0 = Clock::now();
    auto basis = weight_basis(w, default_basis_atoms());
    Discovery r = discover(*parse_descriptor(desc), basis);
    double secs = since(t0);
    const Expr& want = cat.find(id)->R;
    if (r.found && r.closed_form == want && secs < kPslqSeconds)
      o.note(fmt("%s: %s over %zu basis elements, %.2f s", id, r.closed_form.str().c_str(), basis.size(), secs));
    else
      o.fail(fmt("%s: %s (want %s), %.2f s", id, r.found ? r.closed_form.str().c_str() : r.diagnostics.c_str(),
                 want.str().c_str(), secs));
  }
  o.summary = "PSLQ rediscovery of eq124, eq321, eq328";
  return o;
}

// 8. Order-7 class C.
Outcome class_c(const Catalog& cat) {
  Outcome o;
  Verifier v(cat);
  auto t0 = Clock::now();
  for (long n = 328; n <= 332; ++n) {
    std::string id = "eq" + std::to_string(n);
    auto r = v.verify(id);
    Verdict vd = classify(r.delta, r.lhs_bound, r.rhs_bound, kClassCTol);
    std::string line = fmt("%s: class %s, |delta| %.3e", id.c_str(), r.cls.c_str(), r.delta);
    if (vd == Verdict::Pass && r.cls == "C") o.note(line);
    else o.fail(line + " (" + verdict_name(vd) + ")");
  }
  double secs = since(t0);
  if (secs >= kClassCSeconds) o.fail(fmt("runtime %.1f s", secs));
  o.summary = fmt("eq328..eq332 at %.0e, %.1f s", kClassCTol, secs);
  return o;
}

}  // namespace

int main() {
  Catalog cat = load_catalog(default_catalog_path());
  auto conv = select_conventions(cat);
  std::printf("catalog %s (%zu entries, sha256 %.16s)\n", cat.path.c_str(), cat.entries.size(), cat.hash.c_str());
  for (const auto& c : conv)
    std::printf("convention anchor %s: residual %.2e, rejected %.2e\n", c.anchor.c_str(), c.residual, c.other_best);

  std::vector<VerificationRecord> base;
  std::vector<std::function<Outcome()>> crit = {
      [&] { return lemmas(cat); },      [&] { return help_functions(cat); },
      [&] { return anchors(cat); },     [&] { return full_run(cat, base); },
      [&] { return consistency(cat); }, [&] { return engine_properties(cat, base); },
      [&] { return discovery(cat); },   [&] { return class_c(cat); }};
  int failed = 0;
  for (size_t i = 0; i < crit.size(); ++i) {
    Outcome o;
    try {
      o = crit[i]();
    } catch (const std::exception& ex) {
      o.pass = false;
      o.summary = std::string("error: ") + ex.what();
    }
    std::printf("criterion %zu: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.summary.c_str());
    for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(crit.size()) - failed, crit.size());
  return failed == 0 ? 0 : 1;
}
