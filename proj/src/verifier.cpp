#include "esum/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace esum {

using ojson = nlohmann::ordered_json;

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

Verdict classify(double delta, double lhs_bound, double rhs_bound, double tol) {
  if (!(lhs_bound < tol / 4) || !(rhs_bound < tol / 4)) return Verdict::Inconclusive;
  return delta < tol ? Verdict::Pass : Verdict::Fail;
}

Verifier::Verifier(const Catalog& cat, VerifyOptions opt) : cat_(cat), opt_(std::move(opt)) {}

EvalConfig Verifier::config_for(const IdentityEntry& e) const {
  EvalConfig cfg;
  cfg.digits = opt_.digits.value_or(precision_class(e.cls).digits);
  if (opt_.K) cfg.K = *opt_.K;
  if (opt_.B) cfg.B = *opt_.B;
  cfg.gamma_delta = opt_.gamma_delta;
  return cfg;
}

VerificationRecord Verifier::verify(const std::string& id) const {
  const IdentityEntry* e = cat_.find(id);
  if (!e) throw std::invalid_argument("no catalog entry '" + id + "'");
  return verify(*e);
}

namespace {

std::string show(const HPReal& v, long digits) { return v.to_string(static_cast<int>(std::min<long>(digits, 40))); }

struct Side {
  NumValue lhs, rhs;
  double delta;
};

Side compare(const Expr& L, const Expr& R, const EvalConfig& cfg, std::optional<long> p) {
  Side s{eval_numeric(L, cfg, p), eval_numeric(R, cfg, p), 0};
  s.delta = std::fabs((s.lhs.value - s.rhs.value).to_double());
  return s;
}

}  // namespace

VerificationRecord Verifier::verify(const IdentityEntry& e) const {
  auto t0 = std::chrono::steady_clock::now();
  VerificationRecord r;
  r.id = e.id;
  r.kind = e.kind;
  r.family = e.family;
  r.cls = e.cls;
  r.status = e.status;
  r.order = e.order;
  EvalConfig cfg = config_for(e);
  r.config = cfg.key();
  r.tolerance = precision_class(e.cls).tolerance;
  try {
    if (e.kind == "finite-identity") {
      r.tolerance = 0;
      r.verdict = Verdict::Pass;
      r.config = "exact,kmax=" + std::to_string(opt_.kmax);
      for (long k = 1; k <= opt_.kmax; ++k) {
        Rational d = eval_exact(e.L, k) - eval_exact(e.R, k);
        ++r.checked;
        if (d != 0) {
          r.verdict = Verdict::Fail;
          r.delta = std::fabs(d.get_d());
          r.worst_param = k;
          r.note = "first mismatch at k=" + std::to_string(k) + ": LHS-RHS=" + d.get_str();
          break;
        }
      }
    } else if (e.kind == "parametrized-identity") {
      const Expr& L = e.L;
      const Expr& R = e.R;
      bool inconclusive = false, fail = false;
      for (long p : opt_.params) {
        Side s = compare(L, R, cfg, p);
        Verdict v = classify(s.delta, s.lhs.bound, s.rhs.bound, r.tolerance);
        inconclusive |= v == Verdict::Inconclusive;
        fail |= v == Verdict::Fail;
        ++r.checked;
        if (!r.worst_param || s.delta > r.delta) {
          r.delta = s.delta;
          r.worst_param = p;
          r.lhs_value = show(s.lhs.value, cfg.digits);
          r.rhs_value = show(s.rhs.value, cfg.digits);
        }
        r.lhs_bound = std::max(r.lhs_bound, s.lhs.bound);
        r.rhs_bound = std::max(r.rhs_bound, s.rhs.bound);
      }
      r.verdict = inconclusive ? Verdict::Inconclusive : (fail ? Verdict::Fail : Verdict::Pass);
    } else {
      const Expr& L = e.L;
      const Expr& R = e.R;
      Side s = compare(L, R, cfg, std::nullopt);
      r.lhs_value = show(s.lhs.value, cfg.digits);
      r.rhs_value = show(s.rhs.value, cfg.digits);
      r.lhs_bound = s.lhs.bound;
      r.rhs_bound = s.rhs.bound;
      r.delta = s.delta;
      r.verdict = classify(s.delta, s.lhs.bound, s.rhs.bound, r.tolerance);
    }
    if (r.verdict == Verdict::Inconclusive && r.note.empty()) r.note = "error bound exceeds tolerance/4";
  } catch (const std::exception& ex) {
    r.verdict = Verdict::Inconclusive;
    r.note = ex.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<VerificationRecord> Verifier::verify_all(const std::vector<const IdentityEntry*>& entries) const {
  std::vector<VerificationRecord> out(entries.size());
  int jobs = std::max(1, opt_.jobs);
  if (jobs == 1 || entries.size() < 2) {
    for (size_t i = 0; i < entries.size(); ++i) out[i] = verify(*entries[i]);
    return out;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < entries.size(); i = next++) out[i] = verify(*entries[i]);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

ConsistencyRecord consistency_check(const Catalog& cat, const std::string& id) {
  const IdentityEntry* e = cat.find(id);
  if (!e) throw std::invalid_argument("no catalog entry '" + id + "'");
  if (e->derived_from.empty()) throw std::invalid_argument("entry '" + id + "' has no derivation links");
  std::vector<std::pair<std::string, Expr>> rules;
  for (const auto& link : e->derived_from) {
    const IdentityEntry* l = cat.find(link);
    if (!l) throw std::invalid_argument("unknown link '" + link + "'");
    if (l->L.terms().size() != 1) throw std::invalid_argument("link '" + link + "' is not a rewrite rule");
    const auto& [m, c] = *l->L.terms().begin();
    if (m.size() != 1 || m.begin()->second != 1)
      throw std::invalid_argument("link '" + link + "' is not a rewrite rule");
    Expr v = l->R;
    v *= Rational(1) / c;
    rules.emplace_back(m.begin()->first, v);
  }
  Expr res = e->L - e->R;
  for (int pass = 0; pass < 16; ++pass) {
    bool changed = false;
    for (const auto& [key, val] : rules) {
      if (res.items().count(key)) {
        res = res.substitute(key, val);
        changed = true;
      }
    }
    if (!changed) break;
  }
  ConsistencyRecord r;
  r.id = id;
  r.links = e->derived_from;
  r.holds = res.is_zero();
  r.residual = res.str();
  return r;
}

namespace {

bool mentions(const IdentityEntry& e, const std::string& atom) {
  return e.L.items().count(atom) || e.R.items().count(atom);
}

const IdentityEntry* anchor_for(const Catalog& cat, const std::vector<std::string>& tags) {
  if (tags.size() == 1) {
    for (const auto& e : cat.entries) {
      if (e.L.terms().size() == 1 && e.L.items().size() == 1 && e.L.items().count(tags[0])) return &e;
    }
  }
  for (const auto& e : cat.entries) {
    bool all = true;
    for (const auto& t : tags) all &= mentions(e, t);
    if (all) return &e;
  }
  return nullptr;
}

}  // namespace

std::vector<ConventionChoice> select_conventions(const Catalog& cat, const VerifyOptions& opt) {
  std::vector<ConventionChoice> out;
  Verifier v(cat, opt);
  for (std::vector<std::string> tags :
       {std::vector<std::string>{"mzv51"}, std::vector<std::string>{"mzv511", "mzv331"}}) {
    const IdentityEntry* a = anchor_for(cat, tags);
    if (!a) continue;
    EvalConfig cfg = v.config_for(*a);
    const Expr& L = a->L;
    const Expr& R = a->R;
    ConventionChoice best;
    best.tags = tags;
    best.anchor = a->id;
    best.residual = INFINITY;
    best.other_best = INFINITY;
    int combos = 1 << tags.size();
    for (int c = 0; c < combos; ++c) {
      std::vector<int> signs;
      for (size_t i = 0; i < tags.size(); ++i) {
        signs.push_back((c >> i) & 1 ? -1 : 1);
        set_mzv_sign(tags[i], signs.back());
      }
      double res = compare(L, R, cfg, std::nullopt).delta;
      if (res < best.residual) {
        best.other_best = std::min(best.other_best, best.residual);
        best.residual = res;
        best.signs = signs;
      } else {
        best.other_best = std::min(best.other_best, res);
      }
    }
    for (size_t i = 0; i < tags.size(); ++i) set_mzv_sign(tags[i], best.signs[i]);
    out.push_back(best);
  }
  return out;
}

namespace {

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

}  // namespace

std::string record_jsonl(const VerificationRecord& r, const ReportOptions& o) {
  ojson j;
  j["type"] = "record";
  j["id"] = r.id;
  j["kind"] = r.kind;
  j["family"] = r.family;
  j["order"] = r.order;
  j["class"] = r.cls;
  j["status"] = r.status;
  j["verdict"] = verdict_name(r.verdict);
  j["lhs"] = r.lhs_value;
  j["lhs_bound"] = sci(r.lhs_bound);
  j["rhs"] = r.rhs_value;
  j["rhs_bound"] = sci(r.rhs_bound);
  j["delta"] = sci(r.delta);
  j["tolerance"] = sci(r.tolerance);
  if (r.worst_param) j["worst_param"] = *r.worst_param;
  if (r.checked) j["checked"] = r.checked;
  j["config"] = r.config;
  if (!r.note.empty()) j["note"] = r.note;
  if (o.timing) j["seconds"] = std::round(r.seconds * 1000) / 1000;
  return j.dump();
}

std::string report_header_jsonl(const Catalog& cat, const VerifyOptions& opt,
                                const std::vector<ConventionChoice>& conv) {
  ojson j;
  j["type"] = "header";
  j["catalog_sha256"] = cat.hash;
  j["entries"] = cat.entries.size();
  ojson c;
  c["digits"] = opt.digits ? ojson(*opt.digits) : ojson("by class");
  EvalConfig def;
  c["K"] = opt.K.value_or(def.K);
  c["B"] = opt.B.value_or(def.B);
  c["kmax"] = opt.kmax;
  c["params"] = opt.params;
  c["gamma_delta"] = opt.gamma_delta.get_str();
  j["config"] = c;
  ojson atoms;
  EvalConfig acfg;
  acfg.digits = 60;
  for (const auto& a : atom_table()) {
    try {
      NumValue v = atom_value(a.name, acfg);
      atoms[a.name] = sha256_hex(v.value.to_string(50)).substr(0, 16);
    } catch (const std::exception& ex) {
      atoms[a.name] = std::string("error: ") + ex.what();
    }
  }
  j["atoms_sha256"] = atoms;
  ojson cv = ojson::array();
  for (const auto& ch : conv) {
    ojson x;
    x["anchor"] = ch.anchor;
    for (size_t i = 0; i < ch.tags.size(); ++i)
      x[ch.tags[i]] = ch.signs[i] > 0 ? "sigma(m)=(-1)^(m+1)" : "sigma(m)=(-1)^m";
    x["residual"] = sci(ch.residual);
    x["rejected_residual"] = sci(ch.other_best);
    cv.push_back(x);
  }
  j["conventions"] = cv;
  return j.dump();
}

std::string report_table(const std::vector<VerificationRecord>& recs, const ReportOptions& o) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-8s %-10s %-5s %-3s %-13s %-10s %-10s", "id", "family", "order", "cls", "verdict",
                "|delta|", "tol");
  os << buf;
  if (o.timing) os << "  time[s]";
  os << "\n";
  for (const auto& r : recs) {
    std::snprintf(buf, sizeof buf, "%-8s %-10s %-5d %-3s %-13s %-10s %-10s", r.id.c_str(), r.family.c_str(), r.order,
                  r.cls.c_str(), verdict_name(r.verdict), sci(r.delta).c_str(), sci(r.tolerance).c_str());
    os << buf;
    if (o.timing) {
      std::snprintf(buf, sizeof buf, "  %7.2f", r.seconds);
      os << buf;
    }
    if (!r.note.empty()) os << "  " << r.note;
    os << "\n";
  }
  return os.str();
}

std::string summary_line(const std::vector<VerificationRecord>& recs) {
  size_t p = 0, f = 0, i = 0;
  for (const auto& r : recs) {
    if (r.verdict == Verdict::Pass) ++p;
    else if (r.verdict == Verdict::Fail) ++f;
    else ++i;
  }
  std::ostringstream os;
  os << recs.size() << " records: " << p << " pass, " << f << " fail, " << i << " inconclusive";
  return os.str();
}

}  // namespace esum
