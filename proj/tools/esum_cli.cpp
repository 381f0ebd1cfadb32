#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "esum/pslq.hpp"
#include "esum/verifier.hpp"

using namespace esum;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

long env_digits() {
  if (const char* v = std::getenv("ESUM_DIGITS")) {
    try {
      return std::stol(v);
    } catch (...) {
      throw UsageError(std::string("ESUM_DIGITS is not a number: ") + v);
    }
  }
  return 0;
}

struct Common {
  std::string catalog;
  long digits = 0;
  long K = 0;
  int B = 0;
  std::string format = "table";
  std::string output;
  bool no_timing = false;
  int jobs = 1;
};

VerifyOptions make_options(const Common& c) {
  VerifyOptions o;
  long d = c.digits ? c.digits : env_digits();
  if (d) {
    if (d < 10) throw UsageError("--digits must be at least 10");
    o.digits = d;
  }
  if (c.K) {
    if (c.K < 16) throw UsageError("-K must be at least 16");
    o.K = c.K;
  }
  if (c.B) {
    if (c.B < 8) throw UsageError("-B must be at least 8");
    o.B = c.B;
  }
  o.jobs = c.jobs;
  return o;
}

Catalog open_catalog(const Common& c) {
  try {
    Catalog cat = load_catalog(c.catalog.empty() ? default_catalog_path() : c.catalog);
    for (const auto& w : cat.warnings) std::cerr << "warning: " << w << "\n";
    return cat;
  } catch (const CatalogError& e) {
    throw UsageError(e.what());
  }
}

// Writes the report; returns the exit code implied by the verdicts.
int emit(const Common& c, const Catalog& cat, const VerifyOptions& opt, const std::vector<ConventionChoice>& conv,
         const std::vector<VerificationRecord>& recs) {
  ReportOptions ro;
  ro.timing = !c.no_timing;
  std::ostringstream os;
  if (c.format == "jsonl") {
    os << report_header_jsonl(cat, opt, conv) << "\n";
    for (const auto& r : recs) os << record_jsonl(r, ro) << "\n";
  } else {
    os << report_table(recs, ro) << summary_line(recs) << "\n";
  }
  if (c.output.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(c.output);
    if (!f) throw UsageError("cannot write '" + c.output + "'");
    f << os.str();
    std::cout << summary_line(recs) << "\n";
  }
  for (const auto& r : recs)
    if (r.verdict == Verdict::Fail) return 1;
  return 0;
}

void add_common(CLI::App* sub, Common& c, bool report) {
  sub->add_option("--catalog", c.catalog, "catalog file (default: shipped data, or $ESUM_CATALOG)");
  sub->add_option("--digits", c.digits, "target digits (default: per class, or $ESUM_DIGITS)");
  sub->add_option("-K", c.K, "head cutoff");
  sub->add_option("-B", c.B, "expansion order");
  if (report) {
    sub->add_option("--format", c.format, "table or jsonl")->check(CLI::IsMember({"table", "jsonl"}));
    sub->add_option("-o,--output", c.output, "write the report to a file");
    sub->add_flag("--no-timing", c.no_timing, "omit wall-clock fields");
    sub->add_option("-j,--jobs", c.jobs, "parallel workers")->check(CLI::PositiveNumber);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euler sum evaluation and identity verification"};
  app.require_subcommand(1);
  Common c;

  auto* eval = app.add_subcommand("eval", "evaluate a sum descriptor");
  std::string desc;
  long param = 0;
  eval->add_option("descriptor", desc, "summand, e.g. 'h^3 / k^2'")->required();
  eval->add_option("-p,--param", param, "value of the parameter p");
  add_common(eval, c, false);

  auto* verify = app.add_subcommand("verify", "verify catalog entries");
  std::vector<std::string> ids;
  verify->add_option("ids", ids, "entry ids")->required();
  add_common(verify, c, true);

  auto* all = app.add_subcommand("verify-all", "verify every matching entry");
  std::string f_family, f_kind, f_status;
  int f_order = 0;
  all->add_option("--family", f_family, "family 1..8, auxiliary or appendix");
  all->add_option("--order", f_order, "weight of the heaviest sum");
  all->add_option("--kind", f_kind, "entry kind");
  all->add_option("--status", f_status, "core, intermediate or convention-dependent");
  add_common(all, c, true);

  auto* lemmas = app.add_subcommand("lemmas", "exact sweep of the finite identities");
  long kmax = 500;
  lemmas->add_option("--kmax", kmax, "largest k checked")->check(CLI::PositiveNumber);
  add_common(lemmas, c, true);

  auto* disc = app.add_subcommand("discover", "recover a closed form by integer relation detection");
  std::string ddesc;
  int weight = 0;
  std::vector<std::string> atoms;
  long height_bits = 20;
  disc->add_option("descriptor", ddesc)->required();
  disc->add_option("--weight", weight, "weight of the basis monomials")->required();
  disc->add_option("--atoms", atoms, "atoms spanning the basis (default: zeta values)");
  disc->add_option("--height-bits", height_bits, "coefficient bound 2^n");
  disc->add_option("--digits", c.digits, "detection digits (default: 20 + 12 * basis size)");

  auto* consts = app.add_subcommand("constants", "print every atom value");
  add_common(consts, c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*eval) {
      VerifyOptions o = make_options(c);
      EvalConfig cfg;
      cfg.digits = o.digits.value_or(60);
      if (o.K) cfg.K = *o.K;
      if (o.B) cfg.B = *o.B;
      DescPtr d;
      try {
        d = parse_descriptor(desc);
      } catch (const ParseError& e) {
        throw UsageError(e.what());
      }
      Validation v = validate(*d);
      if (!v.ok) throw UsageError("'" + d->str() + "': " + v.reason);
      std::optional<long> p;
      if (d->uses_param()) {
        if (param < 1) throw UsageError("descriptor uses p; pass --param");
        p = param;
      }
      EvalResult r = global_evaluator().evaluate(*d, cfg, p);
      std::cout << d->str() << " = " << r.value.to_string(static_cast<int>(cfg.digits)) << " +/- "
                << r.bound.to_string(3) << "\n";
      return 0;
    }
    if (*consts) {
      VerifyOptions o = make_options(c);
      EvalConfig cfg;
      cfg.digits = o.digits.value_or(60);
      if (o.K) cfg.K = *o.K;
      if (o.B) cfg.B = *o.B;
      if (!c.catalog.empty() || std::getenv("ESUM_CATALOG")) select_conventions(open_catalog(c), o);
      for (const auto& a : atom_table()) {
        NumValue v = atom_value(a.name, cfg);
        std::cout << a.name << " (" << a.meaning << ", weight " << a.weight
                  << ") = " << v.value.to_string(static_cast<int>(cfg.digits)) << "\n";
      }
      return 0;
    }
    if (*disc) {
      std::vector<std::string> use = atoms.empty() ? default_basis_atoms() : atoms;
      for (const auto& a : use)
        if (!find_atom(a)) throw UsageError("unknown atom '" + a + "'");
      DescPtr d;
      try {
        d = parse_descriptor(ddesc);
      } catch (const ParseError& e) {
        throw UsageError(e.what());
      }
      Validation v = validate(*d);
      if (!v.ok) throw UsageError("'" + d->str() + "': " + v.reason);
      std::vector<Expr> basis = weight_basis(weight, use);
      if (basis.empty()) throw UsageError("no monomials of weight " + std::to_string(weight));
      std::optional<long> dg;
      if (c.digits) dg = c.digits;
      Discovery res = discover(*d, basis, Integer(1) << static_cast<unsigned>(height_bits), dg);
      std::cout << "basis:";
      for (const auto& b : basis) std::cout << " " << b.str();
      std::cout << "\ndigits: " << res.digits << "\n";
      if (!res.found) {
        std::cout << "no relation found (" << res.diagnostics << ")\n";
        return 1;
      }
      std::cout << "S[" << d->str() << "] = " << res.closed_form.str() << "\n";
      std::cout << "residual: " << res.residual << "\n";
      return 0;
    }

    Catalog cat = open_catalog(c);
    VerifyOptions opt = make_options(c);
    if (*lemmas) opt.kmax = kmax;
    std::vector<const IdentityEntry*> sel;
    if (*verify) {
      for (const auto& id : ids) {
        const IdentityEntry* e = cat.find(id);
        if (!e) throw UsageError("no catalog entry '" + id + "'");
        sel.push_back(e);
      }
    } else {
      CatalogFilter f;
      if (*lemmas) {
        f.kind = "finite-identity";
      } else {
        if (!f_family.empty()) f.family = f_family;
        if (f_order) f.order = f_order;
        if (!f_kind.empty()) f.kind = f_kind;
        if (!f_status.empty()) f.status = f_status;
      }
      sel = query(cat, f);
    }
    std::vector<ConventionChoice> conv = select_conventions(cat, opt);
    Verifier ver(cat, opt);
    std::vector<VerificationRecord> recs = ver.verify_all(sel);
    return emit(c, cat, opt, conv, recs);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
