#pragma once

#include <optional>
#include <string>
#include <vector>

#include "esum/catalog.hpp"

namespace esum {

enum class Verdict { Pass, Fail, Inconclusive };
const char* verdict_name(Verdict v);

struct VerifyOptions {
  std::optional<long> digits;  // overrides the class digits
  std::optional<long> K;
  std::optional<int> B;
  Rational gamma_delta = 0;
  long kmax = 500;  // finite identities are checked for k = 1..kmax
  std::vector<long> params = {1, 2, 3, 5, 10, 25};
  int jobs = 1;
};

struct VerificationRecord {
  std::string id, kind, family, cls, status;
  int order = 0;
  Verdict verdict = Verdict::Inconclusive;
  std::string lhs_value, rhs_value;  // decimal text
  double lhs_bound = 0, rhs_bound = 0;
  double delta = 0;  // |LHS - RHS|
  double tolerance = 0;
  std::optional<long> worst_param;  // parametrized: parameter with the largest delta
  long checked = 0;                 // finite: number of k values checked
  std::string config;
  std::string note;
  double seconds = 0;
};

// Checks the verdict rule: pass iff delta < tol and both bounds < tol/4.
Verdict classify(double delta, double lhs_bound, double rhs_bound, double tol);

class Verifier {
 public:
  Verifier(const Catalog& cat, VerifyOptions opt = {});

  VerificationRecord verify(const std::string& id) const;
  VerificationRecord verify(const IdentityEntry& e) const;
  std::vector<VerificationRecord> verify_all(const std::vector<const IdentityEntry*>& entries) const;

  EvalConfig config_for(const IdentityEntry& e) const;
  const Catalog& catalog() const { return cat_; }

 private:
  const Catalog& cat_;
  VerifyOptions opt_;
};

struct ConsistencyRecord {
  std::string id;
  std::vector<std::string> links;
  bool holds = false;
  std::string residual;  // canonical text of what is left after substitution
};

// Substitutes the linked identities (each read as a rewrite rule from its
// single-item LHS to its RHS) into LHS - RHS of `id` and checks that the
// result vanishes exactly. Throws std::invalid_argument for unlinked ids.
ConsistencyRecord consistency_check(const Catalog& cat, const std::string& id);

struct ConventionChoice {
  std::vector<std::string> tags;
  std::vector<int> signs;
  std::string anchor;
  double residual = 0;
  double other_best = 0;  // smallest residual among rejected choices
};
// Picks the alternating-MZV sign conventions that satisfy the anchor
// identities (first catalog entry using mzv51 alone, then the first using
// mzv511/mzv331) and installs them.
std::vector<ConventionChoice> select_conventions(const Catalog& cat, const VerifyOptions& opt = {});

struct ReportOptions {
  bool timing = true;
};
std::string record_jsonl(const VerificationRecord& r, const ReportOptions& o);
std::string report_header_jsonl(const Catalog& cat, const VerifyOptions& opt,
                                const std::vector<ConventionChoice>& conv);
std::string report_table(const std::vector<VerificationRecord>& recs, const ReportOptions& o);
std::string summary_line(const std::vector<VerificationRecord>& recs);

}  // namespace esum
