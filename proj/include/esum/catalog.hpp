#pragma once

#include <optional>
#include <string>
#include <vector>

#include "esum/expression.hpp"

namespace esum {

struct CatalogError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IdentityEntry {
  std::string id;      // "eq124"
  std::string kind;    // infinite-identity | finite-identity | parametrized-identity | inter-sum-relation
  std::string family;  // "1".."8" | auxiliary | appendix
  std::string lhs;
  std::string rhs;
  std::string cls;     // A | B | C
  std::string status;  // core | intermediate | convention-dependent
  std::vector<std::string> derived_from;

  Expr L, R;
  int order = 0;
  long number() const;  // numeric part of the id, for ordering
};

struct Catalog {
  std::vector<IdentityEntry> entries;  // sorted by id number
  std::string path;
  std::string hash;  // sha256 of the file bytes
  std::vector<std::string> warnings;

  const IdentityEntry* find(const std::string& id) const;
  // Canonical summand text of each parametrized identity -> its closed form.
};

Catalog parse_catalog(const std::string& text, const std::string& origin = "<string>");
Catalog load_catalog(const std::string& path);
std::string default_catalog_path();

// Canonical serialization (fixed key order, canonical lhs/rhs text).
std::string serialize_catalog(const Catalog& c);

struct CatalogFilter {
  std::optional<std::string> family;
  std::optional<int> order;
  std::optional<std::string> kind;
  std::optional<std::string> status;
};
std::vector<const IdentityEntry*> query(const Catalog& c, const CatalogFilter& f);

// Weight of a summand: harmonic orders plus the largest denominator power.
int descriptor_weight(const SumDescriptor& d);

struct PrecisionClass {
  long digits;
  double tolerance;
};
PrecisionClass precision_class(const std::string& cls);

std::string sha256_hex(const std::string& bytes);

}  // namespace esum
