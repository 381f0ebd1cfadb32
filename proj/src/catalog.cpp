#include "esum/catalog.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

namespace esum {

using ojson = nlohmann::ordered_json;

long IdentityEntry::number() const {
  size_t i = 0;
  while (i < id.size() && !std::isdigit(static_cast<unsigned char>(id[i]))) ++i;
  return i < id.size() ? std::stol(id.substr(i)) : 0;
}

const IdentityEntry* Catalog::find(const std::string& id) const {
  for (const auto& e : entries)
    if (e.id == id) return &e;
  return nullptr;
}

namespace {

// Primitive form of a*k + b with a > 0.
using Root = std::array<long, 3>;

Root root_key(long a, long b) {
  long g = std::gcd(a, b);
  if (g == 0) g = 1;
  if (a < 0) g = -g;
  return {a / g, b / g, 0};
}

}  // namespace

// Partial fractions in the inner index turn a coupled pair u^s (i+k)^t into
// a factor R(k)^(s+t-1) of the outer summand times a weight-1 inner sum;
// distinct outer roots combine like 1/(k(2k-1)), which has weight 1.
int descriptor_weight(const SumDescriptor& d) {
  int w = 0;
  for (const auto& f : d.factors) w += f.order * f.power;
  std::map<Root, int> outer;
  for (const auto& l : d.linear) {
    if (l.power < 0) w += l.power;
    if (l.power > 0 && l.base.a != 0) {
      int& slot = outer[l.base.c ? Root{l.base.a, l.base.b, l.base.c} : root_key(l.base.a, l.base.b)];
      slot = std::max(slot, l.power);
    }
  }
  std::map<Root, int> added;
  for (const auto& in : d.inner) {
    const SumDescriptor& b = *in.body;
    int iw = 0;
    for (const auto& f : b.factors) iw += f.order * f.power;
    int umax = 0, cmax = 0;
    for (const auto& u : b.linear) {
      if (u.power < 0) iw += u.power;
      if (u.power <= 0 || u.base.a == 0) continue;
      if (u.base.c) {
        cmax = std::max(cmax, u.power);
        continue;
      }
      umax = std::max(umax, u.power);
      for (const auto& c : b.linear) {
        if (c.power <= 0 || c.base.a == 0 || c.base.c == 0) continue;
        // u = a1 i + b1, c = a2 i + c2 k + b2: resultant a1 (c2 k + b2) - b1 a2
        auto key = root_key(u.base.a * c.base.c, u.base.a * c.base.b - u.base.b * c.base.a);
        int& slot = added[key];
        slot = std::max(slot, u.power + c.power - 1);
      }
    }
    if (cmax == 0) iw += umax;
    else if (umax == 0) iw += cmax;
    else iw += 1;
    w += iw * in.power;
  }
  for (const auto& [key, pw] : added) outer[key] += pw;
  int den = 0;
  for (const auto& [key, pw] : outer) den = std::max(den, pw);
  return w + den;
}

namespace {

const std::set<std::string> kKinds = {"infinite-identity", "finite-identity", "parametrized-identity",
                                      "inter-sum-relation"};
const std::set<std::string> kStatus = {"core", "intermediate", "convention-dependent"};
const std::set<std::string> kFamilies = {"1", "2", "3", "4", "5", "6", "7", "8", "auxiliary", "appendix"};

int expr_order(const Expr& e, bool sums_only) {
  int best = 0;
  for (const auto& [m, c] : e.terms()) {
    int w = 0;
    bool has_sum = false;
    for (const auto& [k, pw] : m) {
      const Item& it = e.item_of(k);
      if (it.kind == ItemKind::Atom) {
        w += find_atom(it.atom)->weight * pw;
      } else {
        w += descriptor_weight(*it.desc) * pw;
        has_sum = true;
      }
    }
    if (!sums_only || has_sum) best = std::max(best, w);
  }
  return best;
}

void check_sums(const Expr& e, const std::string& ctx) {
  for (const auto& [k, it] : e.items()) {
    if (it.kind != ItemKind::Sum) continue;
    Validation v = validate(*it.desc);
    if (!v.ok) throw CatalogError(ctx + ": " + it.key() + " rejected: " + v.reason);
  }
}

std::string field(const ojson& j, const char* name, const std::string& ctx) {
  if (!j.contains(name) || !j[name].is_string()) throw CatalogError(ctx + ": missing string field '" + name + "'");
  return j[name].get<std::string>();
}

}  // namespace

PrecisionClass precision_class(const std::string& cls) {
  if (cls == "A") return {60, 1e-35};
  if (cls == "B") return {45, 1e-30};
  if (cls == "C") return {25, 1e-20};
  throw CatalogError("unknown precision class '" + cls + "'");
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

Catalog parse_catalog(const std::string& text, const std::string& origin) {
  Catalog cat;
  cat.path = origin;
  cat.hash = sha256_hex(text);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    cat.warnings.push_back(origin + ": empty catalog");
    return cat;
  }
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw CatalogError(origin + ": " + e.what());
  }
  const ojson* arr = &doc;
  if (doc.is_object() && doc.contains("entries")) arr = &doc["entries"];
  if (!arr->is_array()) throw CatalogError(origin + ": expected an array of entries");
  std::set<std::string> ids;
  size_t index = 0;
  for (const auto& j : *arr) {
    std::string ctx = origin + " entry " + std::to_string(index++);
    if (!j.is_object()) throw CatalogError(ctx + ": not an object");
    IdentityEntry e;
    e.id = field(j, "id", ctx);
    ctx += " (" + e.id + ")";
    e.kind = field(j, "kind", ctx);
    e.family = field(j, "family", ctx);
    e.lhs = field(j, "lhs", ctx);
    e.rhs = field(j, "rhs", ctx);
    e.cls = field(j, "class", ctx);
    e.status = field(j, "status", ctx);
    if (j.contains("derived_from")) {
      if (!j["derived_from"].is_array()) throw CatalogError(ctx + ": derived_from must be an array");
      for (const auto& d : j["derived_from"]) {
        if (!d.is_string()) throw CatalogError(ctx + ": derived_from must hold ids");
        e.derived_from.push_back(d.get<std::string>());
      }
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      static const std::set<std::string> known = {"id", "kind", "family", "lhs", "rhs", "class", "status",
                                                  "derived_from"};
      if (!known.count(it.key())) throw CatalogError(ctx + ": unknown field '" + it.key() + "'");
    }
    if (!ids.insert(e.id).second) throw CatalogError(ctx + ": duplicate id");
    if (!kKinds.count(e.kind)) throw CatalogError(ctx + ": bad kind '" + e.kind + "'");
    if (!kStatus.count(e.status)) throw CatalogError(ctx + ": bad status '" + e.status + "'");
    if (!kFamilies.count(e.family)) throw CatalogError(ctx + ": bad family '" + e.family + "'");
    precision_class(e.cls);
    try {
      e.L = parse_expression(e.lhs);
      e.R = parse_expression(e.rhs);
    } catch (const std::exception& ex) {
      throw CatalogError(ctx + ": " + ex.what());
    }
    check_sums(e.L, ctx);
    check_sums(e.R, ctx);
    bool param = e.L.uses_param() || e.R.uses_param();
    if (e.kind == "finite-identity" && (!e.L.is_exact() || !e.R.is_exact()))
      throw CatalogError(ctx + ": finite identities may use only T/F items and rationals");
    if (e.kind == "parametrized-identity" && !param)
      throw CatalogError(ctx + ": parametrized identity without parameter");
    if ((e.kind == "infinite-identity" || e.kind == "inter-sum-relation") && param)
      throw CatalogError(ctx + ": parameter outside a parametrized identity");
    e.order = expr_order(e.L, true);
    if (e.order == 0) e.order = std::max(expr_order(e.R, true), expr_order(e.R, false));
    cat.entries.push_back(std::move(e));
  }
  for (const auto& e : cat.entries)
    for (const auto& d : e.derived_from)
      if (!ids.count(d)) throw CatalogError(origin + " (" + e.id + "): derived_from names unknown id '" + d + "'");
  std::stable_sort(cat.entries.begin(), cat.entries.end(), [](const IdentityEntry& a, const IdentityEntry& b) {
    return a.number() != b.number() ? a.number() < b.number() : a.id < b.id;
  });
  return cat;
}

Catalog load_catalog(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CatalogError("cannot open catalog '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_catalog(ss.str(), path);
}

std::string default_catalog_path() {
  if (const char* p = std::getenv("ESUM_CATALOG")) return p;
  return ESUM_DEFAULT_CATALOG;
}

std::string serialize_catalog(const Catalog& c) {
  ojson arr = ojson::array();
  for (const auto& e : c.entries) {
    ojson j;
    j["id"] = e.id;
    j["kind"] = e.kind;
    j["family"] = e.family;
    j["lhs"] = e.L.str();
    j["rhs"] = e.R.str();
    j["class"] = e.cls;
    j["status"] = e.status;
    if (!e.derived_from.empty()) j["derived_from"] = e.derived_from;
    arr.push_back(j);
  }
  std::string out = "[\n";
  for (size_t i = 0; i < arr.size(); ++i) {
    out += "  " + arr[i].dump();
    out += i + 1 < arr.size() ? ",\n" : "\n";
  }
  out += "]\n";
  return out;
}

std::vector<const IdentityEntry*> query(const Catalog& c, const CatalogFilter& f) {
  std::vector<const IdentityEntry*> out;
  for (const auto& e : c.entries) {
    if (f.family && e.family != *f.family) continue;
    if (f.order && e.order != *f.order) continue;
    if (f.kind && e.kind != *f.kind) continue;
    if (f.status && e.status != *f.status) continue;
    out.push_back(&e);
  }
  return out;
}

}  // namespace esum
