#include "esum/constants.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace esum {

namespace {

std::mutex g_mu;
std::map<std::string, int> g_signs = {{"mzv51", 1}, {"mzv511", 1}, {"mzv331", 1}};
std::map<std::string, NumValue> g_cache;

double exact_bound(long digits) { return std::pow(10.0, -static_cast<double>(digits) - 10); }

NumValue from_eval(const EvalResult& r) { return {r.value, r.bound.to_double()}; }

NumValue sum_value(const std::string& desc, const EvalConfig& cfg) {
  return from_eval(global_evaluator().evaluate(*parse_descriptor(desc), cfg));
}

}  // namespace

const std::vector<AtomInfo>& atom_table() {
  static const std::vector<AtomInfo> t = {
      {"z2", 2, "zeta(2)"},
      {"z3", 3, "zeta(3)"},
      {"z4", 4, "zeta(4)"},
      {"z5", 5, "zeta(5)"},
      {"z6", 6, "zeta(6)"},
      {"z7", 7, "zeta(7)"},
      {"l2", 1, "ln(2)"},
      {"li4h", 4, "Li_4(1/2)"},
      {"li5h", 5, "Li_5(1/2)"},
      {"li6h", 6, "Li_6(1/2)"},
      {"li6mh", 6, "Li_6(-1/2)"},
      {"li6me", 6, "Li_6(-1/8)"},
      {"OL3", 4, "sum h_k/k^3"},
      {"OL5", 6, "sum h_k/k^5"},
      {"mzv51", 6, "zeta(-5,1)"},
      {"mzv511", 7, "zeta(-5,1,1)"},
      {"mzv331", 7, "zeta(-3,3,1)"},
      {"pi", 1, "pi"},
  };
  return t;
}

const AtomInfo* find_atom(const std::string& name) {
  for (const auto& a : atom_table())
    if (a.name == name) return &a;
  return nullptr;
}

int mzv_sign(const std::string& tag) {
  std::lock_guard<std::mutex> lock(g_mu);
  auto it = g_signs.find(tag);
  if (it == g_signs.end()) throw std::invalid_argument("unknown MZV tag '" + tag + "'");
  return it->second;
}

void set_mzv_sign(const std::string& tag, int sign) {
  std::lock_guard<std::mutex> lock(g_mu);
  auto it = g_signs.find(tag);
  if (it == g_signs.end()) throw std::invalid_argument("unknown MZV tag '" + tag + "'");
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  it->second = sign;
}

std::string atom_series(const std::string& name, int sign) {
  std::string s = sign > 0 ? "" : "-";
  if (name == "OL3") return "S[h / k^3]";
  if (name == "OL5") return "S[h / k^5]";
  // zeta(-5,1) = sum_{m>n} sigma(m) / (m^5 n)
  if (name == "mzv51") return s + "S[alt H@k-1 / k^5]";
  // zeta(-5,1,1) = sum_m sigma(m)/m^5 * (H_{m-1}^2 - H^(2)_{m-1}) / 2
  if (name == "mzv511") return s + "1/2*S[alt H@k-1^2 / k^5] " + (sign > 0 ? "-" : "+") + " 1/2*S[alt H[2]@k-1 / k^5]";
  // zeta(-3,3,1) = sum_m sigma(m)/m^3 * sum_{n<m} H_{n-1}/n^3
  if (name == "mzv331") return s + "S[alt {H@k-1 / k^3}@k-1 / k^3]";
  return "";
}

NumValue eval_odd_linear(int m, const EvalConfig& cfg) {
  if (m != 3 && m != 5) throw std::invalid_argument("odd linear sums exist for m = 3, 5 only");
  return sum_value(m == 3 ? "h / k^3" : "h / k^5", cfg);
}

NumValue eval_alt_mzv(const std::string& tag, int sign, const EvalConfig& cfg) {
  NumValue v;
  if (tag == "mzv51") {
    v = sum_value("alt H@k-1 / k^5", cfg);
  } else if (tag == "mzv511") {
    NumValue a = sum_value("alt H@k-1^2 / k^5", cfg);
    NumValue b = sum_value("alt H[2]@k-1 / k^5", cfg);
    v.value = (a.value - b.value) / 2;
    v.bound = (a.bound + b.bound) / 2;
  } else if (tag == "mzv331") {
    v = sum_value("alt {H@k-1 / k^3}@k-1 / k^3", cfg);
  } else {
    throw std::invalid_argument("unknown MZV tag '" + tag + "'");
  }
  if (sign < 0) v.value = -v.value;
  return v;
}

NumValue atom_value(const std::string& name, const EvalConfig& cfg) {
  const AtomInfo* info = find_atom(name);
  if (!info) throw std::invalid_argument("unknown atom '" + name + "'");
  bool is_mzv = name.rfind("mzv", 0) == 0;
  int sign = is_mzv ? mzv_sign(name) : 1;
  std::string key = name + "|" + std::to_string(sign) + "|" + cfg.key();
  {
    std::lock_guard<std::mutex> lock(g_mu);
    auto it = g_cache.find(key);
    if (it != g_cache.end()) return it->second;
  }
  const long d = cfg.digits;
  NumValue v;
  v.bound = exact_bound(d);
  if (name[0] == 'z') {
    v.value = zeta_int(name[1] - '0', d);
  } else if (name == "l2") {
    v.value = ln2(d);
  } else if (name == "pi") {
    v.value = pi(d);
  } else if (name == "li4h") {
    v.value = polylog(4, Rational(1, 2), d);
  } else if (name == "li5h") {
    v.value = polylog(5, Rational(1, 2), d);
  } else if (name == "li6h") {
    v.value = polylog(6, Rational(1, 2), d);
  } else if (name == "li6mh") {
    v.value = polylog(6, Rational(-1, 2), d);
  } else if (name == "li6me") {
    v.value = polylog(6, Rational(-1, 8), d);
  } else if (name == "OL3") {
    v = eval_odd_linear(3, cfg);
  } else if (name == "OL5") {
    v = eval_odd_linear(5, cfg);
  } else {
    v = eval_alt_mzv(name, sign, cfg);
  }
  std::lock_guard<std::mutex> lock(g_mu);
  g_cache.emplace(key, v);
  return v;
}

}  // namespace esum
