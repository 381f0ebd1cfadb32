#pragma once

#include <string>
#include <vector>

#include "esum/evaluator.hpp"

namespace esum {

// A real value with an absolute error bound.
struct NumValue {
  HPReal value;
  double bound = 0;
};

struct AtomInfo {
  std::string name;
  int weight;
  std::string meaning;
};

// The closed set of constants closed forms may use, in canonical order.
const std::vector<AtomInfo>& atom_table();
const AtomInfo* find_atom(const std::string& name);

// Sign convention of the alternating slot of an alternating MZV:
// +1 means sigma(m) = (-1)^(m+1), -1 means sigma(m) = (-1)^m.
int mzv_sign(const std::string& tag);
void set_mzv_sign(const std::string& tag, int sign);

// Sum of h_k / k^m over k >= 1, m in {3, 5}.
NumValue eval_odd_linear(int m, const EvalConfig& cfg);
// tag in {"mzv51", "mzv511", "mzv331"}; uses the given sign convention.
NumValue eval_alt_mzv(const std::string& tag, int sign, const EvalConfig& cfg);

// Value of an atom at the precision of `cfg`; cached.
NumValue atom_value(const std::string& name, const EvalConfig& cfg);

// Series definition of the atoms that are sums, as expression text.
std::string atom_series(const std::string& name, int sign = 1);

}  // namespace esum
