#pragma once

#include <optional>
#include <string>
#include <vector>

#include "esum/expression.hpp"

namespace esum {

struct PslqOutcome {
  std::optional<std::vector<Integer>> relation;
  long iterations = 0;
  std::string diagnostics;
};

// Integer relation r with sum r_i x_i ~ 0 and max |r_i| <= max_height,
// searched at `digits` decimal digits.
PslqOutcome pslq(const std::vector<HPReal>& x, long digits, const Integer& max_height);

// Monomials of total weight `weight` over `atoms`. Products of even zeta
// values are collapsed to one representative per weight since they are
// rational multiples of each other.
std::vector<Expr> weight_basis(int weight, const std::vector<std::string>& atoms);
std::vector<std::string> default_basis_atoms();

// Detection precision for a basis of n elements.
long detection_digits(size_t basis_size);

struct Discovery {
  bool found = false;
  Expr closed_form;
  std::vector<Integer> relation;
  long digits = 0;
  double residual = 0;
  std::string diagnostics;
};

Discovery discover(const SumDescriptor& d, const std::vector<Expr>& basis,
                   const Integer& max_height = Integer(1) << 20, std::optional<long> digits = std::nullopt);

}  // namespace esum
