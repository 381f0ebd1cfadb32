#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "esum/harmonic.hpp"

namespace esum {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// a*k + c*p + b, where k is the summation index and p the free parameter
// (inside an inner sum, p stands for the enclosing summation index).
struct Linear {
  long a = 1;
  long b = 0;
  long c = 0;

  long at(long k, long p) const { return a * k + b + c * p; }
  bool uses_p() const { return c != 0; }
  std::string str(char var = 'k', char par = 'p') const;
  auto operator<=>(const Linear&) const = default;
};

struct Factor {
  Sym sym = Sym::H;
  int order = 1;
  Linear arg;  // argument of the symbol, c == 0
  int power = 1;
  auto operator<=>(const Factor&) const = default;
};

// Linear factor raised to `power`; negative power puts it in the numerator.
struct LinearFactor {
  Linear base;
  int power = 1;
  auto operator<=>(const LinearFactor&) const = default;
};

struct SumDescriptor;

struct InnerSum {
  std::shared_ptr<const SumDescriptor> body;
  bool infinite = false;
  Linear upper;  // upper limit in the outer index (finite case)
  int power = 1;
};

struct SumDescriptor {
  bool alternating = false;
  std::vector<Factor> factors;
  std::vector<InnerSum> inner;
  std::vector<LinearFactor> linear;

  bool uses_param() const;          // p appears outside inner bodies
  bool has_coupled_inner() const;   // some inner body references the outer index
  bool has_infinite_inner() const;
  // Degree of decay in the index: denominators minus numerator linear factors.
  int degree() const;
  int max_symbol_index_scale() const;

  std::string str() const;  // canonical text
};

using DescPtr = std::shared_ptr<const SumDescriptor>;

DescPtr parse_descriptor(const std::string& text);
SumDescriptor canonicalize(SumDescriptor d);

struct Validation {
  bool ok = true;
  std::string reason;
};

// Convergence certificate for the infinite sum over k >= 1.
Validation validate(const SumDescriptor& d);

// Exact term at index k with parameter p (p ignored when unused).
// Terms whose linear factors vanish are defined as 0 (k != p convention).
Rational term_exact(const SumDescriptor& d, long k, std::optional<long> p = std::nullopt);

// Exact finite sum of terms for k = 1..upper.
Rational partial_exact(const SumDescriptor& d, long upper, std::optional<long> p = std::nullopt);

// Product of two descriptors (factor concatenation).
SumDescriptor multiply(const SumDescriptor& a, const SumDescriptor& b);

}  // namespace esum
