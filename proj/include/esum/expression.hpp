#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "esum/constants.hpp"

namespace esum {

// Items an expression is a polynomial in:
//   atom        z2, l2, OL3, ...
//   S[desc]     infinite sum (may use the parameter p)
//   T[desc]     the summand of desc at k = p
//   F[desc]@u   sum of the summand for k = 1..u, u affine in p
enum class ItemKind { Atom, Sum, Term, Finite };

struct Item {
  ItemKind kind = ItemKind::Atom;
  std::string atom;
  DescPtr desc;
  Linear upper{0, 0, 0};  // F only: a*p + b
  std::string key() const;
  bool uses_param() const;
};

using Monomial = std::map<std::string, int>;  // item key -> power

class Expr {
 public:
  Expr() = default;
  static Expr constant(const Rational& c);
  static Expr item(const Item& it);

  const std::map<Monomial, Rational>& terms() const { return terms_; }
  const Item& item_of(const std::string& key) const { return items_.at(key); }
  const std::map<std::string, Item>& items() const { return items_; }

  bool is_zero() const { return terms_.empty(); }
  bool uses_param() const;
  // True iff only rationals, T and F items occur.
  bool is_exact() const;
  std::string str() const;
  // Total atom weight of each monomial (sum items count as unknown, -1).
  std::vector<int> weights() const;

  Expr& operator+=(const Expr& o);
  Expr& operator-=(const Expr& o);
  Expr& operator*=(const Rational& c);
  friend Expr operator+(Expr a, const Expr& b) { return a += b; }
  friend Expr operator-(Expr a, const Expr& b) { return a -= b; }
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator*(Expr a, const Rational& c) { return a *= c; }
  Expr pow(int n) const;
  bool operator==(const Expr& o) const { return terms_ == o.terms_; }

  // Replace every occurrence of item `key` by `e`.
  Expr substitute(const std::string& key, const Expr& e) const;

 private:
  std::map<Monomial, Rational> terms_;
  std::map<std::string, Item> items_;
  void add_term(const Monomial& m, const Rational& c);
  void prune();
};

Expr parse_expression(const std::string& text);

// Exact value at parameter p; requires is_exact().
Rational eval_exact(const Expr& e, std::optional<long> p);

// Numeric value with first-order error propagation.
NumValue eval_numeric(const Expr& e, const EvalConfig& cfg, std::optional<long> p = std::nullopt);

}  // namespace esum
