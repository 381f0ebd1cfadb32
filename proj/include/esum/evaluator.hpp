#pragma once

#include <memory>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "esum/descriptor.hpp"
#include "esum/expansion.hpp"

namespace esum {

struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientOrderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PrecisionShortfall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvalConfig {
  long K = 4000;        // head cutoff (rounded up to even)
  int B = 24;           // expansion order
  long digits = 60;     // target digits; error bound must stay below 10^-digits
  Rational gamma_delta = 0;  // perturbation added to Euler's gamma in expansions
  bool retry = true;    // one retry with K*4, B+8 on shortfall

  std::string key() const;
};

struct EvalResult {
  HPReal value;
  HPReal bound;
  long head_terms = 0;
  long K = 0;
  int B = 0;
  int tail_monomials = 0;
  std::vector<std::string> bootstrap;  // inner-sum constants used
};

// Floating tables of H^(n)_m, h^(n)_m, A^(n)_m at a fixed precision.
class NumericTables {
 public:
  explicit NumericTables(long bits) : bits_(bits) {}
  using Table = std::shared_ptr<const std::vector<HPReal>>;
  // Snapshot covering indices 0..max_index; never mutated after return.
  Table get(Sym s, int n, long max_index);
  long bits() const { return bits_; }

 private:
  long bits_;
  std::mutex mu_;
  std::map<std::pair<int, int>, Table> t_;
};

class Evaluator {
 public:
  EvalResult evaluate(const SumDescriptor& d, const EvalConfig& cfg, std::optional<long> p = std::nullopt);
  EvalResult evaluate_parametrized(const SumDescriptor& d, long p, const EvalConfig& cfg) {
    return evaluate(d, cfg, p);
  }

  // Asymptotic expansion of H^(n)_m (sym H) or h^(n)_m (sym h) in m.
  Expansion symbol_expansion(Sym s, int n, int order, long bits, const Rational& gamma_delta);

  NumericTables& tables(long bits);
  void clear_cache();

 private:
  EvalResult evaluate_once(const SumDescriptor& d, const EvalConfig& cfg, std::optional<long> p);

  std::mutex mu_;
  std::map<std::string, EvalResult> results_;
  std::map<std::string, Expansion> sym_cache_;
  std::map<long, std::unique_ptr<NumericTables>> tables_;
};

Evaluator& global_evaluator();

}  // namespace esum
