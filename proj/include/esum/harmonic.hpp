#pragma once

#include <deque>
#include <map>
#include <mutex>

#include "esum/hpreal.hpp"

namespace esum {

// H: sum 1/j^n, h: sum 1/(2j-1)^n, A: sum (-1)^(j+1)/j^n, all over j <= k.
enum class Sym { H, h, A };

char sym_char(Sym s);

// Exact incremental tables, grown on demand. References returned by
// get() stay valid for the lifetime of the cache.
class HarmonicCache {
 public:
  const Rational& get(Sym s, long k, int n);
  long max_index(Sym s, int n) const;

 private:
  mutable std::mutex mu_;
  std::map<std::pair<int, int>, std::deque<Rational>> tables_;
};

HarmonicCache& global_harmonic_cache();

Rational harmonic(Sym s, long k, int n);

// Exact value of one step 1/j^n, 1/(2j-1)^n or (-1)^(j+1)/j^n.
Rational harmonic_step(Sym s, long j, int n);

}  // namespace esum
