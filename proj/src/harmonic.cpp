#include "esum/harmonic.hpp"

namespace esum {

char sym_char(Sym s) {
  switch (s) {
    case Sym::H: return 'H';
    case Sym::h: return 'h';
    case Sym::A: return 'A';
  }
  return '?';
}

Rational harmonic_step(Sym s, long j, int n) {
  Integer base = (s == Sym::h) ? Integer(2 * j - 1) : Integer(j);
  Integer den;
  mpz_pow_ui(den.get_mpz_t(), base.get_mpz_t(), static_cast<unsigned long>(n));
  Rational r(1, den);
  r.canonicalize();
  if (s == Sym::A && j % 2 == 0) r = -r;
  return r;
}

const Rational& HarmonicCache::get(Sym s, long k, int n) {
  if (k < 0) throw std::invalid_argument("harmonic index must be >= 0");
  if (n < 1) throw std::invalid_argument("harmonic order must be >= 1");
  std::lock_guard<std::mutex> lock(mu_);
  auto& t = tables_[{static_cast<int>(s), n}];
  if (t.empty()) t.emplace_back(0);
  while (static_cast<long>(t.size()) <= k) {
    long j = static_cast<long>(t.size());
    t.emplace_back(t.back() + harmonic_step(s, j, n));
  }
  return t[static_cast<size_t>(k)];
}

long HarmonicCache::max_index(Sym s, int n) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = tables_.find({static_cast<int>(s), n});
  if (it == tables_.end()) return -1;
  return static_cast<long>(it->second.size()) - 1;
}

HarmonicCache& global_harmonic_cache() {
  static HarmonicCache cache;
  return cache;
}

Rational harmonic(Sym s, long k, int n) { return global_harmonic_cache().get(s, k, n); }

}  // namespace esum
