#pragma once

#include <vector>

#include "esum/evaluator.hpp"

namespace esum {

// An inner sum whose body references the outer index k, tabulated for
// k = 0..N and expanded asymptotically in k.
struct CoupledSequence {
  std::vector<HPReal> vals;  // vals[k]; vals[0] is unused
  Expansion exp;
  double err = 0;      // absolute bound on every tabulated value
  double exp_err = 0;  // misfit of exp against the table at N/2
};

// Supports bodies  g(i) r(i) / (a(i+k)+b)^t  with g a product of H, h at
// argument i (or i-1) and r a product of k-free linear denominators; the
// inner sum may run to infinity or to k + const.
CoupledSequence coupled_inner(Evaluator& ev, const InnerSum& in, long N, const EvalConfig& cfg);

// Direct value at one outer index, from engine sums with k substituted.
HPReal coupled_inner_at(Evaluator& ev, const InnerSum& in, long k, const EvalConfig& cfg);

void clear_coupled_cache();

}  // namespace esum
