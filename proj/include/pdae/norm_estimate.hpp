#pragma once

#include <cstdint>
#include <random>

#include "pdae/types.hpp"

namespace pdae {

// Spectral norm estimate by power iteration on T^T T, for an operator given
// through its action and transpose action.  The start vector comes from raw
// mt19937_64 draws, so the estimate is deterministic for a fixed seed.
template <class Apply, class ApplyT>
double estimate_norm2(Index dim, Apply&& apply, ApplyT&& applyT,
                      int iters = 20, std::uint64_t seed = 0x7a5e0fu) {
  std::mt19937_64 gen(seed);
  Vector v(dim);
  for (Index i = 0; i < dim; ++i)
    v[i] = 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0;
  double nv = v.norm();
  if (nv == 0.0) return 0.0;
  v /= nv;
  for (int it = 0; it < iters; ++it) {
    Vector w = apply(v);
    Vector z = applyT(w);
    const double zn = z.norm();
    if (zn == 0.0) return 0.0;
    v = z / zn;
  }
  return apply(v).norm();
}

}  // namespace pdae
