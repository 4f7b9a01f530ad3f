#pragma once

#include <string>

#include "pdae/errors.hpp"
#include "pdae/grid.hpp"
#include "pdae/types.hpp"

namespace pdae {

// Solution values of n components at the interior points of a SpaceGrid,
// stored point-blocked: block k (1-based grid index, k = 1..M-1) holds the
// n-vector u(x_k).  time_step is the level m of t_m = m*tau.
struct StateField {
  int n = 0;
  int M = 0;
  long time_step = 0;
  Vector values;

  StateField() = default;

  StateField(int n_, int M_, long step = 0)
      : n(n_), M(M_), time_step(step) {
    if (n < 1 || M < 2)
      throw ConfigError("StateField: need n >= 1 and M >= 2, got n = " +
                        std::to_string(n) + ", M = " + std::to_string(M));
    values = Vector::Zero(static_cast<Index>(n) * (M - 1));
  }

  Index size() const { return static_cast<Index>(n) * (M - 1); }

  // Block of grid point k, k = 1..M-1.
  auto block(int k) { return values.segment(static_cast<Index>(k - 1) * n, n); }
  auto block(int k) const {
    return values.segment(static_cast<Index>(k - 1) * n, n);
  }

  // Component i (1-based) at grid point k.
  double& at(int i, int k) { return values[static_cast<Index>(k - 1) * n + i - 1]; }
  double at(int i, int k) const {
    return values[static_cast<Index>(k - 1) * n + i - 1];
  }
};

// Sample profile(i, x) for component i = 1..n at the interior points.
template <class F>
StateField sample_interior(int n, const SpaceGrid& grid, F&& profile) {
  StateField u(n, grid.M);
  for (int k = 1; k <= grid.M - 1; ++k)
    for (int i = 1; i <= n; ++i) u.at(i, k) = profile(i, grid.x(k));
  return u;
}

}  // namespace pdae
