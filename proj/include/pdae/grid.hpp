#pragma once

#include <cmath>
#include <string>

#include "pdae/errors.hpp"

namespace pdae {

// Uniform grid on [0,1]: x_k = k*h with h = 1/M.  Interior points are
// k = 1..M-1; k = 0 and k = M carry boundary data only.
struct SpaceGrid {
  int M = 0;

  explicit SpaceGrid(int M_) : M(M_) {
    if (M < 2)
      throw ConfigError("SpaceGrid: M must be at least 2, got " +
                        std::to_string(M));
  }

  double h() const { return 1.0 / M; }
  double x(int k) const { return static_cast<double>(k) / M; }
  int interior() const { return M - 1; }
};

// Uniform time levels t_m = m*tau.  m_max is chosen so that m_max*tau hits
// t_e up to half a step; tau larger than ~1.5*t_e leaves no whole step.
struct TimeGrid {
  double tau = 0.0;
  double t_e = 0.0;
  long m_max = 0;

  TimeGrid(double tau_, double t_e_) : tau(tau_), t_e(t_e_) {
    if (!(tau > 0.0) || !(t_e > 0.0))
      throw ConfigError("TimeGrid: tau and t_e must be positive");
    m_max = std::lround(t_e / tau);
    if (m_max < 1 || std::abs(m_max * tau - t_e) > tau * (1.0 + 1e-9))
      throw ConfigError("TimeGrid: t_e is not within one step of a multiple of tau");
  }

  double t(long m) const { return tau * static_cast<double>(m); }
};

}  // namespace pdae
