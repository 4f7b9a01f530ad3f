#pragma once

#include <cmath>

#include "pdae/errors.hpp"
#include "pdae/types.hpp"

namespace pdae {

// Eigenpairs of the scaled second-difference operator P / h^2 on the interior
// grid: eigenvalues lambda_k = -(4/h^2) sin^2(k pi / (2M)), k = 1..M-1, and
// the discrete sine basis Phi with Phi(j,k) = sqrt(2h) sin(jk pi / M).
// Phi is symmetric and involutory: Phi = Phi^T = Phi^{-1}, and
// Phi (P/h^2) Phi = diag(lambda).
struct LaplacianSpectrum {
  Vector eigenvalues;
  Matrix Phi;
};

inline LaplacianSpectrum laplacian_spectrum(int M) {
  if (M < 2) throw ConfigError("laplacian_spectrum: M must be at least 2");
  const int N = M - 1;
  const double h = 1.0 / M;
  LaplacianSpectrum s;
  s.eigenvalues.resize(N);
  for (int k = 1; k <= N; ++k) {
    const double sk = std::sin(0.5 * k * M_PI * h);
    s.eigenvalues[k - 1] = -4.0 / (h * h) * sk * sk;
  }
  s.Phi.resize(N, N);
  const double scale = std::sqrt(2.0 * h);
  // sin(jk pi / M) with the phase reduced to the first quadrant in integer
  // arithmetic; keeps entries accurate to a few ulp for large j*k
  auto sine = [M](long j, long k) {
    long r = (j * k) % (2L * M);
    double sign = 1.0;
    if (r >= M) {
      sign = -1.0;
      r -= M;
    }
    if (2 * r > M) r = M - r;
    return sign * std::sin(M_PI * static_cast<double>(r) / M);
  };
  for (int j = 1; j <= N; ++j)
    for (int k = j; k <= N; ++k) {
      const double v = scale * sine(j, k);
      s.Phi(j - 1, k - 1) = v;
      s.Phi(k - 1, j - 1) = v;
    }
  return s;
}

}  // namespace pdae
