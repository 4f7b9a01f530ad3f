#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pdae/errors.hpp"
#include "pdae/types.hpp"

namespace pdae {

// First-derivative stencil kinds.  UpwindBySign picks Backward where the
// component's self-coupling C_ii at the frozen state is positive, Forward
// where it is negative, and the configured fallback where it vanishes.
enum class FirstDiff { Central, Forward, Backward, UpwindBySign };

inline int q_of(FirstDiff k) { return k == FirstDiff::Central ? 2 : 1; }

inline const char* to_string(FirstDiff k) {
  switch (k) {
    case FirstDiff::Central: return "central";
    case FirstDiff::Forward: return "forward";
    case FirstDiff::Backward: return "backward";
    case FirstDiff::UpwindBySign: return "upwind";
  }
  return "?";
}

// Scheme selection with optional per-component overrides (1-based component
// index maps to entry i-1; empty vector means no overrides).
struct DiffScheme {
  FirstDiff kind = FirstDiff::Backward;
  FirstDiff upwind_fallback = FirstDiff::Backward;
  std::vector<FirstDiff> component_override;

  static DiffScheme uniform(FirstDiff k) { return DiffScheme{k, FirstDiff::Backward, {}}; }

  FirstDiff component_kind(int i) const {
    if (!component_override.empty()) {
      if (i < 1 || i > static_cast<int>(component_override.size()))
        throw ConfigError("DiffScheme: component index out of range");
      return component_override[i - 1];
    }
    return kind;
  }

  bool is_uniform(FirstDiff k) const {
    if (kind != k && component_override.empty()) return false;
    if (component_override.empty()) return kind == k;
    for (FirstDiff f : component_override)
      if (f != k) return false;
    return true;
  }
};

// Neighbor weights of the first derivative with the 1/q factor folded in:
// du/dx at x_k ~ (wm*u_{k-1} + w0*u_k + wp*u_{k+1}) / h.
struct StencilWeights {
  double wm = 0.0, w0 = 0.0, wp = 0.0;
};

inline StencilWeights first_diff_weights(FirstDiff k) {
  switch (k) {
    case FirstDiff::Central: return {-0.5, 0.0, 0.5};
    case FirstDiff::Forward: return {0.0, -1.0, 1.0};
    case FirstDiff::Backward: return {-1.0, 1.0, 0.0};
    case FirstDiff::UpwindBySign: break;
  }
  throw ConfigError("first_diff_weights: upwind must be resolved to a one-sided kind first");
}

inline FirstDiff resolve_upwind(FirstDiff k, double diag_entry,
                                FirstDiff fallback) {
  if (k != FirstDiff::UpwindBySign) return k;
  if (diag_entry > 0.0) return FirstDiff::Backward;
  if (diag_entry < 0.0) return FirstDiff::Forward;
  return fallback == FirstDiff::UpwindBySign ? FirstDiff::Backward : fallback;
}

// Second-difference matrix tridiag(1, -2, 1) of size (M-1)^2; u_xx ~ P u / h^2.
inline Matrix build_P(int M) {
  if (M < 2) throw ConfigError("build_P: M must be at least 2");
  const int N = M - 1;
  Matrix P = Matrix::Zero(N, N);
  for (int j = 0; j < N; ++j) {
    P(j, j) = -2.0;
    if (j > 0) P(j, j - 1) = 1.0;
    if (j + 1 < N) P(j, j + 1) = 1.0;
  }
  return P;
}

// Pure superdiagonal shift of size (M-1)^2; operator norm 1 for M >= 3.
inline Matrix build_shift(int M) {
  if (M < 2) throw ConfigError("build_shift: M must be at least 2");
  const int N = M - 1;
  Matrix H = Matrix::Zero(N, N);
  for (int j = 0; j + 1 < N; ++j) H(j, j + 1) = 1.0;
  return H;
}

// First-difference matrix and its order factor q; u_x ~ Ptilde u / (q h).
// Central: tridiag(-1, 0, 1), q = 2.  Forward: -I + H, q = 1.  Backward:
// I - H^T, q = 1.
inline std::pair<Matrix, int> build_Ptilde(int M, FirstDiff k) {
  if (M < 2) throw ConfigError("build_Ptilde: M must be at least 2");
  const int N = M - 1;
  Matrix Pt = Matrix::Zero(N, N);
  switch (k) {
    case FirstDiff::Central:
      for (int j = 0; j < N; ++j) {
        if (j > 0) Pt(j, j - 1) = -1.0;
        if (j + 1 < N) Pt(j, j + 1) = 1.0;
      }
      return {Pt, 2};
    case FirstDiff::Forward:
      Pt = -Matrix::Identity(N, N) + build_shift(M);
      return {Pt, 1};
    case FirstDiff::Backward:
      Pt = Matrix::Identity(N, N) - build_shift(M).transpose();
      return {Pt, 1};
    case FirstDiff::UpwindBySign:
      break;
  }
  throw ConfigError("build_Ptilde: upwind has no single matrix; resolve per point first");
}

}  // namespace pdae
