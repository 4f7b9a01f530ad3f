#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pdae/block_tridiag.hpp"
#include "pdae/difference.hpp"
#include "pdae/errors.hpp"
#include "pdae/field.hpp"
#include "pdae/grid.hpp"
#include "pdae/problem.hpp"
#include "pdae/system.hpp"
#include "pdae/types.hpp"

namespace pdae {

// Interior-point discretization of the spatial operator
//
//   L_h[U] = B d_xx + C[U] d_x + D
//
// as a block-tridiagonal matrix.  Block (j,k) of the convection part is
// Ptilde_jk C[U_j] scaled by 1/(q h); the stencil is resolved per component,
// so a column c of a neighbor block carries that component's own one-sided or
// central weight.  Dirichlet boundary values are not part of the matrix; their
// coefficients are collected in a BoundaryAction so that the full operator
// action on a grid function u is  matrix * U + action(t).
struct DiscreteOperator {
  BlockTridiagonal matrix;
  int n = 0;
  int M = 0;
  DiffScheme scheme;
  long linearization_step = 0;
};

struct BoundaryAction {
  Matrix left, right;  // coefficients of the boundary vectors at x = 0 and 1
  BoundarySpec bv;
  int n = 0, M = 0;

  Vector at(double t) const {
    const int N = M - 1;
    Vector r = Vector::Zero(static_cast<Index>(n) * N);
    r.segment(0, n).noalias() += left * bv.value(t, 0);
    r.segment(static_cast<Index>(N - 1) * n, n).noalias() +=
        right * bv.value(t, 1);
    return r;
  }
};

struct AssembledQh {
  DiscreteOperator op;
  BoundaryAction bdry;
  Vector boundary;  // bdry.at(t) for the t the assembly was called with
};

namespace detail {

// Stencil triple per component at interior point k.  Free boundaries force
// the one-sided difference pointing into the domain; a component whose
// derivative is unused (zero column of C) never needs a closure.
inline std::vector<StencilWeights> resolve_stencils(const PDAESystem& sys,
                                                    const Matrix& Cmat,
                                                    const DiffScheme& scheme,
                                                    const BoundarySpec* bv,
                                                    int k, int M) {
  std::vector<StencilWeights> w(sys.n);
  for (int c = 1; c <= sys.n; ++c) {
    FirstDiff kind = resolve_upwind(scheme.component_kind(c), Cmat(c - 1, c - 1),
                                    scheme.upwind_fallback);
    StencilWeights sw = first_diff_weights(kind);
    if (bv != nullptr) {
      const bool free_left = k == 1 && bv->is_free(c, 0);
      const bool free_right = k == M - 1 && bv->is_free(c, 1);
      const bool used = Cmat.col(c - 1).cwiseAbs().maxCoeff() != 0.0;
      if (used) {
        if (free_left && sw.wm != 0.0) sw = first_diff_weights(FirstDiff::Forward);
        if (free_right && sw.wp != 0.0) sw = first_diff_weights(FirstDiff::Backward);
        if (free_left && sw.wm != 0.0)
          throw ConfigError(
              "resolve_stencils: component " + std::to_string(c) +
              " has Free boundaries on both sides of the only interior point");
      }
    }
    w[c - 1] = sw;
  }
  return w;
}

}  // namespace detail

inline AssembledQh assemble_Qh(const PDAESystem& sys, const StateField& U,
                               const SpaceGrid& grid, const DiffScheme& scheme,
                               const BoundarySpec& bv, double t) {
  if (U.n != sys.n || bv.n != sys.n)
    throw ConfigError("assemble_Qh: component counts disagree");
  if (U.M != grid.M) throw ConfigError("assemble_Qh: state and grid disagree on M");
  const int n = sys.n, M = grid.M, N = M - 1;
  const double ih = grid.M, ih2 = ih * ih;  // 1/h and 1/h^2
  for (int s = 0; s < 2; ++s)
    for (int c = 1; c <= n; ++c)
      if (bv.is_free(c, s) && sys.B.col(c - 1).cwiseAbs().maxCoeff() != 0.0)
        throw ConfigError(
            "assemble_Qh: component " + std::to_string(c) +
            " couples through a second derivative but has a Free boundary; "
            "no closure rule for that");

  BlockTridiagonal T = BlockTridiagonal::zero(n, N);
  Matrix leftB = Matrix::Zero(n, n), rightB = Matrix::Zero(n, n);
  for (int k = 1; k <= N; ++k) {
    const Matrix Cmat = eval_C(sys, U.block(k));
    const auto w = detail::resolve_stencils(sys, Cmat, scheme, &bv, k, M);
    Matrix Dg = -2.0 * ih2 * sys.B + sys.D;
    Matrix Lb = ih2 * sys.B;
    Matrix Rb = ih2 * sys.B;
    for (int c = 0; c < n; ++c) {
      Dg.col(c).noalias() += ih * w[c].w0 * Cmat.col(c);
      Lb.col(c).noalias() += ih * w[c].wm * Cmat.col(c);
      Rb.col(c).noalias() += ih * w[c].wp * Cmat.col(c);
    }
    T.diag[k - 1] = std::move(Dg);
    if (k > 1)
      T.lower[k - 2] = std::move(Lb);
    else
      leftB = std::move(Lb);
    if (k < N)
      T.upper[k - 1] = std::move(Rb);
    else
      rightB = std::move(Rb);
  }
  BoundaryAction act{std::move(leftB), std::move(rightB), bv, n, M};
  Vector r = act.at(t);
  return AssembledQh{DiscreteOperator{std::move(T), n, M, scheme, U.time_step},
                     std::move(act), std::move(r)};
}

// G = I x (A/tau) + Q_h[U]; h is redundant with U.M and is cross-checked.
inline DiscreteOperator assemble_G(const PDAESystem& sys, const StateField& U,
                                   double tau, double h,
                                   const DiffScheme& scheme,
                                   const BoundarySpec& bv, double t) {
  if (!(tau > 0.0)) throw ConfigError("assemble_G: tau must be positive");
  if (std::abs(h * U.M - 1.0) > 1e-12)
    throw ConfigError("assemble_G: h does not match the state's grid");
  AssembledQh q = assemble_Qh(sys, U, SpaceGrid(U.M), scheme, bv, t);
  q.op.matrix.add_block_diagonal(1.0 / tau, sys.A);
  return std::move(q.op);
}

namespace detail {

// Discrete first derivatives of V at every interior point, per component,
// with zero boundary values (interior-operator convention).  scale_q = true
// multiplies the q factor back in, giving the plain Ptilde_q rows; otherwise
// the 1/(q h) scaling is fully applied.
inline std::vector<Vector> interior_derivatives(const PDAESystem& sys,
                                                const StateField& V,
                                                const DiffScheme& scheme,
                                                bool scale_q, double h) {
  const int n = sys.n, N = V.M - 1;
  std::vector<Vector> d(N, Vector::Zero(n));
  for (int k = 1; k <= N; ++k) {
    const Matrix Cmat = eval_C(sys, V.block(k));
    const auto w = resolve_stencils(sys, Cmat, scheme, nullptr, k, V.M);
    for (int c = 0; c < n; ++c) {
      double acc = w[c].w0 * V.at(c + 1, k);
      if (k > 1) acc += w[c].wm * V.at(c + 1, k - 1);
      if (k < N) acc += w[c].wp * V.at(c + 1, k + 1);
      const FirstDiff kind = resolve_upwind(scheme.component_kind(c + 1),
                                            Cmat(c, c), scheme.upwind_fallback);
      d[k - 1][c] = scale_q ? acc * q_of(kind) : acc / h;
    }
  }
  return d;
}

}  // namespace detail

// Block-diagonal reassociation of the convection difference: for eta = V - U,
// (Ptilde_q x C^(1)-slices of eta) V  ==  build_Ctilde(V) eta, with block j
// equal to eval_C1_dir at the discrete derivative (Ptilde_q V)_j.
inline BlockTridiagonal build_Ctilde(const PDAESystem& sys, const StateField& V,
                                     const DiffScheme& scheme) {
  const int N = V.M - 1;
  const auto d = detail::interior_derivatives(sys, V, scheme, true, 0.0);
  BlockTridiagonal T = BlockTridiagonal::zero(sys.n, N);
  for (int j = 0; j < N; ++j) T.diag[j] = eval_C1_dir(sys, d[j]);
  return T;
}

// Same object with the 1/(q h) scaling folded per component, as it enters the
// error recursion operator.
inline BlockTridiagonal build_Ctilde_scaled(const PDAESystem& sys,
                                            const StateField& V,
                                            const DiffScheme& scheme, double h) {
  const int N = V.M - 1;
  const auto d = detail::interior_derivatives(sys, V, scheme, false, h);
  BlockTridiagonal T = BlockTridiagonal::zero(sys.n, N);
  for (int j = 0; j < N; ++j) T.diag[j] = eval_C1_dir(sys, d[j]);
  return T;
}

}  // namespace pdae
