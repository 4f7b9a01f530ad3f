#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pdae/errors.hpp"
#include "pdae/types.hpp"

namespace pdae {

// Quasi-linear system on the unit interval,
//
//   A u_t + B u_xx + C[u] u_x + D u = f(t, x),
//
// with constant n x n matrices A, B, D and a convection matrix affine in the
// state, C[u] = C0 + sum_k u_k * C1[k].  A and B may be singular, and either
// may vanish entirely (purely algebraic, or convection-reaction, systems are
// legitimate inputs for the index analysis).  C1[k](i,j) is the derivative of
// C_ij with respect to u_k.
struct PDAESystem {
  int n = 0;
  Matrix A, B, D, C0;
  std::vector<Matrix> C1;

  PDAESystem() = default;

  PDAESystem(Matrix A_, Matrix B_, Matrix D_, Matrix C0_,
             std::vector<Matrix> C1_)
      : n(static_cast<int>(A_.rows())),
        A(std::move(A_)),
        B(std::move(B_)),
        D(std::move(D_)),
        C0(std::move(C0_)),
        C1(std::move(C1_)) {
    auto square = [&](const Matrix& m) {
      return m.rows() == n && m.cols() == n;
    };
    if (n < 1 || !square(A) || !square(B) || !square(D) || !square(C0))
      throw ConfigError("PDAESystem: A, B, D, C0 must all be n x n");
    if (static_cast<int>(C1.size()) != n)
      throw ConfigError("PDAESystem: C1 must hold n slices, got " +
                        std::to_string(C1.size()));
    for (const Matrix& s : C1)
      if (!square(s)) throw ConfigError("PDAESystem: every C1 slice must be n x n");
  }

  bool has_state_dependent_C() const {
    for (const Matrix& s : C1)
      if (s.cwiseAbs().maxCoeff() != 0.0) return true;
    return false;
  }
};

// C[u] at a state vector: C0 + sum_k u_k C1[k].
inline Matrix eval_C(const PDAESystem& s, const Eigen::Ref<const Vector>& u) {
  if (u.size() != s.n)
    throw ConfigError("eval_C: state vector has wrong length");
  Matrix C = s.C0;
  for (int k = 0; k < s.n; ++k)
    if (u[k] != 0.0) C.noalias() += u[k] * s.C1[k];
  return C;
}

// Directional coefficient matrix of the product rule: the matrix W with
// W(i,k) = sum_j C1[k](i,j) w_j, so that  d/dt (C[u]) v = W(u_t-direction) v
// pairs as eval_C1_dir(s, w) * u for any u.  Column k is C1[k] * w.
inline Matrix eval_C1_dir(const PDAESystem& s,
                          const Eigen::Ref<const Vector>& w) {
  if (w.size() != s.n)
    throw ConfigError("eval_C1_dir: direction vector has wrong length");
  Matrix W(s.n, s.n);
  for (int k = 0; k < s.n; ++k) W.col(k).noalias() = s.C1[k] * w;
  return W;
}

}  // namespace pdae
