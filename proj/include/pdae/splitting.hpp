#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pdae/assembly.hpp"
#include "pdae/banded_lu.hpp"
#include "pdae/block_tridiag.hpp"
#include "pdae/difference.hpp"
#include "pdae/errors.hpp"
#include "pdae/field.hpp"
#include "pdae/grid.hpp"
#include "pdae/norm_estimate.hpp"
#include "pdae/problem.hpp"
#include "pdae/system.hpp"
#include "pdae/types.hpp"

namespace pdae {

enum class SolverKind { Full, Split };

inline std::string to_string(SolverKind s) {
  return s == SolverKind::Full ? "full" : "split";
}

inline constexpr double kConditionLimit = 1e14;

// Row split of the discrete operator: L1 keeps the algebraic rows of Q (rows
// where A vanishes), L2 the differential ones, so Q = L1 + L2 blockwise and
// E1 + E2 = I.  The split scheme factors A + tau Q as (A + tau L1)(I + tau L2)
// up to tau^2 L1 L2, which requires the differential rows of A to be identity
// rows; anything else is rejected rather than silently mis-split.
struct SplitPartition {
  int n1 = 0;  // differential components
  Matrix E1, E2;
  BlockTridiagonal L1, L2;
  long linearization_step = 0;
};

namespace detail {

inline BlockTridiagonal premultiply_rows(const Matrix& E,
                                         const BlockTridiagonal& T) {
  BlockTridiagonal R = T;
  for (auto& b : R.diag) b = E * b;
  for (auto& b : R.lower) b = E * b;
  for (auto& b : R.upper) b = E * b;
  return R;
}

}  // namespace detail

inline SplitPartition partition_L(const PDAESystem& sys,
                                  const DiscreteOperator& Q) {
  const int n = sys.n;
  if (Q.n != n) throw ConfigError("partition_L: operator and system disagree on n");
  const double scale = std::max(1.0, sys.A.cwiseAbs().maxCoeff());
  SplitPartition p;
  p.E1 = Matrix::Zero(n, n);
  p.E2 = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    Vector row = sys.A.row(i).transpose();
    if (row.cwiseAbs().maxCoeff() <= 1e-14 * scale) {
      p.E2(i, i) = 1.0;
      continue;
    }
    row[i] -= 1.0;
    if (row.cwiseAbs().maxCoeff() > 1e-14 * scale)
      throw ConfigError(
          "partition_L: row " + std::to_string(i + 1) +
          " of A is neither zero nor the corresponding identity row; rescale "
          "the time-derivative block (cf. normalize_B) before splitting");
    p.E1(i, i) = 1.0;
    ++p.n1;
  }
  p.L1 = detail::premultiply_rows(p.E2, Q.matrix);
  p.L2 = detail::premultiply_rows(p.E1, Q.matrix);
  p.linearization_step = Q.linearization_step;
  return p;
}

namespace detail {

inline void blockwise_apply_add(const Matrix& S, const Vector& v, Vector& out,
                                double a = 1.0) {
  const int n = static_cast<int>(S.rows());
  for (Index k = 0; k < v.size() / n; ++k)
    out.segment(k * n, n).noalias() += a * (S * v.segment(k * n, n));
}

}  // namespace detail

// Operator 2-norm of (A + tau L1)(I + tau L2) - (A + tau (L1+L2)) - tau^2 L1 L2,
// estimated by power iteration on the composed action.  For a valid partition
// this collapses to tau (A_blk L2 - L2) = 0 in exact arithmetic.
inline double factorization_residual(const PDAESystem& sys,
                                     const SplitPartition& p, double tau) {
  const Index dim = p.L1.size();
  auto residual = [&](const Vector& v) {
    Vector w = v + tau * p.L2.multiply(v);
    Vector r = tau * p.L1.multiply(w);
    detail::blockwise_apply_add(sys.A, w, r);
    detail::blockwise_apply_add(sys.A, v, r, -1.0);
    r.noalias() -= tau * p.L1.multiply(v);
    r.noalias() -= tau * p.L2.multiply(v);
    r.noalias() -= tau * tau * p.L1.multiply(p.L2.multiply(v));
    return r;
  };
  auto residual_t = [&](const Vector& v) {
    Vector av = Vector::Zero(v.size());
    detail::blockwise_apply_add(sys.A.transpose(), v, av);
    Vector w = av + tau * p.L1.multiply_transpose(v);
    Vector r = w + tau * p.L2.multiply_transpose(w);
    r.noalias() -= av;
    r.noalias() -= tau * p.L1.multiply_transpose(v);
    r.noalias() -= tau * p.L2.multiply_transpose(v);
    r.noalias() -= tau * tau * p.L2.multiply_transpose(p.L1.multiply_transpose(v));
    return r;
  };
  return estimate_norm2(dim, residual, residual_t);
}

namespace detail {

inline BandedLU factor_or_throw(const BlockTridiagonal& T, long step) {
  BandedLU lu(T);
  if (lu.singular())
    throw SolverError("time step " + std::to_string(step) +
                          ": linear system is singular to working precision",
                      step, std::numeric_limits<double>::infinity());
  const double cond = lu.condition_estimate();
  if (cond > kConditionLimit)
    throw SolverError("time step " + std::to_string(step) +
                          ": linear system is numerically singular "
                          "(condition estimate " +
                          std::to_string(cond) + ")",
                      step, cond);
  return lu;
}

inline Vector stack_source(const SourceFn& f, int n, const SpaceGrid& grid,
                           double t) {
  Vector F = Vector::Zero(static_cast<Index>(n) * (grid.M - 1));
  if (!f) return F;
  for (int k = 1; k <= grid.M - 1; ++k) {
    Vector fk = f(t, grid.x(k));
    if (fk.size() != n)
      throw ConfigError("source function returned a vector of wrong length");
    F.segment(static_cast<Index>(k - 1) * n, n) = fk;
  }
  return F;
}

}  // namespace detail

// One implicit Euler step, coefficients linearized at the current state:
//   (A/tau + Q[U^m]) U^{m+1} = A U^m / tau + F^{m+1} - r(t_{m+1}).
inline StateField step_full(const PDAESystem& sys, const StateField& Um,
                            const SpaceGrid& grid, const TimeGrid& tg,
                            const DiffScheme& scheme, const BoundarySpec& bv,
                            const SourceFn& f) {
  const long m = Um.time_step;
  const double t_next = tg.t(m + 1);
  AssembledQh q = assemble_Qh(sys, Um, grid, scheme, bv, t_next);
  Vector rhs = detail::stack_source(f, sys.n, grid, t_next) - q.boundary;
  detail::blockwise_apply_add(sys.A, Um.values, rhs, 1.0 / tg.tau);
  q.op.matrix.add_block_diagonal(1.0 / tg.tau, sys.A);
  BandedLU lu = detail::factor_or_throw(q.op.matrix, m + 1);
  StateField next(sys.n, grid.M, m + 1);
  next.values = lu.solve(rhs);
  return next;
}

// Split step.  With W the discrete time derivative, the two stages
//   (A + tau L1) Y = F^{m+1} - Q U^m - r(t_m) - E2 dr
//   (I + tau L2) W = Y - E1 dr,      dr = r(t_{m+1}) - r(t_m),
// give U^{m+1} = U^m + tau W.  Eliminating Y shows this matches the full step
// with A + tau Q replaced by (A + tau L1)(I + tau L2), so the defect is
// O(tau^2) per step and vanishes when either part is absent.
inline StateField step_split(const PDAESystem& sys, const StateField& Um,
                             const SpaceGrid& grid, const TimeGrid& tg,
                             const DiffScheme& scheme, const BoundarySpec& bv,
                             const SourceFn& f) {
  const long m = Um.time_step;
  const double t_cur = tg.t(m), t_next = tg.t(m + 1);
  AssembledQh q = assemble_Qh(sys, Um, grid, scheme, bv, t_cur);
  SplitPartition p = partition_L(sys, q.op);
  Vector dr = q.bdry.at(t_next) - q.boundary;

  Vector rhs1 = detail::stack_source(f, sys.n, grid, t_next) -
                q.op.matrix.multiply(Um.values) - q.boundary;
  detail::blockwise_apply_add(p.E2, dr, rhs1, -1.0);
  BlockTridiagonal S1 = p.L1;
  S1.scale(tg.tau);
  S1.add_block_diagonal(1.0, sys.A);
  Vector Y = detail::factor_or_throw(S1, m + 1).solve(rhs1);

  detail::blockwise_apply_add(p.E1, dr, Y, -1.0);
  BlockTridiagonal S2 = p.L2;
  S2.scale(tg.tau);
  S2.add_block_diagonal(1.0, Matrix::Identity(sys.n, sys.n));
  Vector W = detail::factor_or_throw(S2, m + 1).solve(Y);

  StateField next(sys.n, grid.M, m + 1);
  next.values = Um.values + tg.tau * W;
  return next;
}

struct ModelSetup {
  PDAESystem system;
  InitialSpec iv;
  BoundarySpec bv;
  SourceFn f;  // empty means zero source
  DiffScheme scheme;
  SolverKind solver = SolverKind::Full;
  double t_e = 1.0;
};

struct Trajectory {
  std::vector<StateField> states;  // all levels 0..m_max, or just the last
  double tau = 0.0;
  DiffScheme scheme;
  SolverKind solver = SolverKind::Full;
  double wall_seconds = 0.0;

  const StateField& final_state() const { return states.back(); }
};

inline Trajectory integrate(const ModelSetup& setup, const SpaceGrid& grid,
                            const TimeGrid& tg, bool store_all = true) {
  const CompatibilityReport rep = check_compatibility(setup.iv, setup.bv);
  if (!rep.pass) {
    int bi = 0, bs = 0;
    double worst = -1.0;
    for (int s = 0; s < 2; ++s)
      for (int i = 0; i < setup.iv.n; ++i)
        if (rep.checked(i, s) && rep.residual(i, s) > worst) {
          worst = rep.residual(i, s);
          bi = i;
          bs = s;
        }
    throw ConfigError("initial and boundary data are incompatible: component " +
                      std::to_string(bi + 1) + " at x = " +
                      (bs == 0 ? std::string("0") : std::string("1")) +
                      " differs by " + std::to_string(worst));
  }
  const auto t0 = std::chrono::steady_clock::now();
  Trajectory traj;
  traj.tau = tg.tau;
  traj.scheme = setup.scheme;
  traj.solver = setup.solver;
  StateField U = setup.iv.sample(grid);
  if (store_all) traj.states.reserve(static_cast<size_t>(tg.m_max) + 1);
  if (store_all) traj.states.push_back(U);
  for (long m = 0; m < tg.m_max; ++m) {
    U = setup.solver == SolverKind::Full
            ? step_full(setup.system, U, grid, tg, setup.scheme, setup.bv,
                        setup.f)
            : step_split(setup.system, U, grid, tg, setup.scheme, setup.bv,
                         setup.f);
    if (store_all) traj.states.push_back(U);
  }
  if (!store_all) traj.states.push_back(std::move(U));
  traj.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return traj;
}

}  // namespace pdae
