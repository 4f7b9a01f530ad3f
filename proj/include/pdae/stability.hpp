#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pdae/assembly.hpp"
#include "pdae/banded_lu.hpp"
#include "pdae/difference.hpp"
#include "pdae/errors.hpp"
#include "pdae/field.hpp"
#include "pdae/grid.hpp"
#include "pdae/norm_estimate.hpp"
#include "pdae/spectrum.hpp"
#include "pdae/splitting.hpp"
#include "pdae/system.hpp"
#include "pdae/types.hpp"

namespace pdae {

// Root-mean-square norm weighted by the mesh width, sqrt(h sum v_i^2).
inline double discrete_l2_norm(const Eigen::Ref<const Vector>& v, double h) {
  if (!(h > 0.0)) throw ConfigError("discrete_l2_norm: h must be positive");
  return std::sqrt(h * v.squaredNorm());
}

// Smooth comparison function v_i(t, x), component index 1-based.
using SmoothFn = std::function<double(int, double, double)>;

// Defect of the scheme on a smooth function: per interior point,
//   A (v^{m+1}-v^m)/tau + L_h[v^m] v^{m+1} - f(t^{m+1}, x)
// with the scheme's own stencils but v's true values outside the interior
// (no boundary closure).  t names t^m.
inline Vector truncation_error(const PDAESystem& sys, const SmoothFn& v,
                               const SourceFn& f, const SpaceGrid& grid,
                               double tau, double t,
                               const DiffScheme& scheme) {
  if (!(tau > 0.0)) throw ConfigError("truncation_error: tau must be positive");
  const int n = sys.n, M = grid.M, N = M - 1;
  const double h = grid.h(), t1 = t + tau;
  auto sample = [&](double tt, int k) {
    Vector u(n);
    for (int i = 1; i <= n; ++i) u[i - 1] = v(i, tt, grid.x(k));
    return u;
  };
  Vector alpha = Vector::Zero(static_cast<Index>(n) * N);
  for (int k = 1; k <= N; ++k) {
    const Vector vc = sample(t, k);
    const Vector vn = sample(t1, k), vl = sample(t1, k - 1),
                 vr = sample(t1, k + 1);
    const Matrix Cmat = eval_C(sys, vc);
    const auto w = detail::resolve_stencils(sys, Cmat, scheme, nullptr, k, M);
    Vector row = sys.A * (vn - vc) / tau;
    row.noalias() += sys.B * ((vl - 2.0 * vn + vr) / (h * h));
    Vector dx(n);
    for (int c = 0; c < n; ++c)
      dx[c] = (w[c].wm * vl[c] + w[c].w0 * vn[c] + w[c].wp * vr[c]) / h;
    row.noalias() += Cmat * dx;
    row.noalias() += sys.D * vn;
    if (f) row -= f(t1, grid.x(k));
    alpha.segment(static_cast<Index>(k - 1) * n, n) = row;
  }
  return alpha;
}

// Frozen-coefficient resolvent analysis for the fully one-sided scheme.
// After the sine transform the leading part decouples into the n x n pencils
//   G0_k = A/tau - C0/h + D + lambda_k B,
// and the state-dependent remainder is bounded through the affine part of C.
// delta0 < 1 certifies solvability of the full operator with
//   ||G^{-1}|| <= ||G0^{-1}|| / (1 - delta0).
struct StabilityReport {
  int M = 0;
  double tau = 0.0, h = 0.0;
  double g0_inv_norm = 0.0;       // max over modes of 1/sigma_min(G0_k)
  double g1_norm_bound = 0.0;     // scaled bound on the remainder
  double delta0 = 0.0;
  bool pass = false;
  double solution_bound = std::numeric_limits<double>::infinity();
  std::vector<int> singular_modes;  // modes with sigma_min at rounding level
};

inline StabilityReport stability_report(const PDAESystem& sys,
                                        const StateField& U,
                                        const SpaceGrid& grid, double tau,
                                        const DiffScheme& scheme,
                                        const Matrix* C0_ref = nullptr) {
  if (!scheme.is_uniform(FirstDiff::Forward))
    throw ConfigError(
        "stability_report: the resolvent decomposition covers the uniformly "
        "forward scheme only");
  const Matrix C0 = C0_ref != nullptr ? *C0_ref : sys.C0;
  if (C0.rows() != sys.n || C0.cols() != sys.n)
    throw ConfigError("stability_report: reference C0 must be n x n");
  if (U.n != sys.n || U.M != grid.M)
    throw ConfigError("stability_report: shape mismatch");
  if (!(tau > 0.0)) throw ConfigError("stability_report: tau must be positive");
  StabilityReport rep;
  rep.M = grid.M;
  rep.tau = tau;
  rep.h = grid.h();
  const int N = grid.M - 1;
  const LaplacianSpectrum sp = laplacian_spectrum(grid.M);
  double worst = 0.0, g0_scale = 0.0;
  for (int k = 1; k <= N; ++k) {
    const Matrix G0 = sys.A / tau - C0 / rep.h + sys.D +
                      sp.eigenvalues[k - 1] * sys.B;
    Eigen::JacobiSVD<Matrix> svd(G0);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1), smax = s(0);
    g0_scale = std::max(g0_scale, smax);
    if (smin <= 1e-14 * std::max(1.0, smax)) {
      rep.singular_modes.push_back(k);
      worst = std::numeric_limits<double>::infinity();
    } else {
      worst = std::max(worst, 1.0 / smin);
    }
  }
  rep.g0_inv_norm = worst;
  double dev = 0.0, full = 0.0;
  for (int k = 1; k <= N; ++k) {
    const Matrix Ck = eval_C(sys, U.block(k));
    dev = std::max(dev, (Ck - C0).operatorNorm());
    if (k <= N - 1) full = std::max(full, Ck.operatorNorm());
  }
  rep.g1_norm_bound = (dev + full) / rep.h;
  rep.delta0 = rep.g0_inv_norm * rep.g1_norm_bound;
  rep.pass = rep.delta0 < 1.0 && rep.singular_modes.empty();
  if (rep.pass) rep.solution_bound = rep.g0_inv_norm / (1.0 - rep.delta0);
  return rep;
}

// Error propagation between two discrete solutions of the same problem:
// with eta^m = U^m - V^m,
//   eta^{m+1} = H^m eta^m + R^{m+1},
//   H^m = G_m^{-1} (A/tau - Ctilde[V^{m+1}]),  G_m = A/tau + Q[U^m],
// where Ctilde reassociates the convection difference (see build_Ctilde).
// The report holds the extracted residuals R^j (zero up to round-off when the
// two runs genuinely solved the same equations) and transfer-product norms
// over every window ending at the final step.
struct ErrorRecursionReport {
  double tau = 0.0, h = 0.0;
  std::vector<double> step_norm;      // ||H^m||, m = 0..m_end-1
  std::vector<double> window_norm;    // ||H^{m_end-1} ... H^j||, j = 0..m_end-1
  std::vector<double> residual_norm;  // ||R^j||_h, j = 1..m_end
  std::vector<double> delta0;         // per-step delta0 when C0_ref is given
  double eta_final = 0.0;             // ||eta^{m_end}||_h
};

inline ErrorRecursionReport monitor_error_recursion(
    const PDAESystem& sys, const Trajectory& ref, const Trajectory& pert,
    const SpaceGrid& grid, const BoundarySpec& bv,
    const Matrix* C0_ref = nullptr) {
  if (ref.states.size() != pert.states.size() || ref.states.size() < 2)
    throw ConfigError("monitor_error_recursion: need two equally long runs");
  if (ref.tau != pert.tau)
    throw ConfigError("monitor_error_recursion: runs use different step sizes");
  const int m_end = static_cast<int>(ref.states.size()) - 1;
  const int n = sys.n, N = grid.M - 1;
  const double tau = ref.tau, h = grid.h();
  const Index dim = static_cast<Index>(n) * N;
  ErrorRecursionReport rep;
  rep.tau = tau;
  rep.h = h;

  std::vector<BandedLU> lus;
  std::vector<BlockTridiagonal> cts;
  lus.reserve(m_end);
  cts.reserve(m_end);
  const TimeGrid tg(tau, tau * m_end);
  for (int m = 0; m < m_end; ++m) {
    AssembledQh q = assemble_Qh(sys, ref.states[m], grid, ref.scheme, bv,
                                tg.t(m + 1));
    q.op.matrix.add_block_diagonal(1.0 / tau, sys.A);
    lus.push_back(BandedLU(q.op.matrix));
    if (lus.back().singular())
      throw SolverError("monitor_error_recursion: step matrix singular", m + 1,
                        std::numeric_limits<double>::infinity());
    cts.push_back(build_Ctilde_scaled(sys, pert.states[m + 1], pert.scheme, h));
  }
  auto apply_H = [&](int m, const Vector& v) {
    Vector w = -cts[m].multiply(v);
    detail::blockwise_apply_add(sys.A, v, w, 1.0 / tau);
    return lus[m].solve(w);
  };
  auto apply_HT = [&](int m, const Vector& v) {
    Vector w = lus[m].solve_transpose(v);
    Vector r = -cts[m].multiply_transpose(w);
    detail::blockwise_apply_add(sys.A.transpose(), w, r, 1.0 / tau);
    return r;
  };
  for (int m = 0; m < m_end; ++m)
    rep.step_norm.push_back(estimate_norm2(
        dim, [&](const Vector& v) { return apply_H(m, v); },
        [&](const Vector& v) { return apply_HT(m, v); }));
  for (int j = 0; j < m_end; ++j)
    rep.window_norm.push_back(estimate_norm2(
        dim,
        [&](const Vector& v) {
          Vector w = v;
          for (int m = j; m < m_end; ++m) w = apply_H(m, w);
          return w;
        },
        [&](const Vector& v) {
          Vector w = v;
          for (int m = m_end - 1; m >= j; --m) w = apply_HT(m, w);
          return w;
        }));
  for (int m = 0; m < m_end; ++m) {
    const Vector eta_m = ref.states[m].values - pert.states[m].values;
    const Vector eta_n = ref.states[m + 1].values - pert.states[m + 1].values;
    rep.residual_norm.push_back(
        discrete_l2_norm(eta_n - apply_H(m, eta_m), h));
  }
  rep.eta_final = discrete_l2_norm(
      ref.states[m_end].values - pert.states[m_end].values, h);
  if (C0_ref != nullptr && ref.scheme.is_uniform(FirstDiff::Forward))
    for (int m = 0; m < m_end; ++m)
      rep.delta0.push_back(
          stability_report(sys, ref.states[m], grid, tau, ref.scheme, C0_ref)
              .delta0);
  return rep;
}

// Self-convergence table: at each level, the run at N is compared against the
// run at 2N on the shared (coarse) points at the final time.  cfl holds the
// per-component Courant numbers (tau/h) max_k |C_ii(u_k)| of the level's own
// final state; e and order hold per-component differences and observed rates.
struct RefinementRow {
  int N = 0;
  Vector cfl;
  Vector e;
  Vector order;
  double wall_seconds = 0.0;
};

inline std::vector<RefinementRow> refinement_study(
    const ModelSetup& setup, double K0, double fixed_tau,
    const std::vector<int>& levels) {
  const bool use_k0 = std::isfinite(K0);
  if (use_k0 == std::isfinite(fixed_tau))
    throw ConfigError("refinement_study: give exactly one of K0 and tau");
  if (levels.empty()) throw ConfigError("refinement_study: no levels");
  for (size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 2)
      throw ConfigError("refinement_study: every level needs N >= 2");
    if (i > 0 && levels[i] != 2 * levels[i - 1])
      throw ConfigError("refinement_study: levels must double, got " +
                        std::to_string(levels[i - 1]) + " then " +
                        std::to_string(levels[i]));
  }
  std::vector<int> runs = levels;
  runs.push_back(2 * levels.back());
  struct RunOut {
    StateField final_state;
    double wall = 0.0;
  };
  std::map<int, RunOut> cache;
  for (int M : runs) {
    const SpaceGrid g(M);
    const double tau = use_k0 ? K0 * g.h() : fixed_tau;
    const TimeGrid tg(tau, setup.t_e);
    Trajectory tr = integrate(setup, g, tg, /*store_all=*/false);
    cache.emplace(M, RunOut{tr.final_state(), tr.wall_seconds});
  }
  const int n = setup.system.n;
  std::vector<RefinementRow> rows;
  for (size_t L = 0; L < levels.size(); ++L) {
    const int M = levels[L];
    const SpaceGrid g(M);
    const double tau = use_k0 ? K0 * g.h() : fixed_tau;
    const RunOut& coarse = cache.at(M);
    const RunOut& fine = cache.at(2 * M);
    RefinementRow row;
    row.N = M;
    row.wall_seconds = coarse.wall;
    row.cfl = Vector::Zero(n);
    for (int k = 1; k <= M - 1; ++k) {
      const Matrix Ck = eval_C(setup.system, coarse.final_state.block(k));
      for (int i = 0; i < n; ++i)
        row.cfl[i] = std::max(row.cfl[i], tau / g.h() * std::abs(Ck(i, i)));
    }
    row.e = Vector::Zero(n);
    for (int i = 1; i <= n; ++i) {
      double s = 0.0;
      for (int k = 1; k <= M - 1; ++k) {
        const double d =
            coarse.final_state.at(i, k) - fine.final_state.at(i, 2 * k);
        s += d * d;
      }
      row.e[i - 1] = std::sqrt(g.h() * s);
    }
    row.order = Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
    if (L > 0)
      for (int i = 0; i < n; ++i)
        row.order[i] = std::log2(rows.back().e[i] / row.e[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace pdae
