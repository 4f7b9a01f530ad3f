#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pdae/errors.hpp"
#include "pdae/field.hpp"
#include "pdae/grid.hpp"
#include "pdae/problem.hpp"
#include "pdae/system.hpp"
#include "pdae/types.hpp"

namespace pdae {

enum class IndexVerdict { Index0, Index1, Index2, Undetermined };

inline std::string to_string(IndexVerdict v) {
  switch (v) {
    case IndexVerdict::Index0: return "index-0";
    case IndexVerdict::Index1: return "index-1";
    case IndexVerdict::Index2: return "index-2";
    default: return "undetermined";
  }
}

// Which rows get differentiated in time to close the system for u_t: 0 keeps
// the row of A, 1 differentiates an algebraic row once.  The plan is caller
// supplied; validate_plan enforces closure.  An entry of 2 would only be
// admissible for a row that vanishes identically, and differentiating an
// empty row never yields a usable equation, so order-2 plans are rejected and
// the order-2 verdict is never issued by this analysis.
struct DerivativeArraySpec {
  int order = 1;
  std::vector<int> row_plan;
};

inline void validate_plan(const PDAESystem& sys,
                          const DerivativeArraySpec& spec) {
  if (spec.order < 1 || spec.order > 2)
    throw ConfigError("derivative array: order must be 1 or 2");
  if (static_cast<int>(spec.row_plan.size()) != sys.n)
    throw ConfigError("derivative array: row_plan needs one entry per row");
  for (int i = 0; i < sys.n; ++i) {
    const int p = spec.row_plan[i];
    if (p < 0 || p > spec.order)
      throw ConfigError("derivative array: row_plan entries must lie in [0, order]");
    if (p >= 1 && sys.A.row(i).cwiseAbs().maxCoeff() != 0.0)
      throw ConfigError("derivative array: row " + std::to_string(i + 1) +
                        " is differential; differentiating it leaves a second "
                        "time derivative and the system does not close");
    if (p == 1) {
      double rest = sys.B.row(i).cwiseAbs().maxCoeff() +
                    sys.C0.row(i).cwiseAbs().maxCoeff() +
                    sys.D.row(i).cwiseAbs().maxCoeff();
      for (const Matrix& s : sys.C1) rest += s.row(i).cwiseAbs().maxCoeff();
      if (rest == 0.0)
        throw ConfigError("derivative array: row " + std::to_string(i + 1) +
                          " is identically zero; no plan closes it");
    }
    if (p == 2)
      throw ConfigError("derivative array: row " + std::to_string(i + 1) +
                        " would need two differentiations, which only arises "
                        "for an identically zero row and never closes");
  }
}

// Canonical plan: keep differential rows, differentiate algebraic ones once.
inline DerivativeArraySpec first_order_closure(const PDAESystem& sys) {
  DerivativeArraySpec spec;
  spec.row_plan.assign(sys.n, 0);
  for (int i = 0; i < sys.n; ++i)
    if (sys.A.row(i).cwiseAbs().maxCoeff() == 0.0) spec.row_plan[i] = 1;
  validate_plan(sys, spec);
  return spec;
}

namespace detail {

// Discrete coefficient derivative u_x at the interior points.  Central
// everywhere; at the first and last interior point the outside neighbor is
// the Dirichlet boundary value at t = 0 when bv is given, and a one-sided
// difference toward the interior otherwise (also for Free components).
inline std::vector<Vector> coefficient_derivative(const StateField& U,
                                                  const SpaceGrid& grid,
                                                  const BoundarySpec* bv) {
  const int n = U.n, N = grid.M - 1;
  const double h = grid.h();
  std::vector<Vector> ux(N, Vector::Zero(n));
  Vector bl = Vector::Zero(n), br = Vector::Zero(n);
  if (bv != nullptr) {
    bl = bv->value(0.0, 0);
    br = bv->value(0.0, 1);
  }
  for (int k = 1; k <= N; ++k)
    for (int c = 1; c <= n; ++c) {
      const bool left_closed =
          k == 1 && (bv == nullptr || bv->is_free(c, 0));
      const bool right_closed =
          k == N && (bv == nullptr || bv->is_free(c, 1));
      double d = 0.0;
      if (k == 1 && k == N) {
        // single interior point; with both outside values unavailable the
        // coefficient derivative degenerates to zero
        if (!left_closed && !right_closed)
          d = (br[c - 1] - bl[c - 1]) / (2.0 * h);
      } else if (k == 1) {
        d = left_closed ? (U.at(c, 2) - U.at(c, 1)) / h
                        : (U.at(c, 2) - bl[c - 1]) / (2.0 * h);
      } else if (k == N) {
        d = right_closed ? (U.at(c, N) - U.at(c, N - 1)) / h
                         : (br[c - 1] - U.at(c, N - 1)) / (2.0 * h);
      } else {
        d = (U.at(c, k + 1) - U.at(c, k - 1)) / (2.0 * h);
      }
      ux[k - 1][c - 1] = d;
    }
  return ux;
}

// Row blocks of the closed operator at point k: plan-0 rows come from A,
// plan-1 rows from  B d_xx + C[u] d_x + C'-term + D  with homogeneous values
// for the unknown outside the interval.  The second derivative is 3-point
// central; the first derivative is the backward difference, whose bidiagonal
// chain stays nonsingular on either interior-count parity (the central stencil
// with homogeneous ends is antisymmetric and exactly singular for an odd
// number of interior points whenever the coefficients are flip-symmetric).
struct IndexPointBlocks {
  Matrix left, center, right;
};

inline IndexPointBlocks index_blocks(const PDAESystem& sys,
                                     const DerivativeArraySpec& spec,
                                     const Matrix& Ck, const Matrix& Wk,
                                     double h) {
  const int n = sys.n;
  const double ih2 = 1.0 / (h * h), ih = 1.0 / h;
  IndexPointBlocks b{Matrix::Zero(n, n), Matrix::Zero(n, n),
                     Matrix::Zero(n, n)};
  for (int i = 0; i < n; ++i) {
    if (spec.row_plan[i] == 0) {
      b.center.row(i) = sys.A.row(i);
    } else {
      b.center.row(i) =
          -2.0 * ih2 * sys.B.row(i) + ih * Ck.row(i) + Wk.row(i) + sys.D.row(i);
      b.left.row(i) = ih2 * sys.B.row(i) - ih * Ck.row(i);
      b.right.row(i) = ih2 * sys.B.row(i);
    }
  }
  return b;
}

// Interpolate a state to the doubled grid: even fine points copy coarse
// values, odd ones take midpoint averages.  The flanking value outside the
// interior comes from the boundary data at t = 0 for Dirichlet components and
// from linear extrapolation for Free ones.
inline StateField refine_probe(const StateField& U, const SpaceGrid& grid,
                               const BoundarySpec& bv) {
  const int n = U.n, M = grid.M;
  StateField F(n, 2 * M);
  const Vector bl = bv.value(0.0, 0), br = bv.value(0.0, 1);
  for (int c = 1; c <= n; ++c) {
    double ul = bl[c - 1], ur = br[c - 1];
    if (bv.is_free(c, 0))
      ul = M >= 3 ? 2.0 * U.at(c, 1) - U.at(c, 2) : U.at(c, 1);
    if (bv.is_free(c, 1))
      ur = M >= 3 ? 2.0 * U.at(c, M - 1) - U.at(c, M - 2) : U.at(c, M - 1);
    auto ext = [&](int k) {
      if (k == 0) return ul;
      if (k == M) return ur;
      return U.at(c, k);
    };
    for (int j = 1; j <= 2 * M - 1; ++j)
      F.at(c, j) = j % 2 == 0 ? U.at(c, j / 2)
                              : 0.5 * (ext((j - 1) / 2) + ext((j + 1) / 2));
  }
  return F;
}

}  // namespace detail

// Dense matrix of the closure operator linearized at U under the given plan.
inline Matrix build_index_operator(const PDAESystem& sys, const StateField& U,
                                   const SpaceGrid& grid,
                                   const DerivativeArraySpec& spec,
                                   const BoundarySpec* bv) {
  if (U.n != sys.n || U.M != grid.M)
    throw ConfigError("build_index_operator: shape mismatch");
  validate_plan(sys, spec);
  const int n = sys.n, N = grid.M - 1;
  const auto ux = detail::coefficient_derivative(U, grid, bv);
  Matrix P = Matrix::Zero(static_cast<Index>(n) * N, static_cast<Index>(n) * N);
  for (int k = 1; k <= N; ++k) {
    const Matrix Ck = eval_C(sys, U.block(k));
    const Matrix Wk = eval_C1_dir(sys, ux[k - 1]);
    const auto b = detail::index_blocks(sys, spec, Ck, Wk, grid.h());
    const Index r = static_cast<Index>(k - 1) * n;
    P.block(r, r, n, n) = b.center;
    if (k > 1) P.block(r, r - n, n, n) = b.left;
    if (k < N) P.block(r, r + n, n, n) = b.right;
  }
  return P;
}

// Matrix-free action of the same operator with one-sided coefficient edges
// (no boundary data consulted).  Matches build_index_operator with bv null.
inline Vector index_operator_apply(const PDAESystem& sys, const StateField& U,
                                   const SpaceGrid& grid,
                                   const DerivativeArraySpec& spec,
                                   const Eigen::Ref<const Vector>& z) {
  if (U.n != sys.n || U.M != grid.M)
    throw ConfigError("index_operator_apply: shape mismatch");
  const int n = sys.n, N = grid.M - 1;
  if (z.size() != static_cast<Index>(n) * N)
    throw ConfigError("index_operator_apply: vector has wrong length");
  validate_plan(sys, spec);
  const auto ux = detail::coefficient_derivative(U, grid, nullptr);
  Vector y = Vector::Zero(z.size());
  for (int k = 1; k <= N; ++k) {
    const Matrix Ck = eval_C(sys, U.block(k));
    const Matrix Wk = eval_C1_dir(sys, ux[k - 1]);
    const auto b = detail::index_blocks(sys, spec, Ck, Wk, grid.h());
    const Index r = static_cast<Index>(k - 1) * n;
    auto yk = y.segment(r, n);
    yk.noalias() += b.center * z.segment(r, n);
    if (k > 1) yk.noalias() += b.left * z.segment(r - n, n);
    if (k < N) yk.noalias() += b.right * z.segment(r + n, n);
  }
  return y;
}

struct IndexCertificate {
  IndexVerdict verdict = IndexVerdict::Undetermined;
  int order = 0;  // derivative order used for the verdict
  int M_coarse = 0, M_fine = 0;
  double sigma_min_coarse = 0.0, sigma_min_fine = 0.0;
  double ratio = 0.0;
  double floor = 0.0;
  std::vector<int> row_plan;
};

// Time-index classification at a probe state.  A nonsingular A settles index
// 0 outright.  Otherwise the closure operator under the supplied plan is
// formed at the probe grid and at the doubled grid (probe interpolated); a
// smallest singular value that stays above the floor at both resolutions and
// moves by less than grid-refinement noise certifies index 1.  Anything else
// stays undetermined rather than guessed.
inline IndexCertificate time_index(const PDAESystem& sys,
                                   const StateField& probe,
                                   const SpaceGrid& grid,
                                   const DerivativeArraySpec& spec,
                                   const BoundarySpec& bv) {
  if (probe.n != sys.n || probe.M != grid.M)
    throw ConfigError("time_index: probe state does not match the grid");
  IndexCertificate cert;
  Eigen::JacobiSVD<Matrix> asvd(sys.A);
  const double a_max = asvd.singularValues().size()
                           ? asvd.singularValues()(0)
                           : 0.0;
  const double a_min = asvd.singularValues().size()
                           ? asvd.singularValues()(asvd.singularValues().size() - 1)
                           : 0.0;
  if (a_max > 0.0 && a_min > 1e-10 * a_max) {
    cert.verdict = IndexVerdict::Index0;
    cert.order = 0;
    return cert;
  }
  validate_plan(sys, spec);
  cert.order = spec.order;
  cert.row_plan = spec.row_plan;
  cert.M_coarse = grid.M;
  cert.M_fine = 2 * grid.M;
  const StateField fine = detail::refine_probe(probe, grid, bv);
  double smax_coarse = 0.0;
  auto sigma_min_of = [&](const StateField& U, const SpaceGrid& g,
                          double* smax) {
    const Matrix P = build_index_operator(sys, U, g, spec, &bv);
    Eigen::BDCSVD<Matrix> svd(P);
    const auto& s = svd.singularValues();
    if (smax != nullptr) *smax = s(0);
    return s(s.size() - 1);
  };
  cert.sigma_min_coarse = sigma_min_of(probe, grid, &smax_coarse);
  cert.sigma_min_fine = sigma_min_of(fine, SpaceGrid(2 * grid.M), nullptr);
  cert.floor = 1e-10 * std::max(1.0, smax_coarse);
  cert.ratio = cert.sigma_min_coarse > 0.0
                   ? cert.sigma_min_fine / cert.sigma_min_coarse
                   : 0.0;
  const bool above = cert.sigma_min_coarse > cert.floor &&
                     cert.sigma_min_fine > cert.floor;
  const bool stable = cert.ratio >= 0.8 && cert.ratio <= 1.25;
  cert.verdict = above && stable ? IndexVerdict::Index1
                                 : IndexVerdict::Undetermined;
  return cert;
}

// Determinant of the two-point boundary map for  y'' = c1(x) y' + c0(x) y
// with y(0) free data and the integral functional int_0^1 y dx:
//   det = phi1'(0) int phi2 - phi2'(0) int phi1
// over the fundamental system phi1(0)=1, phi1'(0)=0; phi2(0)=0, phi2'(0)=1.
// Classical RK4 with a fixed step on the state (y, y', int y).
inline double lemma2_determinant(const ProfileFn& c0, const ProfileFn& c1,
                                 double step = 1e-4) {
  if (!(step > 0.0) || step > 0.5)
    throw ConfigError("lemma2_determinant: step must lie in (0, 0.5]");
  const long nsteps = std::lround(1.0 / step);
  const double h = 1.0 / static_cast<double>(nsteps);
  using State = Eigen::Matrix<double, 6, 1>;  // (y1, p1, I1, y2, p2, I2)
  auto rhs = [&](double x, const State& s) {
    State d;
    d[0] = s[1];
    d[1] = c1(x) * s[1] + c0(x) * s[0];
    d[2] = s[0];
    d[3] = s[4];
    d[4] = c1(x) * s[4] + c0(x) * s[3];
    d[5] = s[3];
    return d;
  };
  State s;
  s << 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
  const double p1_0 = s[1], p2_0 = s[4];
  for (long i = 0; i < nsteps; ++i) {
    const double x = i * h;
    const State k1 = rhs(x, s);
    const State k2 = rhs(x + 0.5 * h, s + 0.5 * h * k1);
    const State k3 = rhs(x + 0.5 * h, s + 0.5 * h * k2);
    const State k4 = rhs(x + h, s + h * k3);
    s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return p1_0 * s[5] - p2_0 * s[2];
}

// Congruence pair reducing B to diag(I_m, 0): S0 B S1^{-1} has an identity
// leading m x m block and trailing entries no larger than the dropped
// singular values.  S1 is orthogonal; S0 scales the leading left singular
// directions by 1/sigma.
struct RankNormalization {
  Matrix S0, S1;
  int rank = 0;
};

inline RankNormalization normalize_B(const Matrix& B, double rel_tol = 1e-10) {
  if (B.rows() != B.cols() || B.rows() < 1)
    throw ConfigError("normalize_B: need a square matrix");
  const int n = static_cast<int>(B.rows());
  Eigen::JacobiSVD<Matrix> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sig = svd.singularValues();
  RankNormalization out;
  const double smax = sig.size() ? sig(0) : 0.0;
  Matrix Dinv = Matrix::Identity(n, n);
  for (int i = 0; i < n; ++i)
    if (smax > 0.0 && sig(i) > rel_tol * smax) {
      Dinv(i, i) = 1.0 / sig(i);
      ++out.rank;
    }
  out.S0 = Dinv * svd.matrixU().transpose();
  out.S1 = svd.matrixV().transpose();
  return out;
}

}  // namespace pdae
