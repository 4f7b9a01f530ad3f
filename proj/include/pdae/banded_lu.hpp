#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "pdae/block_tridiag.hpp"
#include "pdae/errors.hpp"
#include "pdae/types.hpp"

namespace pdae {

// LU factorization with row partial pivoting of a banded matrix, in the
// classic band layout: element (i,j) lives in ab(kl+ku+i-j, j), with kl extra
// rows on top absorbing pivot fill.  Built from a block-tridiagonal matrix,
// so kl = ku = 2n-1.  Row pivoting is unrestricted within the band, which
// copes with structurally zero diagonal blocks (algebraic rows under central
// differencing) that defeat block-confined elimination.
class BandedLU {
 public:
  explicit BandedLU(const BlockTridiagonal& T, double pivot_rel_tol = 1e-12)
      : s_(static_cast<int>(T.size())),
        kl_(2 * T.n - 1),
        ku_(2 * T.n - 1),
        kv_(kl_ + ku_),
        pivot_rel_tol_(pivot_rel_tol) {
    ab_ = Matrix::Zero(2 * kl_ + ku_ + 1, s_);
    rowscale_ = Vector::Zero(s_);
    colsum_ = Vector::Zero(s_);
    const int n = T.n;
    auto put = [&](int i, int j, double v) {
      ab_(kv_ + i - j, j) = v;
      rowscale_[i] = std::max(rowscale_[i], std::abs(v));
      colsum_[j] += std::abs(v);
    };
    for (int bj = 0; bj < T.N; ++bj) {
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
          put(bj * n + r, bj * n + c, T.diag[bj](r, c));
          if (bj + 1 < T.N) {
            put((bj + 1) * n + r, bj * n + c, T.lower[bj](r, c));
            put(bj * n + r, (bj + 1) * n + c, T.upper[bj](r, c));
          }
        }
    }
    norm1_ = colsum_.maxCoeff();
    factor();
  }

  bool singular() const { return singular_; }
  int size() const { return s_; }

  // Hager-style 1-norm condition estimate; inf when singular.
  double condition_estimate() const {
    if (singular_) return std::numeric_limits<double>::infinity();
    if (cond_ >= 0.0) return cond_;
    Vector x = Vector::Constant(s_, 1.0 / s_);
    double est = 0.0;
    for (int it = 0; it < 5; ++it) {
      Vector y = solve(x);
      est = y.cwiseAbs().sum();
      Vector xi(s_);
      for (int i = 0; i < s_; ++i) xi[i] = y[i] >= 0.0 ? 1.0 : -1.0;
      Vector z = solve_transpose(xi);
      int j = 0;
      double zmax = z.cwiseAbs().maxCoeff(&j);
      if (zmax <= z.dot(x)) break;
      x.setZero();
      x[j] = 1.0;
    }
    cond_ = norm1_ * est;
    return cond_;
  }

  Vector solve(Vector b) const {
    require_regular();
    if (b.size() != s_) throw ConfigError("BandedLU::solve: size mismatch");
    for (int j = 0; j < s_; ++j) {
      const int jp = piv_[j];
      if (jp != j) std::swap(b[j], b[jp]);
      const int km = std::min(kl_, s_ - 1 - j);
      for (int p = 1; p <= km; ++p) b[j + p] -= ab_(kv_ + p, j) * b[j];
    }
    for (int j = s_ - 1; j >= 0; --j) {
      b[j] /= ab_(kv_, j);
      const int lo = std::max(0, j - kv_);
      for (int i = lo; i < j; ++i) b[i] -= ab_(kv_ + i - j, j) * b[j];
    }
    return b;
  }

  Vector solve_transpose(Vector b) const {
    require_regular();
    if (b.size() != s_) throw ConfigError("BandedLU::solve_transpose: size mismatch");
    for (int j = 0; j < s_; ++j) {
      const int lo = std::max(0, j - kv_);
      double sum = b[j];
      for (int i = lo; i < j; ++i) sum -= ab_(kv_ + i - j, j) * b[i];
      b[j] = sum / ab_(kv_, j);
    }
    for (int j = s_ - 2; j >= 0; --j) {
      const int km = std::min(kl_, s_ - 1 - j);
      for (int p = 1; p <= km; ++p) b[j] -= ab_(kv_ + p, j) * b[j + p];
      const int jp = piv_[j];
      if (jp != j) std::swap(b[j], b[jp]);
    }
    return b;
  }

 private:
  void require_regular() const {
    if (singular_)
      throw SolverError("banded LU: matrix is singular to working precision (pivot below threshold at column " +
                            std::to_string(first_bad_) + ")",
                        -1, std::numeric_limits<double>::infinity());
  }

  void factor() {
    piv_.resize(s_);
    std::vector<int> perm(s_);
    std::iota(perm.begin(), perm.end(), 0);
    int ju = 0;
    for (int j = 0; j < s_; ++j) {
      const int km = std::min(kl_, s_ - 1 - j);
      int jp = 0;
      double best = std::abs(ab_(kv_, j));
      for (int p = 1; p <= km; ++p) {
        const double a = std::abs(ab_(kv_ + p, j));
        if (a > best) {
          best = a;
          jp = p;
        }
      }
      piv_[j] = j + jp;
      const double threshold =
          pivot_rel_tol_ * std::max(rowscale_[perm[j + jp]],
                                    std::numeric_limits<double>::min());
      if (best <= threshold) {
        singular_ = true;
        first_bad_ = j;
        return;
      }
      ju = std::max(ju, std::min(j + jp + ku_, s_ - 1));
      if (jp != 0) {
        std::swap(perm[j], perm[j + jp]);
        for (int c = j; c <= ju; ++c)
          std::swap(ab_(kv_ + j - c, c), ab_(kv_ + j + jp - c, c));
      }
      if (km > 0) {
        const double pivot = ab_(kv_, j);
        for (int p = 1; p <= km; ++p) ab_(kv_ + p, j) /= pivot;
        for (int c = j + 1; c <= ju; ++c) {
          const double f = ab_(kv_ + j - c, c);
          if (f != 0.0)
            for (int p = 1; p <= km; ++p)
              ab_(kv_ + j + p - c, c) -= f * ab_(kv_ + p, j);
        }
      }
    }
  }

  int s_, kl_, ku_, kv_;
  double pivot_rel_tol_;
  Matrix ab_;
  Vector rowscale_, colsum_;
  std::vector<int> piv_;
  double norm1_ = 0.0;
  mutable double cond_ = -1.0;
  bool singular_ = false;
  int first_bad_ = -1;
};

}  // namespace pdae
