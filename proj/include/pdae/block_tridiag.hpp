#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pdae/errors.hpp"
#include "pdae/types.hpp"

namespace pdae {

// Square block-tridiagonal matrix with N diagonal blocks of size n.
// diag[j] sits at block (j,j); lower[j] couples block row j+1 to column j;
// upper[j] couples block row j to column j+1 (0-based block indices).
struct BlockTridiagonal {
  int n = 0, N = 0;
  std::vector<Matrix> lower, diag, upper;

  BlockTridiagonal() = default;

  static BlockTridiagonal zero(int n, int N) {
    if (n < 1 || N < 1)
      throw ConfigError("BlockTridiagonal: need n >= 1 and N >= 1");
    BlockTridiagonal T;
    T.n = n;
    T.N = N;
    T.diag.assign(N, Matrix::Zero(n, n));
    T.lower.assign(N - 1, Matrix::Zero(n, n));
    T.upper.assign(N - 1, Matrix::Zero(n, n));
    return T;
  }

  Index size() const { return static_cast<Index>(n) * N; }

  Vector multiply(const Eigen::Ref<const Vector>& x) const {
    if (x.size() != size())
      throw ConfigError("BlockTridiagonal::multiply: size mismatch");
    Vector y = Vector::Zero(size());
    for (int j = 0; j < N; ++j) {
      auto yj = y.segment(static_cast<Index>(j) * n, n);
      yj.noalias() += diag[j] * x.segment(static_cast<Index>(j) * n, n);
      if (j > 0)
        yj.noalias() += lower[j - 1] * x.segment(static_cast<Index>(j - 1) * n, n);
      if (j + 1 < N)
        yj.noalias() += upper[j] * x.segment(static_cast<Index>(j + 1) * n, n);
    }
    return y;
  }

  Vector multiply_transpose(const Eigen::Ref<const Vector>& x) const {
    if (x.size() != size())
      throw ConfigError("BlockTridiagonal::multiply_transpose: size mismatch");
    Vector y = Vector::Zero(size());
    for (int j = 0; j < N; ++j) {
      auto xj = x.segment(static_cast<Index>(j) * n, n);
      y.segment(static_cast<Index>(j) * n, n).noalias() +=
          diag[j].transpose() * xj;
      if (j > 0)
        y.segment(static_cast<Index>(j - 1) * n, n).noalias() +=
            lower[j - 1].transpose() * xj;
      if (j + 1 < N)
        y.segment(static_cast<Index>(j + 1) * n, n).noalias() +=
            upper[j].transpose() * xj;
    }
    return y;
  }

  // this += a * other; shapes must match.
  BlockTridiagonal& axpy(double a, const BlockTridiagonal& other) {
    if (other.n != n || other.N != N)
      throw ConfigError("BlockTridiagonal::axpy: shape mismatch");
    for (int j = 0; j < N; ++j) diag[j] += a * other.diag[j];
    for (int j = 0; j + 1 < N; ++j) {
      lower[j] += a * other.lower[j];
      upper[j] += a * other.upper[j];
    }
    return *this;
  }

  BlockTridiagonal& scale(double a) {
    for (auto& b : diag) b *= a;
    for (auto& b : lower) b *= a;
    for (auto& b : upper) b *= a;
    return *this;
  }

  // this += a * (I_N x S) for an n x n block S.
  BlockTridiagonal& add_block_diagonal(double a, const Matrix& S) {
    if (S.rows() != n || S.cols() != n)
      throw ConfigError("BlockTridiagonal::add_block_diagonal: block size mismatch");
    for (int j = 0; j < N; ++j) diag[j] += a * S;
    return *this;
  }

  Matrix dense() const {
    Matrix Dns = Matrix::Zero(size(), size());
    for (int j = 0; j < N; ++j) {
      Dns.block(static_cast<Index>(j) * n, static_cast<Index>(j) * n, n, n) = diag[j];
      if (j + 1 < N) {
        Dns.block(static_cast<Index>(j + 1) * n, static_cast<Index>(j) * n, n, n) =
            lower[j];
        Dns.block(static_cast<Index>(j) * n, static_cast<Index>(j + 1) * n, n, n) =
            upper[j];
      }
    }
    return Dns;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (int j = 0; j < N; ++j) s += diag[j].squaredNorm();
    for (int j = 0; j + 1 < N; ++j)
      s += lower[j].squaredNorm() + upper[j].squaredNorm();
    return std::sqrt(s);
  }

  // Max absolute row sum.
  double inf_norm() const {
    double best = 0.0;
    for (int j = 0; j < N; ++j)
      for (int r = 0; r < n; ++r) {
        double s = diag[j].row(r).cwiseAbs().sum();
        if (j > 0) s += lower[j - 1].row(r).cwiseAbs().sum();
        if (j + 1 < N) s += upper[j].row(r).cwiseAbs().sum();
        best = std::max(best, s);
      }
    return best;
  }
};

}  // namespace pdae
