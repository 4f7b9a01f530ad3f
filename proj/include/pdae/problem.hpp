#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pdae/errors.hpp"
#include "pdae/field.hpp"
#include "pdae/grid.hpp"
#include "pdae/types.hpp"

namespace pdae {

using ScalarFn = std::function<double(double)>;   // of t
using ProfileFn = std::function<double(double)>;  // of x
// f(t, x) as an n-vector; the zero default stands in for a missing source.
using SourceFn = std::function<Vector(double, double)>;

inline SourceFn zero_source(int n) {
  return [n](double, double) { return Vector::Zero(n); };
}

// Bookkeeping tag carried over from how the data was posed: freely chosen
// versus derived from the constraint part of the system.  Not used by the
// numerics.
enum class DataClass { Arbitrary, Consistent };

enum class BoundaryKind { Dirichlet, Free };

struct BoundaryEntry {
  BoundaryKind kind = BoundaryKind::Dirichlet;
  ScalarFn value;  // psi(t); only for Dirichlet entries
  DataClass tag = DataClass::Arbitrary;

  static BoundaryEntry dirichlet(ScalarFn v,
                                 DataClass tag = DataClass::Arbitrary) {
    return BoundaryEntry{BoundaryKind::Dirichlet, std::move(v), tag};
  }
  static BoundaryEntry dirichlet_const(double v,
                                       DataClass tag = DataClass::Arbitrary) {
    return dirichlet([v](double) { return v; }, tag);
  }
  static BoundaryEntry free() {
    return BoundaryEntry{BoundaryKind::Free, nullptr, DataClass::Arbitrary};
  }
};

// Boundary data for both endpoints.  Free entries have no prescribed value;
// the discretization must close them one-sidedly.
struct BoundarySpec {
  int n = 0;
  std::vector<BoundaryEntry> left, right;

  BoundarySpec() = default;

  BoundarySpec(std::vector<BoundaryEntry> left_,
               std::vector<BoundaryEntry> right_)
      : n(static_cast<int>(left_.size())),
        left(std::move(left_)),
        right(std::move(right_)) {
    if (n < 1 || static_cast<int>(right.size()) != n)
      throw ConfigError("BoundarySpec: left and right must list one entry per component");
    for (const auto& side : {std::cref(left), std::cref(right)})
      for (const BoundaryEntry& e : side.get())
        if (e.kind == BoundaryKind::Dirichlet && !e.value)
          throw ConfigError("BoundarySpec: Dirichlet entry without a value function");
  }

  static BoundarySpec homogeneous(int n) {
    std::vector<BoundaryEntry> side(n, BoundaryEntry::dirichlet_const(0.0));
    return BoundarySpec(side, side);
  }

  const std::vector<BoundaryEntry>& side(int s) const {
    return s == 0 ? left : right;
  }

  bool is_free(int component, int s) const {
    return side(s)[component - 1].kind == BoundaryKind::Free;
  }

  // Boundary vector at time t; Free components contribute 0 (their
  // coefficients must vanish by the closure rule).
  Vector value(double t, int s) const {
    Vector v = Vector::Zero(n);
    const auto& entries = side(s);
    for (int i = 0; i < n; ++i)
      if (entries[i].kind == BoundaryKind::Dirichlet) v[i] = entries[i].value(t);
    return v;
  }
};

// Initial profiles Phi_i(x) with the same arbitrary/consistent bookkeeping.
struct InitialSpec {
  int n = 0;
  std::vector<ProfileFn> profile;
  std::vector<DataClass> tag;

  InitialSpec() = default;

  InitialSpec(std::vector<ProfileFn> profile_, std::vector<DataClass> tag_)
      : n(static_cast<int>(profile_.size())),
        profile(std::move(profile_)),
        tag(std::move(tag_)) {
    if (n < 1 || static_cast<int>(tag.size()) != n)
      throw ConfigError("InitialSpec: need one profile and one tag per component");
    for (const ProfileFn& p : profile)
      if (!p) throw ConfigError("InitialSpec: missing profile function");
  }

  static InitialSpec zero(int n) {
    return InitialSpec(std::vector<ProfileFn>(n, [](double) { return 0.0; }),
                       std::vector<DataClass>(n, DataClass::Arbitrary));
  }

  StateField sample(const SpaceGrid& grid) const {
    return sample_interior(n, grid,
                           [&](int i, double x) { return profile[i - 1](x); });
  }
};

// Initial/boundary agreement at the corners (t = 0, x in {0, 1}).  Free
// boundary entries impose nothing.  Failures are reported, not thrown.
struct CompatibilityReport {
  bool pass = true;
  double tol = 0.0;
  Matrix residual;                        // n x 2, column 0 left, 1 right
  Eigen::Matrix<bool, Eigen::Dynamic, 2> checked;
};

inline CompatibilityReport check_compatibility(const InitialSpec& iv,
                                               const BoundarySpec& bv,
                                               double tol = 1e-12) {
  if (iv.n != bv.n)
    throw ConfigError("check_compatibility: iv and bv disagree on n");
  CompatibilityReport rep;
  rep.tol = tol;
  rep.residual = Matrix::Zero(iv.n, 2);
  rep.checked.setConstant(iv.n, 2, false);
  for (int s = 0; s < 2; ++s) {
    const double xs = s == 0 ? 0.0 : 1.0;
    for (int i = 0; i < iv.n; ++i) {
      const BoundaryEntry& e = bv.side(s)[i];
      if (e.kind != BoundaryKind::Dirichlet) continue;
      rep.checked(i, s) = true;
      rep.residual(i, s) = std::abs(iv.profile[i](xs) - e.value(0.0));
      if (!(rep.residual(i, s) <= tol)) rep.pass = false;
    }
  }
  return rep;
}

}  // namespace pdae
