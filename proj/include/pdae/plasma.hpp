#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pdae/difference.hpp"
#include "pdae/errors.hpp"
#include "pdae/index.hpp"
#include "pdae/problem.hpp"
#include "pdae/splitting.hpp"
#include "pdae/system.hpp"
#include "pdae/types.hpp"

namespace pdae {

// Screw-pinch transport model in four fields: particle density u1, radial
// velocity u2, temperature-like u3 and flux function u4.  Two evolution
// equations, one first-order constraint coupling u3 to u4, and one elliptic
// constraint tying u4 back to the densities.
struct PlasmaParams {
  double b0 = 0.02;  // density diffusivity
  double d1 = 1.0;   // velocity-flux coupling
  double u30 = 0.2;  // boundary temperature level
  double K2 = 0.4;   // initial velocity amplitude

  void validate() const {
    if (!(b0 > 0.0)) throw ConfigError("PlasmaParams: b0 must be positive");
    for (double v : {d1, u30, K2})
      if (!std::isfinite(v))
        throw ConfigError("PlasmaParams: parameters must be finite");
  }
};

// Flux amplitude making the stationary constraint rows hold exactly for the
// cosine profile below.
inline double plasma_K4(const PlasmaParams& p) {
  return -p.u30 / (4.0 * M_PI * M_PI);
}

inline PDAESystem build_plasma_system(const PlasmaParams& p) {
  p.validate();
  const int n = 4;
  Matrix A = Matrix::Zero(n, n);
  A(0, 0) = 1.0;
  A(1, 1) = 1.0;
  Matrix B = Matrix::Zero(n, n);
  B(0, 0) = -p.b0;
  B(3, 3) = 1.0;
  Matrix D = Matrix::Zero(n, n);
  D(3, 0) = 1.0;
  D(3, 2) = -1.0;
  Matrix C0 = Matrix::Zero(n, n);
  C0(1, 3) = p.d1;
  C0(2, 2) = -1.0;
  std::vector<Matrix> C1(n, Matrix::Zero(n, n));
  C1[0](0, 1) = 1.0;  // dC12/du1
  C1[1](0, 0) = 1.0;  // dC11/du2
  C1[1](1, 1) = 1.0;  // dC22/du2
  C1[2](2, 3) = 1.0;  // dC34/du3
  return PDAESystem(std::move(A), std::move(B), std::move(D), std::move(C0),
                    std::move(C1));
}

// Initial profiles: the flux g4 is a cosine, the temperature g3 solves the
// first-order constraint g3' = g3 g4', the density g1 closes the elliptic
// row g4'' + g1 - g3 = 0, and the velocity g2 is an independent parabola.
inline InitialSpec plasma_initial_values(const PlasmaParams& p) {
  p.validate();
  const double K4 = plasma_K4(p), u30 = p.u30, K2 = p.K2;
  const double w = 2.0 * M_PI;
  auto g4 = [K4, w](double x) { return K4 * std::cos(w * x); };
  auto g3 = [K4, u30, w](double x) {
    return u30 * std::exp(K4 * (std::cos(w * x) - 1.0));
  };
  auto g1 = [g3, g4, w](double x) { return g3(x) + w * w * g4(x); };
  auto g2 = [K2](double x) { return K2 * x * (x - 0.5); };
  return InitialSpec(
      {g1, g2, g3, g4},
      {DataClass::Consistent, DataClass::Arbitrary, DataClass::Consistent,
       DataClass::Arbitrary});
}

// Dirichlet data where the constraints pin values, Free where the model has
// outflow: u2 and u3 leave the right edge to the one-sided closure.
inline BoundarySpec plasma_boundary_spec(const PlasmaParams& p) {
  p.validate();
  const double K4 = plasma_K4(p);
  std::vector<BoundaryEntry> left{
      BoundaryEntry::dirichlet_const(0.0),
      BoundaryEntry::dirichlet_const(0.0),
      BoundaryEntry::dirichlet_const(p.u30),
      BoundaryEntry::dirichlet_const(K4, DataClass::Consistent)};
  std::vector<BoundaryEntry> right{
      BoundaryEntry::dirichlet_const(0.0), BoundaryEntry::free(),
      BoundaryEntry::free(),
      BoundaryEntry::dirichlet_const(K4, DataClass::Consistent)};
  return BoundarySpec(std::move(left), std::move(right));
}

// Reference convection matrix for the frozen-coefficient analysis: C at the
// distinguished constant state (0, 0, u30, K4) of the left boundary.
inline Matrix plasma_stability_C0(const PlasmaParams& p) {
  const PDAESystem sys = build_plasma_system(p);
  Vector u(4);
  u << 0.0, 0.0, p.u30, plasma_K4(p);
  return eval_C(sys, u);
}

// Default stencil selection.  The velocity equation is hyperbolic with no
// diffusion, so its stencil must follow the local flow direction: a fixed
// one-sided choice is downwind wherever u2 has the opposite sign, which
// amplifies at a rate growing like 1/h and wrecks fine grids.  The
// temperature constraint is a first-order equation in x anchored by the left
// datum u3(0); backward differences march it rightward, while forward
// differencing would never reference u3(0) and leave the component floating
// (the right edge is Free).  The density has enough diffusion to tolerate a
// fixed direction, and the flux row carries no first derivative.
inline DiffScheme plasma_default_scheme() {
  return DiffScheme{FirstDiff::Backward,
                    FirstDiff::Backward,
                    {FirstDiff::Backward, FirstDiff::UpwindBySign,
                     FirstDiff::Backward, FirstDiff::Backward}};
}

// Action of the closure operator linearized at u on a perturbation z, both
// four-component fields on the same grid.  The first two rows pass z1, z2
// through; the constraint rows give  -d_x z3 + u4x z3 + u3 d_x z4  and
// z1 - z3 + d_xx z4.  The diffusivity and coupling parameters do not enter.
inline StateField plasma_P_apply(const StateField& u, const SpaceGrid& grid,
                                 const StateField& z) {
  if (u.n != 4 || z.n != 4)
    throw ConfigError("plasma_P_apply: fields must have four components");
  if (u.M != grid.M || z.M != grid.M)
    throw ConfigError("plasma_P_apply: fields must live on the given grid");
  const PDAESystem sys = build_plasma_system(PlasmaParams{});
  const DerivativeArraySpec spec = first_order_closure(sys);
  StateField out(4, grid.M);
  out.time_step = z.time_step;
  out.values = index_operator_apply(sys, u, grid, spec, z.values);
  return out;
}

inline ModelSetup plasma_setup(const PlasmaParams& p, const DiffScheme& scheme,
                               SolverKind solver, double t_e) {
  ModelSetup s;
  s.system = build_plasma_system(p);
  s.iv = plasma_initial_values(p);
  s.bv = plasma_boundary_spec(p);
  s.f = SourceFn();  // homogeneous
  s.scheme = scheme;
  s.solver = solver;
  s.t_e = t_e;
  return s;
}

}  // namespace pdae
