#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "pdae/plasma.hpp"
#include "pdae/splitting.hpp"

using namespace pdae;

namespace {

std::mt19937_64 rng(31);

double rnd() {
  return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
}

BlockTridiagonal random_tridiag(int n, int N, double diag_boost) {
  BlockTridiagonal T = BlockTridiagonal::zero(n, N);
  auto fill = [&](Matrix& b) {
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) b(r, c) = rnd();
  };
  for (auto& b : T.diag) {
    fill(b);
    b += diag_boost * Matrix::Identity(n, n);
  }
  for (auto& b : T.lower) fill(b);
  for (auto& b : T.upper) fill(b);
  return T;
}

StateField perturbed_plasma_state(const SpaceGrid& grid, double amp) {
  StateField U = plasma_initial_values(PlasmaParams{}).sample(grid);
  for (Index i = 0; i < U.values.size(); ++i) U.values[i] += amp * rnd();
  return U;
}

}  // namespace

TEST_CASE("row partition separates algebraic from differential rows") {
  const PDAESystem sys = build_plasma_system(PlasmaParams{});
  const SpaceGrid grid(6);
  StateField U = plasma_initial_values(PlasmaParams{}).sample(grid);
  const DiscreteOperator Q =
      assemble_Qh(sys, U, grid, plasma_default_scheme(),
                  plasma_boundary_spec(PlasmaParams{}), 0.0)
          .op;
  const SplitPartition p = partition_L(sys, Q);
  CHECK(p.n1 == 2);
  Matrix E1 = Matrix::Zero(4, 4), E2 = Matrix::Zero(4, 4);
  E1(0, 0) = E1(1, 1) = 1.0;
  E2(2, 2) = E2(3, 3) = 1.0;
  CHECK((p.E1 - E1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((p.E2 - E2).cwiseAbs().maxCoeff() == 0.0);
  // L1 holds the algebraic rows, L2 the differential ones, summing back to Q
  for (int j = 0; j < p.L1.N; ++j) {
    CHECK(p.L1.diag[j].row(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(p.L1.diag[j].row(1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(p.L2.diag[j].row(2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(p.L2.diag[j].row(3).cwiseAbs().maxCoeff() == 0.0);
    Matrix sum = p.L1.diag[j] + p.L2.diag[j];
    CHECK((sum - Q.matrix.diag[j]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("split rejects a scaled time-derivative row") {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 2.0;  // differential but not a unit row
  Matrix Z = Matrix::Zero(2, 2);
  const PDAESystem sys(A, Z, Matrix::Identity(2, 2), Z, {Z, Z});
  DiscreteOperator Q;
  Q.matrix = BlockTridiagonal::zero(2, 3);
  Q.n = 2;
  Q.M = 4;
  CHECK_THROWS_WITH_AS(partition_L(sys, Q),
                       doctest::Contains("normalize_B"), ConfigError);
}

TEST_CASE("factorization defect vanishes for unit differential rows") {
  const PDAESystem sys = build_plasma_system(PlasmaParams{});
  const SpaceGrid grid(20);
  const BoundarySpec bv = plasma_boundary_spec(PlasmaParams{});
  for (int trial = 0; trial < 3; ++trial) {
    StateField U = perturbed_plasma_state(grid, 0.3);
    const DiscreteOperator Q =
        assemble_Qh(sys, U, grid, plasma_default_scheme(), bv, 0.0).op;
    const SplitPartition p = partition_L(sys, Q);
    const double tau = 0.01;
    const double scale =
        1.0 + tau * p.L1.inf_norm() + tau * p.L2.inf_norm();
    CHECK(factorization_residual(sys, p, tau) <= 1e-12 * scale);
  }
}

TEST_CASE("split equals full when every row is differential") {
  // scalar heat equation: the algebraic factor is empty, so both solvers
  // perform the identical linear solve
  Matrix A = Matrix::Identity(1, 1), B = -Matrix::Identity(1, 1);
  Matrix Z = Matrix::Zero(1, 1);
  const PDAESystem sys(A, B, Z, Z, {Z});
  const SpaceGrid grid(10);
  const TimeGrid tg(0.05, 1.0);
  const BoundarySpec bv = BoundarySpec::homogeneous(1);
  StateField U = sample_interior(1, grid, [](int, double x) {
    return std::sin(M_PI * x);
  });
  const DiffScheme sch = DiffScheme::uniform(FirstDiff::Central);
  const StateField a = step_full(sys, U, grid, tg, sch, bv, nullptr);
  const StateField b = step_split(sys, U, grid, tg, sch, bv, nullptr);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(a.time_step == 1);
}

TEST_CASE("split equals full when every row is algebraic") {
  Matrix Z = Matrix::Zero(1, 1);
  Matrix C0 = Matrix::Identity(1, 1);
  const PDAESystem sys(Z, Z, Z, C0, {Z});
  const SpaceGrid grid(9);
  const TimeGrid tg(0.1, 1.0);
  std::vector<BoundaryEntry> l{BoundaryEntry::dirichlet_const(1.0)};
  std::vector<BoundaryEntry> r{BoundaryEntry::free()};
  const BoundarySpec bv(l, r);
  StateField U(1, 9);
  const DiffScheme sch = DiffScheme::uniform(FirstDiff::Backward);
  const SourceFn f = [](double, double x) {
    return Vector::Constant(1, std::cos(x));
  };
  const StateField a = step_full(sys, U, grid, tg, sch, bv, f);
  const StateField b = step_split(sys, U, grid, tg, sch, bv, f);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() <
        1e-13 * a.values.cwiseAbs().maxCoeff());
}

TEST_CASE("per-step gap between split and full shrinks like tau squared") {
  const PlasmaParams par{};
  const PDAESystem sys = build_plasma_system(par);
  const SpaceGrid grid(12);
  const BoundarySpec bv = plasma_boundary_spec(par);
  const DiffScheme sch = plasma_default_scheme();
  StateField U = plasma_initial_values(par).sample(grid);
  // one plain step first so the state is no longer special
  U = step_full(sys, U, grid, TimeGrid(0.02, 1.0), sch, bv, nullptr);
  U.time_step = 0;
  double gap[3];
  double tau = 0.02;
  for (int l = 0; l < 3; ++l, tau /= 2.0) {
    const TimeGrid tg(tau, 1.0);
    const StateField a = step_full(sys, U, grid, tg, sch, bv, nullptr);
    const StateField b = step_split(sys, U, grid, tg, sch, bv, nullptr);
    gap[l] = (a.values - b.values).cwiseAbs().maxCoeff();
  }
  CHECK(gap[0] / gap[1] > 2.8);
  CHECK(gap[0] / gap[1] < 5.5);
  CHECK(gap[1] / gap[2] > 2.8);
  CHECK(gap[1] / gap[2] < 5.5);
}

TEST_CASE("integrate rejects incompatible initial and boundary data") {
  const PlasmaParams par{};
  ModelSetup setup{build_plasma_system(par), plasma_initial_values(par),
                   plasma_boundary_spec(par), nullptr,
                   plasma_default_scheme(), SolverKind::Full, 1.0};
  // shift the first component's profile away from its boundary datum
  InitialSpec iv = setup.iv;
  auto base = iv.profile[0];
  iv.profile[0] = [base](double x) { return base(x) + 0.1; };
  setup.iv = iv;
  CHECK_THROWS_WITH_AS(integrate(setup, SpaceGrid(8), TimeGrid(0.25, 1.0)),
                       doctest::Contains("component 1"), ConfigError);
}

TEST_CASE("integrate stores either the whole history or just the end") {
  const PlasmaParams par{};
  const ModelSetup setup{build_plasma_system(par), plasma_initial_values(par),
                         plasma_boundary_spec(par), nullptr,
                         plasma_default_scheme(), SolverKind::Full, 1.0};
  const SpaceGrid grid(8);
  const TimeGrid tg(0.125, 1.0);
  const Trajectory all = integrate(setup, grid, tg, true);
  CHECK(static_cast<long>(all.states.size()) == tg.m_max + 1);
  CHECK(all.states.front().time_step == 0);
  CHECK(all.final_state().time_step == tg.m_max);
  const Trajectory last = integrate(setup, grid, tg, false);
  CHECK(last.states.size() == 1);
  // identical runs produce bitwise identical trajectories
  CHECK((all.final_state().values - last.final_state().values)
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("a structurally singular step reports the failing level") {
  // everything zero: the stepping matrix has no pivots at all
  Matrix Z = Matrix::Zero(1, 1);
  const PDAESystem sys(Z, Z, Z, Z, {Z});
  StateField U(1, 4);
  try {
    step_full(sys, U, SpaceGrid(4), TimeGrid(0.5, 1.0),
              DiffScheme::uniform(FirstDiff::Backward),
              BoundarySpec::homogeneous(1), nullptr);
    FAIL("expected a solver failure");
  } catch (const SolverError& e) {
    CHECK(e.time_step == 1);
    CHECK(std::isinf(e.condition_estimate));
  }
}

TEST_CASE("banded factorization matches a dense solve") {
  for (int trial = 0; trial < 4; ++trial) {
    const int n = 1 + trial % 3, N = 5 + trial;
    const BlockTridiagonal T = random_tridiag(n, N, 3.0);
    const Matrix Dn = T.dense();
    const BandedLU lu(T);
    REQUIRE_FALSE(lu.singular());
    Vector b(T.size());
    for (Index i = 0; i < b.size(); ++i) b[i] = rnd();
    const Vector x = lu.solve(b);
    const Vector xd = Eigen::FullPivLU<Matrix>(Dn).solve(b);
    CHECK((x - xd).cwiseAbs().maxCoeff() < 1e-10 * xd.cwiseAbs().maxCoeff());
    const Vector y = lu.solve_transpose(b);
    const Vector yd = Eigen::FullPivLU<Matrix>(Dn.transpose()).solve(b);
    CHECK((y - yd).cwiseAbs().maxCoeff() < 1e-10 * yd.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("banded pivoting copes with zero diagonal blocks") {
  // central differencing of a pure first derivative zeroes every diagonal
  // entry; block-confined elimination would die immediately
  BlockTridiagonal T = BlockTridiagonal::zero(1, 5);
  for (int j = 0; j < 4; ++j) {
    T.lower[j](0, 0) = -1.0;
    T.upper[j](0, 0) = 1.0;
  }
  T.diag[4](0, 0) = 1.0;  // anchor so the matrix is regular
  const BandedLU lu(T);
  REQUIRE_FALSE(lu.singular());
  Vector b = Vector::Ones(5);
  const Vector x = lu.solve(b);
  CHECK((T.multiply(x) - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exactly singular input is flagged instead of solved") {
  BlockTridiagonal T = random_tridiag(2, 4, 3.0);
  for (int j = 0; j < 4; ++j) T.diag[j].col(1).setZero();
  for (int j = 0; j < 3; ++j) {
    T.lower[j].col(1).setZero();
    T.upper[j].col(1).setZero();
  }
  const BandedLU lu(T);
  CHECK(lu.singular());
  CHECK(std::isinf(lu.condition_estimate()));
  CHECK_THROWS_AS(lu.solve(Vector::Zero(8)), SolverError);
}

TEST_CASE("condition estimate tracks the true 1-norm condition") {
  for (int trial = 0; trial < 4; ++trial) {
    const BlockTridiagonal T = random_tridiag(2, 6, 4.0);
    const Matrix Dn = T.dense();
    const double true_cond =
        Dn.cwiseAbs().colwise().sum().maxCoeff() *
        Dn.inverse().cwiseAbs().colwise().sum().maxCoeff();
    const double est = BandedLU(T).condition_estimate();
    CHECK(est <= true_cond * (1.0 + 1e-10));
    CHECK(est >= true_cond / 10.0);
  }
}

TEST_CASE("power iteration reproduces the spectral norm") {
  const int m = 12;
  Matrix Ad(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) Ad(i, j) = rnd();
  const double truth =
      Eigen::JacobiSVD<Matrix>(Ad).singularValues()[0];
  const double est = estimate_norm2(
      m, [&](const Vector& v) { return Vector(Ad * v); },
      [&](const Vector& v) { return Vector(Ad.transpose() * v); });
  CHECK(est == doctest::Approx(truth).epsilon(1e-6));
  CHECK(est <= truth * (1.0 + 1e-12));

  // rank one converges in a single pass
  Vector a(m), bvec(m);
  for (int i = 0; i < m; ++i) {
    a[i] = rnd();
    bvec[i] = rnd();
  }
  const Matrix R1 = a * bvec.transpose();
  const double est1 = estimate_norm2(
      m, [&](const Vector& v) { return Vector(R1 * v); },
      [&](const Vector& v) { return Vector(R1.transpose() * v); });
  CHECK(est1 == doctest::Approx(a.norm() * bvec.norm()).epsilon(1e-12));
}
