#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace stdg;

namespace {

KrylovConfig config(KrylovMethod m, double tol = 1e-12) {
  KrylovConfig c;
  c.method = m;
  c.tolerance = tol;
  c.absolute_tolerance = 0.0;
  return c;
}

Matrix random_spd(int n, unsigned seed) {
  const Vector r = test::random_vector(Eigen::Index(n) * n, seed);
  const Matrix a = Eigen::Map<const Matrix>(r.data(), n, n);
  return a * a.transpose() + n * Matrix::Identity(n, n);
}

}  // namespace

TEST(Krylov, IdentityInOneIteration) {
  const DenseOperator id(Matrix::Identity(5, 5));
  const Vector b = test::random_vector(5, 1);
  for (auto m : {KrylovMethod::CG, KrylovMethod::GMRES}) {
    const SolveResult r = krylov_solve(id, b, Vector::Zero(5), config(m));
    EXPECT_EQ(r.iterations, 1);
    EXPECT_LT((r.x - b).norm(), 1e-14);
  }
}

TEST(Krylov, CgDiagonalTwoByTwo) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1;
  a(1, 1) = 2;
  const SolveResult r = cg_solve(DenseOperator(a), Eigen::Vector2d(1, 2), Vector::Zero(2), config(KrylovMethod::CG));
  EXPECT_LE(r.iterations, 2);
  EXPECT_LT((r.x - Eigen::Vector2d(1, 1)).norm(), 1e-12);
}

TEST(Krylov, GmresNonsymmetricTwoByTwo) {
  Matrix a(2, 2);
  a << 1, 1, 0, 1;
  const SolveResult r =
      gmres_solve(DenseOperator(a), Eigen::Vector2d(2, 1), Vector::Zero(2), config(KrylovMethod::GMRES));
  EXPECT_LT((r.x - Eigen::Vector2d(1, 1)).norm(), 1e-12);
}

TEST(Krylov, GmresMatchesCgOnSpd) {
  const Matrix a = random_spd(40, 7);
  const Vector b = test::random_vector(40, 8);
  const SolveResult c = cg_solve(DenseOperator(a), b, Vector::Zero(40), config(KrylovMethod::CG));
  const SolveResult g = gmres_solve(DenseOperator(a), b, Vector::Zero(40), config(KrylovMethod::GMRES));
  EXPECT_LT((c.x - g.x).norm() / g.x.norm(), 1e-9);
}

TEST(Krylov, GmresHistoryMonotone) {
  Matrix a = random_spd(30, 2);
  a(0, 5) += 3.0;
  const SolveResult r =
      gmres_solve(DenseOperator(a), test::random_vector(30, 3), Vector::Zero(30), config(KrylovMethod::GMRES));
  for (std::size_t k = 1; k < r.history.size(); ++k) EXPECT_LE(r.history[k], r.history[k - 1] * (1 + 1e-12));
}

TEST(Krylov, RestartedGmresConverges) {
  KrylovConfig c = config(KrylovMethod::GMRES, 1e-10);
  c.restart = 5;
  const Matrix a = random_spd(30, 4);
  const Vector b = test::random_vector(30, 5);
  const SolveResult r = gmres_solve(DenseOperator(a), b, Vector::Zero(30), c);
  EXPECT_LT((a * r.x - b).norm() / b.norm(), 1e-10);
}

TEST(Krylov, NonConvergenceThrowsWithHistory) {
  KrylovConfig c = config(KrylovMethod::GMRES, 1e-14);
  c.max_iterations = 2;
  const Matrix a = random_spd(30, 6);
  try {
    gmres_solve(DenseOperator(a), test::random_vector(30, 1), Vector::Zero(30), c);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_FALSE(e.history().empty());
  }
}

TEST(Krylov, ConfigValidation) {
  KrylovConfig c;
  c.tolerance = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.tolerance = 1e-8;
  c.max_iterations = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Preconditioners, Pre1ExactOnBlockDiagonal) {
  const int bs = 4, nb = 5;
  Matrix a = Matrix::Zero(bs * nb, bs * nb);
  for (int i = 0; i < nb; ++i) a.block(i * bs, i * bs, bs, bs) = random_spd(bs, 10 + i);
  a(0, 1) += 0.5;
  const DenseBlockOperator op(a, bs);
  const auto pre = build_preconditioner(PreconditionerKind::Pre1, op);
  const SolveResult r =
      gmres_solve(op, test::random_vector(bs * nb, 2), Vector::Zero(bs * nb), config(KrylovMethod::GMRES), pre.get());
  EXPECT_EQ(r.iterations, 1);

  const Matrix full = random_spd(bs * nb, 20);
  const DenseBlockOperator coupled(full, bs);
  const auto pre1 = build_preconditioner(PreconditionerKind::Pre1, coupled);
  for (int i = 0; i < nb; ++i) {
    Vector e = Vector::Zero(bs * nb);
    e[i * bs + 1] = 1.0;
    Vector b = Vector::Zero(bs * nb);
    b.segment(i * bs, bs) = full.block(i * bs, i * bs, bs, bs) * e.segment(i * bs, bs);
    Vector z;
    pre1->apply(b, z);
    EXPECT_LT((z - e).norm(), 1e-12);
  }
}

TEST(Preconditioners, Pre2ExactWhenStencilCoversOperator) {
  const int bs = 3, nb = 4;
  const Matrix a = random_spd(bs * nb, 31);
  const DenseBlockOperator op(a, bs);
  const auto pre = build_preconditioner(PreconditionerKind::Pre2, op);
  Vector z;
  const Vector r = test::random_vector(bs * nb, 4);
  pre->apply(r, z);
  EXPECT_LT((a * z - r).norm() / r.norm(), 1e-12);
  const SolveResult s = gmres_solve(op, r, Vector::Zero(bs * nb), config(KrylovMethod::GMRES), pre.get());
  EXPECT_EQ(s.iterations, 1);
}

TEST(Preconditioners, Pre2IsLinear) {
  const Discretization disc(test::periodic_box(3), 2, 1);
  SchemeConfig sc;
  sc.dt = 0.1;
  sc.boundary = BoundaryCondition::Periodic;
  sc.preconditioner = PreconditionerKind::Pre2;
  const Scheme scheme(disc, test::uniform_material(disc), sc);
  const auto n = disc.velocity_size();
  const Vector x = test::random_vector(n, 1), y = test::random_vector(n, 2);
  Vector px, py, pxy;
  scheme.preconditioner().apply(x, px);
  scheme.preconditioner().apply(y, py);
  scheme.preconditioner().apply(2.0 * x - 3.0 * y, pxy);
  EXPECT_LT((pxy - (2.0 * px - 3.0 * py)).norm() / pxy.norm(), 1e-12);
}

TEST(Preconditioners, ReduceIterationsOnSliverMesh) {
  const SliverMeshes meshes = make_sliver_meshes(6, 70.53, 7);
  const Discretization disc(meshes.sliver, 2, 1);
  SchemeConfig sc;
  sc.dt = 0.014;
  sc.boundary = BoundaryCondition::Periodic;
  sc.krylov.tolerance = 1e-8;
  Scheme scheme(disc, test::uniform_material(disc), sc);
  const State s0 = project_state(disc, scheme.operators(),
                                 plane_wave_field(scenario_modes(default_scenario(ScenarioKind::SliverStudy),
                                                                 {2.0, 1.0, 1.0})),
                                 0.0);
  int its[3];
  int k = 0;
  for (auto kind : {PreconditionerKind::None, PreconditionerKind::Pre1, PreconditionerKind::Pre2}) {
    scheme.set_preconditioner(kind);
    State s = s0;
    its[k++] = scheme.advance(s).iterations;
  }
  EXPECT_LT(its[1], its[0]);
  EXPECT_LT(its[2], its[1]);
}
