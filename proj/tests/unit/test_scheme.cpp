#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace stdg;

namespace {

SchemeConfig scheme_config(TimeMode mode, double dt, BoundaryCondition bc = BoundaryCondition::Periodic) {
  SchemeConfig sc;
  sc.mode = mode;
  sc.dt = dt;
  sc.boundary = bc;
  sc.preconditioner = PreconditionerKind::Pre1;
  sc.krylov.tolerance = 1e-12;
  sc.krylov.absolute_tolerance = 1e-15;
  sc.krylov.method = mode == TimeMode::CrankNicolson ? KrylovMethod::CG : KrylovMethod::GMRES;
  return sc;
}

FieldFunction plane_wave(const IsotropicMaterial& m = {2.0, 1.0, 1.0}) {
  return plane_wave_field(scenario_modes(default_scenario(ScenarioKind::PsConvergence), m));
}

}  // namespace

class CnOperator : public ::testing::TestWithParam<int> {};

TEST_P(CnOperator, SymmetricPositiveDefinite) {
  const Discretization disc(test::periodic_box(4, 0.15), GetParam(), 0);
  const Scheme scheme(disc, test::uniform_material(disc), scheme_config(TimeMode::CrankNicolson, 0.1));
  const Matrix a = materialize(scheme.schur());
  const double scale = a.cwiseAbs().rowwise().sum().maxCoeff();
  EXPECT_LE((a - a.transpose()).cwiseAbs().rowwise().sum().maxCoeff(), 1e-12 * scale);
  EXPECT_EQ(Eigen::LLT<Matrix>(a).info(), Eigen::Success);
}

INSTANTIATE_TEST_SUITE_P(Degrees, CnOperator, ::testing::Values(1, 2));

TEST(SpaceTimeOperator, NonSymmetricForLinearTime) {
  const Discretization disc(test::periodic_box(2), 1, 1);
  const Scheme scheme(disc, test::uniform_material(disc), scheme_config(TimeMode::SpaceTime, 0.1));
  const Matrix a = materialize(scheme.schur());
  EXPECT_GT(test::max_abs(a - a.transpose()), 1e-8 * test::max_abs(a));
}

TEST(SpaceTimeOperator, StencilIsElementAndEdgeNeighbors) {
  const Discretization disc(test::periodic_box(3), 1, 1);
  const Scheme scheme(disc, test::uniform_material(disc), scheme_config(TimeMode::SpaceTime, 0.1));
  const Matrix a = materialize(scheme.schur());
  const int bs = disc.velocity_block();
  for (int i = 0; i < disc.num_elements(); ++i) {
    std::vector<int> allowed{i};
    for (int k = 0; k < 3; ++k) allowed.push_back(disc.conn.neighbor(i, disc.conn.tri_edges[i][k]));
    for (int e = 0; e < disc.num_elements(); ++e) {
      if (std::find(allowed.begin(), allowed.end(), e) != allowed.end()) continue;
      EXPECT_EQ(test::max_abs(a.block(i * bs, e * bs, bs, bs)), 0.0);
    }
    for (int e : allowed)
      EXPECT_LT(test::max_abs(a.block(i * bs, e * bs, bs, bs) - scheme.schur().block(i, e)), 1e-12);
  }
}

TEST(Scheme, CnModeRequiresConstantTime) {
  const Discretization disc(test::periodic_box(2), 1, 1);
  EXPECT_THROW(Scheme(disc, test::uniform_material(disc), scheme_config(TimeMode::CrankNicolson, 0.1)), Error);
}

TEST(Scheme, ZeroStateStaysZero) {
  const Discretization disc(test::periodic_box(2), 2, 1);
  const Scheme scheme(disc, test::uniform_material(disc), scheme_config(TimeMode::SpaceTime, 0.1));
  State s = zero_state(disc);
  EXPECT_EQ(scheme.compute_rhs(s, nullptr).norm(), 0.0);
  scheme.advance(s);
  EXPECT_EQ(s.velocity.norm(), 0.0);
  EXPECT_EQ(s.stress.norm(), 0.0);
  EXPECT_EQ(s.step, 1);
  const Energy e = scheme.energy(s);
  EXPECT_EQ(e.total(), 0.0);
}

TEST(Scheme, RigidMotionIsExact) {
  const Discretization disc(test::periodic_box(3, 0.2), 2, 2);
  const Scheme scheme(disc, test::uniform_material(disc), scheme_config(TimeMode::SpaceTime, 0.3));
  State s = zero_state(disc);
  const int block = disc.n_phi() * disc.n_gamma();
  for (int i = 0; i < disc.num_elements(); ++i) {
    s.velocity.segment(Eigen::Index(i) * 2 * block, block).setConstant(1.0);
    s.velocity.segment(Eigen::Index(i) * 2 * block + block, block).setConstant(-0.5);
  }
  const State s0 = s;
  for (int n = 0; n < 10; ++n) scheme.advance(s);
  EXPECT_LT((s.velocity - s0.velocity).lpNorm<Eigen::Infinity>(), 1e-10);
  EXPECT_LT(s.stress.lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(Scheme, UnitVelocityKineticEnergy) {
  const Discretization disc(structured_box_mesh(0, 1, 0, 1, 2, 2, 0.1, 4, true), 1, 0);
  const Scheme scheme(disc, test::uniform_material(disc), scheme_config(TimeMode::SpaceTime, 0.1));
  State s = zero_state(disc);
  for (int i = 0; i < disc.num_elements(); ++i) s.velocity.segment(Eigen::Index(i) * 2 * disc.n_phi(), disc.n_phi()).setOnes();
  const Energy e = scheme.energy(s);
  EXPECT_NEAR(e.kinetic, 0.5, 1e-14);
  EXPECT_EQ(e.elastic, 0.0);
}

TEST(Scheme, CnRhsAgreesWithGenericPathPlusAverage) {
  const Discretization disc(test::periodic_box(3), 2, 0);
  const auto mat = test::uniform_material(disc);
  const Scheme cn(disc, mat, scheme_config(TimeMode::CrankNicolson, 0.1));
  const Scheme st(disc, mat, scheme_config(TimeMode::SpaceTime, 0.1));
  State s = zero_state(disc);
  s.velocity = test::random_vector(disc.velocity_size(), 1);
  s.stress = test::random_vector(disc.stress_size(), 2);
  Vector e, m, avg;
  st.kernels().strain(s.velocity, e);
  st.kernels().dual_mass_inv(e, m);
  st.kernels().divergence(m, avg);
  const Vector generic = st.compute_rhs(s, nullptr) + 0.25 * avg;
  const Vector dedicated = cn.compute_rhs(s, nullptr);
  EXPECT_LT((generic - dedicated).norm() / dedicated.norm(), 1e-12);
}

TEST(Scheme, CnStepConservesEnergy) {
  const Discretization disc(test::periodic_box(4), 2, 0);
  const Scheme scheme(disc, test::uniform_material(disc), scheme_config(TimeMode::CrankNicolson, 0.1));
  State s = project_state(disc, scheme.operators(), plane_wave(), 0.0);
  const double e0 = scheme.energy(s).total();
  scheme.advance(s);
  EXPECT_LT(std::abs(scheme.energy(s).total() - e0) / e0, 1e-11);
  for (int n = 0; n < 49; ++n) scheme.advance(s);
  EXPECT_LT(std::abs(scheme.energy(s).total() - e0) / e0, 1e-9);
}

TEST(Scheme, SpaceTimeEnergyBalance) {
  const Discretization disc(test::periodic_box(3, 0.2), 2, 1);
  const Scheme scheme(disc, test::uniform_material(disc), scheme_config(TimeMode::SpaceTime, 0.2));
  State s = project_state(disc, scheme.operators(), plane_wave(), 0.0);
  for (int n = 0; n < 5; ++n) {
    const State prev = s;
    scheme.advance(s);
    const double before = scheme.energy(prev).total(), after = scheme.energy(s).total();
    const double jump = scheme.jump_energy(prev, s).total();
    EXPECT_LE(after, before * (1 + 1e-12));
    EXPECT_NEAR(before - after, jump, 1e-9 * before);
  }
}

TEST(BoundaryConditions, PeriodicIsNoOp) {
  const Discretization disc(test::periodic_box(2), 2, 1);
  Operators ops = assemble_operators(disc, 0.1);
  const Operators ref = ops;
  apply_bc(disc, ops, BoundaryCondition::Periodic);
  for (std::size_t s = 0; s < ops.D.size(); ++s)
    for (int l = 0; l < 2; ++l) EXPECT_EQ(test::max_abs(ops.D[s][l] - ref.D[s][l]), 0.0);
}

TEST(BoundaryConditions, FreeSurfaceExposesTraction) {
  // a uniform stress is divergence free; once the surface flux is dropped
  // its traction drives exactly the elements touching the boundary
  const Discretization disc(structured_box_mesh(0, 1, 0, 1, 3, 3, 0.1, 2, false), 2, 0);
  const auto mat = test::uniform_material(disc);
  State s = zero_state(disc);
  const int npsi = disc.n_psi();
  for (int j = 0; j < disc.num_cells(); ++j) {
    s.stress.segment(Eigen::Index(j) * 3 * npsi, npsi).setConstant(1.0);
    s.stress.segment(Eigen::Index(j) * 3 * npsi + npsi, npsi).setConstant(2.0);
  }

  Operators raw = assemble_operators(disc, 0.1);
  const SpaceTimeKernels plain(disc, raw, mat);
  Vector f;
  plain.divergence(s.stress, f);
  EXPECT_LT(f.lpNorm<Eigen::Infinity>(), 1e-13);

  const Scheme scheme(disc, mat, scheme_config(TimeMode::SpaceTime, 0.1, BoundaryCondition::FreeSurface));
  scheme.kernels().divergence(s.stress, f);
  const int bs = disc.velocity_block();
  for (int i = 0; i < disc.num_elements(); ++i) {
    bool touches = false;
    for (int k = 0; k < 3; ++k) touches = touches || disc.conn.is_boundary(disc.conn.tri_edges[i][k]);
    const double fi = f.segment(Eigen::Index(i) * bs, bs).lpNorm<Eigen::Infinity>();
    if (touches)
      EXPECT_GT(fi, 1e-3);
    else
      EXPECT_LT(fi, 1e-13);
  }
  for (std::size_t sub = 0; sub < raw.D.size(); ++sub) {
    if (raw.D_edge[sub][0].size() == 0) continue;
    for (int l = 0; l < 2; ++l)
      EXPECT_LT(test::max_abs(scheme.operators().D[sub][l] - (raw.D[sub][l] - raw.D_edge[sub][l])), 1e-14);
  }
}

TEST(BoundaryConditions, PeriodicRequiresClosedMesh) {
  const Discretization disc(structured_box_mesh(0, 1, 0, 1, 2, 2, 0.0, 1, false), 1, 0);
  EXPECT_THROW(Scheme(disc, test::uniform_material(disc), scheme_config(TimeMode::SpaceTime, 0.1)), Error);
}
