#include "helpers.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace stdg;

TEST(Scenarios, PrintedPEigenvector) {
  const Vec5 r = p_eigenvector_printed({2.0, 1.0, 1.0}, Vec2(1.0, 1.0));
  Vec5 expect;
  expect << 4, 4, 2, -2, -2;
  EXPECT_LT((r - expect).norm(), 1e-15);
  const Vec5 v = to_velocity_first(r);
  EXPECT_EQ(v[0], -2.0);
  EXPECT_EQ(v[2], 4.0);
}

TEST(Scenarios, PlaneWaveSolvesTheSystem) {
  // rho v_t = div sigma and sigma_t = E eps(v), checked by finite differences
  const IsotropicMaterial m{2.0, 1.0, 1.0};
  const FieldFunction u = exact_solution(default_scenario(ScenarioKind::PsConvergence), m);
  const Stiffness2D s = stiffness_from_lame(m);
  const Vec2 x(0.23, -0.41);
  const double t = 0.37, h = 1e-5;
  const Vec5 dt = (u(x, t + h) - u(x, t - h)) / (2 * h);
  const Vec5 dx = (u(x + Vec2(h, 0), t) - u(x - Vec2(h, 0), t)) / (2 * h);
  const Vec5 dy = (u(x + Vec2(0, h), t) - u(x - Vec2(0, h), t)) / (2 * h);
  EXPECT_NEAR(m.rho * dt[0], dx[2] + dy[4], 1e-6);
  EXPECT_NEAR(m.rho * dt[1], dx[4] + dy[3], 1e-6);
  const Vec3 strain(dx[0], dy[1], 0.5 * (dy[0] + dx[1]));
  const Vec3 rate = s.E * strain;
  EXPECT_NEAR(dt[2], rate[0], 1e-6);
  EXPECT_NEAR(dt[3], rate[1], 1e-6);
  EXPECT_NEAR(dt[4], rate[2], 1e-6);
}

TEST(Scenarios, ExactSolutionPeriodicAtEnd) {
  const FieldFunction u = exact_solution(default_scenario(ScenarioKind::PsConvergence), {2.0, 1.0, 1.0});
  const double t_end = 3.0 * std::sqrt(2.0);
  for (const Vec2& x : {Vec2(0.1, 0.2), Vec2(-1.3, 0.7), Vec2(1.4, -1.1)})
    EXPECT_LT((u(x, t_end) - u(x, 0.0)).norm(), 1e-12);
}

TEST(Scenarios, HalfPeriodFlipsSign) {
  ScenarioSpec spec = default_scenario(ScenarioKind::PsConvergence);
  spec.s_wave = false;
  const IsotropicMaterial m{2.0, 1.0, 1.0};
  const auto modes = scenario_modes(spec, m);
  ASSERT_EQ(modes.size(), 1u);
  const FieldFunction u = exact_solution(spec, m);
  const double half = std::numbers::pi / modes[0].omega;
  const Vec2 x(0.3, 0.1);
  EXPECT_LT((u(x, half) + u(x, 0.0)).norm(), 1e-12);
}

TEST(Scenarios, ZeroAmplitudeGivesZeroState) {
  ScenarioSpec spec = default_scenario(ScenarioKind::PsConvergence);
  spec.alpha = 0.0;
  const Discretization disc(test::periodic_box(2), 1, 0);
  const Operators ops = assemble_operators(disc, 0.1);
  const State s = project_state(disc, ops, plane_wave_field(scenario_modes(spec, {2, 1, 1})), 0.0);
  EXPECT_EQ(s.velocity.norm(), 0.0);
  EXPECT_EQ(s.stress.norm(), 0.0);
}

TEST(Scenarios, ProjectionIsIdempotentOnPolynomials) {
  const Discretization disc(structured_box_mesh(-1, 1, -1, 1, 3, 3, 0.2, 5, false), 2, 1);
  const Operators ops = assemble_operators(disc, 0.1);
  const FieldFunction poly = [](const Vec2& x, double) {
    Vec5 v;
    v << 1 + x.x() * x.y(), x.x() - 2 * x.y() * x.y(), 3.0, x.y(), x.x() * x.x();
    return v;
  };
  const State s = project_state(disc, ops, poly, 0.0);
  EXPECT_LT(compute_l2_error(disc, s, poly, 0.0).norm(), 1e-12);
}

TEST(Scenarios, L2ErrorOfConstantOffset) {
  const Discretization disc(structured_box_mesh(0, 1, 0, 1, 2, 2, 0.0, 1, true), 1, 0);
  const State s = zero_state(disc);
  const double eps = 0.125;
  const Vec5 err = compute_l2_error(disc, s, [&](const Vec2&, double) { return Vec5(eps, 0, 0, 0, 0); }, 0.0);
  EXPECT_NEAR(err[0], eps, 1e-14);
  EXPECT_EQ(err.tail<4>().norm(), 0.0);
}

TEST(Scenarios, InitialEnergyMatchesAnalyticQuadrature) {
  const Discretization disc(test::periodic_box(12), 6, 0);
  const MaterialField mat = test::uniform_material(disc);
  const FieldFunction u = exact_solution(default_scenario(ScenarioKind::PsConvergence), {2.0, 1.0, 1.0});
  const double e = field_energy(disc, mat, u, 0.0);
  EXPECT_GT(e, 0.0);
  // per unit area each mode carries rho alpha^2 c^2 / 2 on average, over the area 9
  const double alpha = 0.1;
  EXPECT_NEAR(e, 9.0 * alpha * alpha * (4.0 + 1.0) / 2.0, 1e-10);
}

TEST(Scenarios, SliverMeshes) {
  const SliverMeshes m = make_sliver_meshes();
  EXPECT_GE(m.ratio(), 50.0);
  EXPECT_LE(m.ratio(), 90.0);
  EXPECT_EQ(m.regular.triangles, m.sliver.triangles);
  for (int i = 0; i < m.sliver.num_triangles(); ++i) EXPECT_GT(m.sliver.signed_area(i), 0.0);
}

TEST(Scenarios, SliverSolutionQuality) {
  RunConfig cfg = default_config(ScenarioKind::SliverStudy);
  cfg.p = 2;
  cfg.p_gamma = 1;
  cfg.preconditioner = PreconditionerKind::Pre2;
  const SliverMeshes meshes = make_sliver_meshes(10, 70.53, 7);
  Vec5 err[2];
  int k = 0;
  for (const PrimalMesh* m : {&meshes.regular, &meshes.sliver}) {
    Simulation sim(cfg, *m);
    for (int n = 0; n < 10; ++n) sim.step();
    const auto exact = exact_solution(cfg.scenario, {2.0, 1.0, 1.0});
    err[k++] = compute_l2_error(sim.disc(), sim.state(), exact, sim.state().time);
  }
  EXPECT_LE(err[1].norm(), 5.0 * err[0].norm());
}

TEST(Scenarios, KindNamesRoundTrip) {
  for (auto k : {ScenarioKind::PlaneWaveCavity, ScenarioKind::PsConvergence, ScenarioKind::LambTilted,
                 ScenarioKind::LayeredComplex, ScenarioKind::SliverStudy, ScenarioKind::Custom})
    EXPECT_EQ(scenario_kind_from_string(to_string(k)), k);
  EXPECT_THROW(scenario_kind_from_string("nope"), ConfigError);
}

TEST(Scenarios, NoAnalyticSolutionForSourceScenarios) {
  EXPECT_THROW(exact_solution(default_scenario(ScenarioKind::LambTilted), {2, 1, 1}), ContractError);
}

TEST(Scenarios, RickerDirection) {
  RickerSource r;
  r.theta_deg = 90.0;
  EXPECT_NEAR((r.direction() - Vec2(-1.0, 0.0)).norm(), 0.0, 1e-15);
}
