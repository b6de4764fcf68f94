// Acceptance suite: one PASS/FAIL line per criterion.

#include "stdg/basis.hpp"
#include "stdg/io.hpp"
#include "stdg/quadrature.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace stdg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

RunConfig ps_config() {
  RunConfig cfg = default_config(ScenarioKind::PsConvergence);
  cfg.solver.tolerance = 1e-12;
  cfg.solver.absolute_tolerance = 1e-15;
  return cfg;
}

double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

double state_sup(const State& s) {
  return std::max(s.velocity.lpNorm<Eigen::Infinity>(), s.stress.lpNorm<Eigen::Infinity>());
}

Outcome convergence_check() {
  const double lo_off = 0.7, hi_off = 1.5;
  std::ostringstream msg;
  bool pass = true;
  for (int p : {1, 2}) {
    RunConfig cfg = ps_config();
    cfg.p = cfg.p_gamma = p;
    cfg.mode = TimeMode::SpaceTime;
    cfg.solver.tolerance = 1e-10;
    std::vector<MeshSpec> meshes{parse_mesh_token("box:14", cfg.mesh), parse_mesh_token("box:28", cfg.mesh)};
    const auto rows = convergence(cfg, meshes);
    const Vec5 ord = rows.back().order;
    msg << "p=" << p << " N=" << rows.front().n_elements << "/" << rows.back().n_elements << " orders";
    for (int c = 0; c < 5; ++c) {
      msg << ' ' << fmt("%.2f", ord[c]);
      if (!(ord[c] >= p + lo_off && ord[c] <= p + hi_off)) pass = false;
    }
    msg << " (bounds [" << fmt("%.1f", p + lo_off) << ", " << fmt("%.1f", p + hi_off) << "]); ";
  }
  return {pass, msg.str()};
}

Outcome cn_energy_check() {
  RunConfig cfg = ps_config();
  cfg.mode = TimeMode::CrankNicolson;
  cfg.p_gamma = 0;
  cfg.dt = 0.1;
  cfg.dt_over_h = 0.0;
  cfg.solver.method = KrylovMethod::CG;
  Simulation sim(cfg, build_mesh(cfg.mesh));
  const double e0 = sim.scheme().energy(sim.state()).total();
  double drift = 0.0;
  for (int n = 0; n < 100; ++n) {
    sim.step();
    drift = std::max(drift, std::abs(sim.scheme().energy(sim.state()).total() - e0) / e0);
  }
  return {drift <= 1e-8, "max relative drift " + fmt("%.3e", drift) + " (limit 1e-8)"};
}

/// Sum of random Fourier modes that are periodic on the box.
FieldFunction random_smooth_field(const MeshSpec& box, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  const double lx = box.xmax - box.xmin, ly = box.ymax - box.ymin;
  std::vector<PlaneWaveMode> modes;
  for (int kx = -2; kx <= 2; ++kx)
    for (int ky = 0; ky <= 2; ++ky) {
      if (kx == 0 && ky == 0) continue;
      PlaneWaveMode m;
      m.wave_vector = Vec2(two_pi * kx / lx, two_pi * ky / ly);
      for (int c = 0; c < 5; ++c) m.vector[c] = u(gen);
      m.amplitude = 1.0 / (kx * kx + ky * ky);
      m.phase = std::numbers::pi * u(gen);
      modes.push_back(m);
    }
  return plane_wave_field(modes);
}

Outcome energy_jump_check() {
  RunConfig cfg = ps_config();
  cfg.mesh.nx = cfg.mesh.ny = 8;
  cfg.p = 2;
  cfg.p_gamma = 1;
  cfg.dt = 0.1;
  cfg.dt_over_h = 0.0;
  const double tol = cfg.solver.tolerance;
  Simulation sim(cfg, build_mesh(cfg.mesh));
  const Scheme& scheme = sim.scheme();
  sim.state() = project_state(sim.disc(), scheme.operators(), random_smooth_field(cfg.mesh, 11), 0.0);
  double worst_rise = 0.0, worst_jump = 0.0;
  for (int n = 0; n < 100; ++n) {
    const State prev = sim.state();
    sim.step();
    const double before = scheme.energy(prev).total(), after = scheme.energy(sim.state()).total();
    const double jump = scheme.jump_energy(prev, sim.state()).total();
    worst_rise = std::max(worst_rise, (after - before) / before);
    worst_jump = std::max(worst_jump, std::abs(before - after - jump) / before);
  }
  const bool pass = worst_rise <= 10 * tol && worst_jump <= 1e-9;
  return {pass, "max relative rise " + fmt("%.3e", worst_rise) + " (limit " + fmt("%.0e", 10 * tol) +
                    "), max jump-identity defect " + fmt("%.3e", worst_jump) + " (limit 1e-9)"};
}

Outcome symmetry_check() {
  std::ostringstream msg;
  bool pass = true;
  for (int p : {1, 2}) {
    const Discretization disc(structured_box_mesh(-1.5, 1.5, -1.5, 1.5, 4, 4, 0.15, 3, true), p, 0);
    MaterialField mat = build_material_field(disc, {{0, IsotropicMaterial{2.0, 1.0, 1.0}}});
    SchemeConfig sc;
    sc.mode = TimeMode::CrankNicolson;
    sc.dt = 0.1;
    sc.boundary = BoundaryCondition::Periodic;
    const Scheme scheme(disc, mat, sc);
    const Matrix a = materialize(scheme.schur());
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    const double asym = (a - a.transpose()).cwiseAbs().rowwise().sum().maxCoeff() / norm;
    const bool chol = Eigen::LLT<Matrix>(a).info() == Eigen::Success;
    pass = pass && asym <= 1e-12 && chol;
    msg << "p=" << p << " N=" << disc.num_elements() << " asym " << fmt("%.2e", asym) << " cholesky "
        << (chol ? "ok" : "failed") << "; ";
  }
  return {pass, msg.str()};
}

Outcome adjointness_check() {
  double worst = 0.0;
  int n_elements = 0;
  for (int p = 1; p <= 3; ++p)
    for (int pg = 0; pg <= 2; ++pg) {
      const Discretization disc(structured_box_mesh(-1.5, 1.5, -1.5, 1.5, 8, 4, 0.15, 5, true), p, pg);
      n_elements = disc.num_elements();
      const Operators ops = assemble_operators(disc, 0.05);
      for (std::size_t s = 0; s < ops.D.size(); ++s)
        for (int l = 0; l < 2; ++l) {
          worst = std::max(worst, max_abs(ops.Q[s][l] + ops.D[s][l].transpose()) / max_abs(ops.D[s][l]));
          worst = std::max(worst, max_abs(ops.spacetime_Q(s, l) + ops.spacetime_D(s, l).transpose()) /
                                      max_abs(ops.spacetime_D(s, l)));
        }
    }
  return {worst <= 1e-12,
          "N=" + std::to_string(n_elements) + ", p<=3, pg<=2: max relative defect " + fmt("%.2e", worst)};
}

Outcome sliver_check() {
  const RunConfig cfg = default_config(ScenarioKind::SliverStudy);
  const SliverReport rep = sliver_study(cfg);
  const double none = rep.ratio(PreconditionerKind::None), pre1 = rep.ratio(PreconditionerKind::Pre1),
               pre2 = rep.ratio(PreconditionerKind::Pre2);
  std::ostringstream msg;
  msg << "incircle ratio " << fmt("%.2f", rep.incircle_ratio) << "; mean iterations mesh1/mesh2:";
  for (PreconditionerKind k : {PreconditionerKind::None, PreconditionerKind::Pre1, PreconditionerKind::Pre2})
    msg << ' ' << to_string(k) << ' ' << fmt("%.2f", rep.mean("mesh1", k)) << '/'
        << fmt("%.2f", rep.mean("mesh2", k));
  msg << "; ratios None " << fmt("%.2f", none) << " (>=3) Pre1 " << fmt("%.2f", pre1) << " (<=2) Pre2 "
      << fmt("%.2f", pre2) << " (<=1.2)";
  if (std::abs(pre2 - 1.0) <= 0.01) msg << "; Pre2 within 1%";
  return {none >= 3.0 && pre1 <= 2.0 && pre2 <= 1.2, msg.str()};
}

Outcome stability_check() {
  RunConfig cfg = ps_config();
  cfg.solver.tolerance = 1e-10;
  const PrimalMesh mesh = build_mesh(cfg.mesh);
  const IsotropicMaterial& m = cfg.materials.at(0);
  const double cp = std::sqrt((m.lambda + 2 * m.mu) / m.rho);
  cfg.dt_over_h = 0.0;
  cfg.dt = 50.0 * mesh.characteristic_size() / (cp * (2 * cfg.p + 1));
  Simulation sim(cfg, mesh);
  const double e0 = sim.scheme().energy(sim.state()).total();
  const double sup0 = state_sup(sim.state());
  double sup = sup0, e = e0;
  for (int n = 0; n < 20; ++n) {
    sim.step();
    sup = std::max(sup, state_sup(sim.state()));
    e = std::max(e, sim.scheme().energy(sim.state()).total());
  }
  const bool pass = sup <= 10 * sup0 && e <= e0 * (1 + 1e-6);
  return {pass, "dt " + fmt("%.4f", cfg.dt) + ", sup/sup0 " + fmt("%.3f", sup / sup0) + " (<=10), max E/E0 " +
                    fmt("%.9f", e / e0) + " (<=1+1e-6)"};
}

Outcome rigid_motion_check() {
  RunConfig cfg = ps_config();
  cfg.mesh.nx = cfg.mesh.ny = 6;
  cfg.dt = 0.3;
  cfg.dt_over_h = 0.0;
  Simulation sim(cfg, build_mesh(cfg.mesh));
  const Vec2 w(0.7, -0.4);
  sim.state() = project_state(sim.disc(), sim.scheme().operators(),
                              [&](const Vec2&, double) { return Vec5(w.x(), w.y(), 0, 0, 0); }, 0.0);
  const State s0 = sim.state();
  for (int n = 0; n < 10; ++n) sim.step();
  const double dv = (sim.state().velocity - s0.velocity).lpNorm<Eigen::Infinity>();
  const double ds = sim.state().stress.lpNorm<Eigen::Infinity>();
  const double limit = 100 * cfg.solver.tolerance;
  return {dv <= limit && ds <= limit,
          "velocity change " + fmt("%.2e", dv) + ", stress " + fmt("%.2e", ds) + " (limit " + fmt("%.0e", limit) + ")"};
}

Outcome basis_check() {
  double nodal = 0.0, unity = 0.0, grad = 0.0, ortho = 0.0;
  const double h = 1e-6;
  const std::vector<Vec2> probes{Vec2(0.1, 0.7), Vec2(0.33, 0.33), Vec2(0.9, 0.05), Vec2(0.21, 0.37)};
  for (int p = kMinSpatialDegree; p <= kMaxSpatialDegree; ++p) {
    const TriangleBasis b(p);
    for (int m = 0; m < b.size(); ++m) {
      Vector v = b.values(b.nodes()[m]);
      v[m] -= 1.0;
      nodal = std::max(nodal, v.lpNorm<Eigen::Infinity>());
    }
    for (const Vec2& xi : probes) {
      unity = std::max(unity, std::abs(b.values(xi).sum() - 1.0));
      unity = std::max(unity, b.gradients(xi).colwise().sum().cwiseAbs().maxCoeff());
      const GradientMatrix g = b.gradients(xi);
      const Vector dx = (b.values(xi + Vec2(h, 0)) - b.values(xi - Vec2(h, 0))) / (2 * h);
      const Vector dy = (b.values(xi + Vec2(0, h)) - b.values(xi - Vec2(0, h))) / (2 * h);
      const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
      grad = std::max(grad, std::max((g.col(0) - dx).lpNorm<Eigen::Infinity>(),
                                     (g.col(1) - dy).lpNorm<Eigen::Infinity>()) / scale);
    }
  }
  for (int pg = 0; pg <= kMaxTimeDegree; ++pg) {
    const TimeBasis g(pg);
    const auto r = make_quadrature(QuadratureKind::Interval, 2 * pg + 2);
    Matrix gram = Matrix::Zero(g.size(), g.size());
    for (std::size_t q = 0; q < r.size(); ++q) {
      const Vector v = g.values(r.points[q].x());
      gram += r.weights[q] * v * v.transpose();
    }
    for (int k = 0; k < g.size(); ++k) gram(k, k) -= g.weights()[k];
    ortho = std::max(ortho, max_abs(gram));
  }
  const bool pass = nodal <= 1e-11 && unity <= 1e-10 && grad <= 1e-6 && ortho <= 1e-14;
  return {pass, "nodal " + fmt("%.1e", nodal) + " (1e-11), unity " + fmt("%.1e", unity) + " (1e-10), gradient-FD " +
                    fmt("%.1e", grad) + " (1e-6), time orthogonality " + fmt("%.1e", ortho) + " (1e-14)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria of the solver"};
  std::vector<std::string> only;
  bool strict = false;
  app.add_option("--only", only, "run only the named criteria");
  app.add_flag("--strict", strict, "exit with status 1 if any criterion fails");
  CLI11_PARSE(app, argc, argv);
  set_reproducible(true);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"basis", basis_check},
      {"adjointness", adjointness_check},
      {"symmetry", symmetry_check},
      {"rigid_motion", rigid_motion_check},
      {"cn_energy", cn_energy_check},
      {"energy_jump", energy_jump_check},
      {"stability", stability_check},
      {"convergence", convergence_check},
      {"slivers", sliver_check},
  };
  const std::set<std::string> selected(only.begin(), only.end());
  int failed = 0;
  for (const auto& [name, fn] : checks) {
    if (!selected.empty() && !selected.count(name)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %-13s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return strict && failed > 0 ? 1 : 0;
}
