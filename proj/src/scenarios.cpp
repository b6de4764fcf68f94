#include "stdg/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <random>

namespace stdg {

namespace {

void add_quad(PrimalMesh& m, int a, int b, int c, int d, bool flip, int region) {
  // a, b, c, d counterclockwise
  if (!flip) {
    m.triangles.push_back({a, b, c});
    m.triangles.push_back({a, c, d});
  } else {
    m.triangles.push_back({a, b, d});
    m.triangles.push_back({b, c, d});
  }
  m.region.push_back(region);
  m.region.push_back(region);
}

double mesh_min_incircle(const PrimalMesh& m) {
  double r = std::numeric_limits<double>::infinity();
  for (int t = 0; t < m.num_triangles(); ++t) r = std::min(r, m.incircle_radius(t));
  return r;
}

bool all_positive(const PrimalMesh& m) {
  for (int t = 0; t < m.num_triangles(); ++t)
    if (m.signed_area(t) <= 0.0) return false;
  return true;
}

}  // namespace

PrimalMesh structured_box_mesh(double xmin, double xmax, double ymin, double ymax, int nx, int ny,
                               double perturbation, unsigned seed, bool periodic) {
  if (nx < 1 || ny < 1 || !(xmax > xmin) || !(ymax > ymin)) throw ConfigError("invalid box mesh parameters");
  if (perturbation < 0.0 || perturbation >= 0.5) throw ConfigError("box mesh perturbation must be in [0, 0.5)");
  PrimalMesh m;
  const double hx = (xmax - xmin) / nx, hy = (ymax - ymin) / ny;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-perturbation, perturbation);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      Vec2 x(xmin + i * hx, ymin + j * hy);
      if (i > 0 && i < nx && j > 0 && j < ny) {
        const double dx = u(rng), dy = u(rng);
        x += Vec2(dx * hx, dy * hy);
      }
      m.nodes.push_back(x);
    }
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      add_quad(m, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1), (i + j) % 2 == 1, 0);
  if (periodic) m.periodic = PeriodicBox{xmin, xmax, ymin, ymax};
  validate_and_orient(m);
  return m;
}

PrimalMesh mapped_mesh(int nx, int ny, const std::function<Vec2(double, double)>& map) {
  if (nx < 1 || ny < 1) throw ConfigError("invalid mapped mesh resolution");
  PrimalMesh m;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) m.nodes.push_back(map(double(i) / nx, double(j) / ny));
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      add_quad(m, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1), (i + j) % 2 == 1, 0);
  validate_and_orient(m);
  return m;
}

PrimalMesh cavity_mesh(double half_width, double radius, int n_side, int n_radial) {
  if (!(radius > 0.0) || !(half_width > radius * std::sqrt(2.0)) || n_side < 2 || n_side % 2 != 0 || n_radial < 1)
    throw ConfigError("invalid cavity mesh parameters");
  const int n = 4 * n_side;
  const double H = half_width;
  // Square perimeter point k, counterclockwise from (H, 0).
  auto square = [&](int k) -> Vec2 {
    const double s = 8.0 * H * double(k % n) / n;  // arc length from (H, 0)
    const double q = s + H;                        // from (H, -H)
    const int block = static_cast<int>(std::floor(q / (2.0 * H)));
    const int side = block % 4;
    const double f = q - block * 2.0 * H;
    switch (side) {
      case 0: return {H, -H + f};
      case 1: return {H - f, H};
      case 2: return {-H, H - f};
      default: return {-H + f, -H};
    }
  };
  // Geometric grading whose first ring is as thick as the circle's arc spacing.
  const double h0 = 2.0 * std::numbers::pi * radius / n;
  auto span = [&](double q) { return std::abs(q - 1.0) < 1e-12 ? h0 * n_radial : h0 * (std::pow(q, n_radial) - 1.0) / (q - 1.0); };
  double lo = 1.0, hi = 1.0;
  while (span(hi) < H - radius) hi *= 2.0;
  if (span(1.0) > H - radius) lo = 0.0;
  for (int it = 0; it < 200; ++it) (span(0.5 * (lo + hi)) < H - radius ? lo : hi) = 0.5 * (lo + hi);
  const double ratio = 0.5 * (lo + hi);
  auto radial = [&](int r) {
    if (std::abs(ratio - 1.0) < 1e-12) return double(r) / n_radial;
    return (std::pow(ratio, r) - 1.0) / (std::pow(ratio, n_radial) - 1.0);
  };
  PrimalMesh m;
  for (int r = 0; r <= n_radial; ++r)
    for (int k = 0; k < n; ++k) {
      const double a = 2.0 * std::numbers::pi * k / n;
      const Vec2 c(radius * std::cos(a), radius * std::sin(a));
      const Vec2 s = square(k);
      m.nodes.push_back(c + radial(r) * (s - c));
    }
  auto id = [&](int r, int k) { return r * n + (k % n); };
  for (int r = 0; r < n_radial; ++r)
    for (int k = 0; k < n; ++k) add_quad(m, id(r, k), id(r, k + 1), id(r + 1, k + 1), id(r + 1, k), (r + k) % 2 == 1, 0);
  m.periodic = PeriodicBox{-H, H, -H, H};
  m.circles.push_back(Circle{Vec2::Zero(), radius});
  validate_and_orient(m);
  return m;
}

SliverMeshes make_sliver_meshes(int n, double target_ratio, unsigned seed) {
  if (n < 4) throw ConfigError("sliver mesh needs n >= 4");
  SliverMeshes out;
  out.regular = structured_box_mesh(-1.5, 1.5, -1.5, 1.5, n, n, 0.1, seed, true);
  out.min_incircle_regular = mesh_min_incircle(out.regular);
  const double target = out.min_incircle_regular / target_ratio;
  PrimalMesh mesh = out.regular;
  const std::array<std::pair<int, int>, 2> picks{{{n / 4, n / 4}, {(3 * n) / 4, (3 * n) / 4 - 1}}};
  for (const auto& [pi, pj] : picks) {
    const int v = pj * (n + 1) + pi;
    int tri = kNone;
    for (int t = 0; t < mesh.num_triangles() && tri == kNone; ++t)
      for (int k = 0; k < 3; ++k)
        if (mesh.triangles[t][k] == v) tri = t;
    int k = 0;
    while (mesh.triangles[tri][k] != v) ++k;
    const Vec2 p0 = mesh.nodes[v];
    const Vec2 mid = 0.5 * (mesh.vertex(tri, (k + 1) % 3) + mesh.vertex(tri, (k + 2) % 3));
    std::vector<int> star;
    for (int t = 0; t < mesh.num_triangles(); ++t)
      for (int kk = 0; kk < 3; ++kk)
        if (mesh.triangles[t][kk] == v) star.push_back(t);
    auto star_min = [&] {
      double r = std::numeric_limits<double>::infinity();
      for (int t : star) r = std::min(r, mesh.incircle_radius(t));
      return r;
    };
    // the smallest incircle around v decreases monotonically along the path
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double t = 0.5 * (lo + hi);
      mesh.nodes[v] = p0 + t * (mid - p0);
      if (all_positive(mesh) && star_min() > target)
        lo = t;
      else
        hi = t;
    }
    mesh.nodes[v] = p0 + lo * (mid - p0);
    if (!all_positive(mesh)) throw MeshError("sliver construction produced a degenerate triangle");
  }
  out.sliver = std::move(mesh);
  out.min_incircle_sliver = mesh_min_incircle(out.sliver);
  return out;
}

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::PlaneWaveCavity: return "plane_wave_cavity";
    case ScenarioKind::PsConvergence: return "ps_convergence";
    case ScenarioKind::LambTilted: return "lamb_tilted";
    case ScenarioKind::LayeredComplex: return "layered_complex";
    case ScenarioKind::SliverStudy: return "sliver_study";
    case ScenarioKind::Custom: return "custom";
  }
  return "custom";
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
  for (auto k : {ScenarioKind::PlaneWaveCavity, ScenarioKind::PsConvergence, ScenarioKind::LambTilted,
                 ScenarioKind::LayeredComplex, ScenarioKind::SliverStudy, ScenarioKind::Custom})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown scenario kind '" + s + "'");
}

double RickerSource::operator()(double t) const {
  const double a2 = -std::pow(std::numbers::pi * fc, 2);
  const double s = (t - t_delay) * (t - t_delay);
  return a1 * (0.5 + a2 * s) * std::exp(a2 * s);
}

Vec2 RickerSource::direction() const {
  const double th = theta_deg * std::numbers::pi / 180.0;
  return {-std::sin(th), std::cos(th)};
}

Vec5 p_eigenvector_printed(const IsotropicMaterial& m, const Vec2& n) {
  const double cp = wave_speeds(m).cp;
  Vec5 r;
  r << m.lambda + 2 * m.mu * n.x() * n.x(), m.lambda + 2 * m.mu * n.y() * n.y(), 2 * m.mu * n.x() * n.y(),
      -n.x() * cp, -n.y() * cp;
  return r;
}

Vec5 s_eigenvector_printed(const IsotropicMaterial& m, const Vec2& n) {
  const double cs = wave_speeds(m).cs;
  Vec5 r;
  r << -2 * m.mu * n.x() * n.y(), 2 * m.mu * n.x() * n.y(), m.mu * (n.x() * n.x() - n.y() * n.y()), n.y() * cs,
      -n.x() * cs;
  return r;
}

Vec5 to_velocity_first(const Vec5& p) {
  Vec5 r;
  r << p[3], p[4], p[0], p[1], p[2];
  return r;
}

ScenarioSpec default_scenario(ScenarioKind kind) {
  ScenarioSpec s;
  s.kind = kind;
  switch (kind) {
    case ScenarioKind::PsConvergence:
      s.direction = Vec2(1.0, 1.0);
      break;
    case ScenarioKind::SliverStudy:
      s.direction = Vec2(1.0, 0.0);
      s.s_wave = false;
      break;
    case ScenarioKind::PlaneWaveCavity:
      s.direction = Vec2(1.0, 0.0);
      s.s_wave = false;
      break;
    case ScenarioKind::LambTilted: {
      RickerSource r;
      r.position = Vec2(1720.0, 2303.18);
      r.theta_deg = 10.0;
      s.sources.push_back(r);
      s.alpha = 0.0;
      break;
    }
    case ScenarioKind::LayeredComplex: {
      RickerSource r;
      r.position = Vec2(3000.0, 1500.18);
      r.theta_deg = 10.0;
      s.sources.push_back(r);
      s.alpha = 0.0;
      break;
    }
    case ScenarioKind::Custom: break;
  }
  return s;
}

std::vector<PlaneWaveMode> scenario_modes(const ScenarioSpec& spec, const IsotropicMaterial& m) {
  const auto c = wave_speeds(m);
  std::vector<PlaneWaveMode> modes;
  switch (spec.kind) {
    case ScenarioKind::PsConvergence:
    case ScenarioKind::SliverStudy: {
      if (spec.direction.norm() == 0.0) throw ConfigError("scenario direction must be nonzero");
      const Vec2 k = 2.0 * std::numbers::pi * spec.direction;
      const Vec2 nh = spec.direction.normalized();
      PlaneWaveMode p;
      p.amplitude = spec.alpha;
      p.wave_vector = k;
      p.vector = to_velocity_first(p_eigenvector_printed(m, nh));
      p.omega = k.norm() * c.cp;
      modes.push_back(p);
      if (spec.s_wave) {
        PlaneWaveMode s = p;
        s.vector = to_velocity_first(s_eigenvector_printed(m, nh));
        s.omega = k.norm() * c.cs;
        modes.push_back(s);
      }
      break;
    }
    case ScenarioKind::PlaneWaveCavity: {
      PlaneWaveMode p;
      p.amplitude = spec.alpha;
      p.wave_vector = Vec2(2.0 * std::numbers::pi, 0.0);
      p.vector << -2.0, 0.0, 4.0, 2.0, 0.0;
      p.omega = p.wave_vector.norm() * c.cp;
      modes.push_back(p);
      break;
    }
    case ScenarioKind::LambTilted:
    case ScenarioKind::LayeredComplex: break;
    case ScenarioKind::Custom: modes = spec.modes; break;
  }
  return modes;
}

FieldFunction plane_wave_field(std::vector<PlaneWaveMode> modes) {
  return [modes = std::move(modes)](const Vec2& x, double t) {
    Vec5 u = Vec5::Zero();
    for (const auto& m : modes) u += m.amplitude * m.vector * std::sin(m.wave_vector.dot(x) - m.omega * t + m.phase);
    return u;
  };
}

FieldFunction exact_solution(const ScenarioSpec& spec, const IsotropicMaterial& m) {
  if (spec.kind != ScenarioKind::PsConvergence && spec.kind != ScenarioKind::SliverStudy &&
      spec.kind != ScenarioKind::Custom)
    throw ContractError("no analytic solution for scenario '" + to_string(spec.kind) + "'");
  return plane_wave_field(scenario_modes(spec, m));
}

State project_state(const Discretization& disc, const Operators& ops, const FieldFunction& field, double t) {
  State s = zero_state(disc);
  s.time = t;
  const int nphi = disc.n_phi(), npsi = disc.n_psi(), ng = disc.n_gamma();
  std::vector<Matrix> vrhs(disc.num_elements(), Matrix::Zero(nphi, 2));
  std::vector<Matrix> srhs(disc.num_cells(), Matrix::Zero(npsi, 3));
  for (std::size_t sub = 0; sub < disc.dual.subs.size(); ++sub) {
    const auto& se = disc.dual.subs[sub];
    const SubPoints q = sub_volume_points(disc, static_cast<int>(sub));
    for (std::size_t k = 0; k < q.x.size(); ++k) {
      const Vec5 f = field(q.x[k], t);
      for (int c = 0; c < 2; ++c) vrhs[se.triangle].col(c) += q.weight[k] * f[c] * q.phi[k];
      for (int c = 0; c < 3; ++c) srhs[se.cell].col(c) += q.weight[k] * f[2 + c] * q.psi[k];
    }
  }
  for (int i = 0; i < disc.num_elements(); ++i) {
    const Matrix x = ops.mass_primal_inv[i] * vrhs[i];
    for (int c = 0; c < 2; ++c)
      for (int a = 0; a < ng; ++a)
        s.velocity.segment(Eigen::Index(i) * disc.velocity_block() + (c * ng + a) * nphi, nphi) = x.col(c);
  }
  for (int j = 0; j < disc.num_cells(); ++j) {
    const Matrix x = ops.mass_dual_inv[j] * srhs[j];
    for (int c = 0; c < 3; ++c)
      for (int a = 0; a < ng; ++a)
        s.stress.segment(Eigen::Index(j) * disc.stress_block() + (c * ng + a) * npsi, npsi) = x.col(c);
  }
  return s;
}

namespace {

/// Calls f(x, weight, u, v, sxx, syy, sxy) at every volume quadrature point
/// with the end-of-slab traces of `s`.
template <class F>
void for_each_point(const Discretization& disc, const State& s, F&& f) {
  const int nphi = disc.n_phi(), npsi = disc.n_psi(), ng = disc.n_gamma();
  const Vector& g1 = disc.gamma.at_end();
  for (std::size_t sub = 0; sub < disc.dual.subs.size(); ++sub) {
    const auto& se = disc.dual.subs[sub];
    const SubPoints q = sub_volume_points(disc, static_cast<int>(sub));
    Matrix vt(nphi, 2), st(npsi, 3);
    for (int c = 0; c < 2; ++c)
      vt.col(c) = Eigen::Map<const Matrix>(
                      s.velocity.data() + Eigen::Index(se.triangle) * disc.velocity_block() + c * nphi * ng, nphi, ng) *
                  g1;
    for (int c = 0; c < 3; ++c)
      st.col(c) = Eigen::Map<const Matrix>(
                      s.stress.data() + Eigen::Index(se.cell) * disc.stress_block() + c * npsi * ng, npsi, ng) *
                  g1;
    for (std::size_t k = 0; k < q.x.size(); ++k) {
      Vec5 u;
      u.head<2>() = vt.transpose() * q.phi[k];
      u.tail<3>() = st.transpose() * q.psi[k];
      f(q.x[k], q.weight[k], u, se);
    }
  }
}

}  // namespace

Vec5 compute_l2_error(const Discretization& disc, const State& s, const FieldFunction& exact, double t) {
  Vec5 sq = Vec5::Zero();
  for_each_point(disc, s, [&](const Vec2& x, double w, const Vec5& u, const SubElement&) {
    sq += w * (u - exact(x, t)).cwiseAbs2();
  });
  return sq.cwiseSqrt();
}

double field_energy(const Discretization& disc, const MaterialField& mat, const FieldFunction& field, double t) {
  double e = 0.0;
  for (std::size_t sub = 0; sub < disc.dual.subs.size(); ++sub) {
    const auto& se = disc.dual.subs[sub];
    const SubPoints q = sub_volume_points(disc, static_cast<int>(sub));
    const double rho = mat.element[se.triangle].rho;
    for (std::size_t k = 0; k < q.x.size(); ++k) {
      const Vec5 f = field(q.x[k], t);
      const Vec3 sig = f.tail<3>();
      e += 0.5 * q.weight[k] *
           (rho * f.head<2>().squaredNorm() + strain_energy_density(sig, mat.cell_stiffness[se.cell]));
    }
  }
  return e;
}

std::vector<PointSource> scenario_point_sources(const ScenarioSpec& spec) {
  std::vector<PointSource> out;
  for (const auto& r : spec.sources) {
    PointSource p;
    p.position = r.position;
    p.direction = r.direction();
    p.time_function = [r](double t) { return r(t); };
    out.push_back(p);
  }
  return out;
}

}  // namespace stdg
