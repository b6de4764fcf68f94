#include "stdg/assembly.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>

namespace stdg {

Discretization::Discretization(PrimalMesh mesh_in, int p_in, int p_gamma_in)
    : mesh(std::move(mesh_in)),
      conn(build_connectivity(mesh)),
      dual(build_dual(mesh, conn)),
      maps(build_element_maps(mesh, conn, p_in)),
      p(p_in),
      p_gamma(p_gamma_in),
      phi(p_in),
      psi(p_in),
      gamma(p_gamma_in),
      triangle_rule(make_quadrature(QuadratureKind::Triangle, 2 * p_in + 2)),
      edge_rule(make_quadrature(QuadratureKind::Interval, 2 * p_in + 2)) {}

Vector Discretization::psi_at(int cell, const Vec2& x) const {
  return psi.values(dual.cells[cell].quad.inverse(x));
}

namespace {

const Vec2 kCentroid(1.0 / 3.0, 1.0 / 3.0);

}  // namespace

SubPoints sub_volume_points(const Discretization& disc, int sub) {
  const SubElement& s = disc.dual.subs[sub];
  const auto& ref = TriangleBasis::vertices();
  const Vec2 e1 = ref[s.local_edge] - kCentroid;
  const Vec2 e2 = ref[(s.local_edge + 1) % 3] - kCentroid;
  const double sub_det = std::abs(cross2(e1, e2));
  const ElementMap& map = disc.maps[s.triangle];
  const auto& rule = disc.triangle_rule;
  SubPoints out;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec2 xi = kCentroid + e1 * rule.points[q].x() + e2 * rule.points[q].y();
    const MapPoint m = map(xi);
    out.x.push_back(m.x);
    out.weight.push_back(rule.weights[q] * sub_det * std::abs(m.det));
    out.phi.push_back(disc.phi.values(xi));
    out.grad_phi.push_back(disc.phi.gradients(xi) * m.jacobian.inverse());
    out.psi.push_back(disc.psi_at(s.cell, m.x + s.shift));
  }
  return out;
}

SubPoints sub_edge_points(const Discretization& disc, int sub) {
  const SubElement& s = disc.dual.subs[sub];
  const auto& ref = TriangleBasis::vertices();
  const Vec2 a = ref[s.local_edge];
  const Vec2 t_ref = ref[(s.local_edge + 1) % 3] - a;
  const ElementMap& map = disc.maps[s.triangle];
  const auto& rule = disc.edge_rule;
  SubPoints out;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec2 xi = a + rule.points[q].x() * t_ref;
    const MapPoint m = map(xi);
    const Vec2 tangent = m.jacobian * t_ref;
    const double len = tangent.norm();
    out.x.push_back(m.x);
    out.weight.push_back(rule.weights[q] * len);
    out.phi.push_back(disc.phi.values(xi));
    out.psi.push_back(disc.psi_at(s.cell, m.x + s.shift));
    out.normal.emplace_back(tangent.y() / len, -tangent.x() / len);
  }
  return out;
}

TimeMatrices build_time_matrices(const TimeBasis& gamma) {
  const int n = gamma.size();
  TimeMatrices t;
  t.weights = Eigen::Map<const Vector>(gamma.weights().data(), n);
  t.P = gamma.at_end() * gamma.at_end().transpose();
  t.minus = gamma.at_start() * gamma.at_end().transpose();
  t.C = Matrix::Zero(n, n);
  // Gauss-Legendre with n points integrates gamma_a' gamma_b exactly
  for (int b = 0; b < n; ++b) {
    const Vector d = gamma.derivatives(gamma.nodes()[b]);
    for (int a = 0; a < n; ++a) t.C(a, b) = t.weights[b] * d[a];
  }
  t.T = t.P - t.C;
  t.T_inv = t.T.inverse();
  t.T_inv_minus = t.T_inv * t.minus;
  return t;
}

SpaceTimeMass spacetime_mass(const Matrix& spatial, const TimeMatrices& time) {
  SpaceTimeMass m;
  m.plus = Eigen::kroneckerProduct(time.P, spatial);
  m.minus = Eigen::kroneckerProduct(time.minus, spatial);
  m.circ = Eigen::kroneckerProduct(time.C, spatial);
  m.full = Eigen::kroneckerProduct(time.T, spatial);
  m.inv = Eigen::kroneckerProduct(time.T_inv, Matrix(spatial.inverse()));
  return m;
}

Matrix Operators::spacetime_D(int sub, int l) const {
  return dt * Matrix(Eigen::kroneckerProduct(Matrix(time.weights.asDiagonal()), D[sub][l]));
}

Matrix Operators::spacetime_Q(int sub, int l) const {
  return dt * Matrix(Eigen::kroneckerProduct(Matrix(time.weights.asDiagonal()), Q[sub][l]));
}

void assemble_mass(const Discretization& disc, Operators& ops) {
  const int ne = disc.num_elements();
  const int nc = disc.num_cells();
  ops.mass_primal.assign(ne, Matrix());
  ops.mass_primal_inv.assign(ne, Matrix());
  ops.mass_dual.assign(nc, Matrix());
  ops.mass_dual_inv.assign(nc, Matrix());
  const auto& rule = disc.triangle_rule;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < ne; ++i) {
    Matrix m = Matrix::Zero(disc.n_phi(), disc.n_phi());
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vector v = disc.phi.values(rule.points[q]);
      m.noalias() += rule.weights[q] * std::abs(disc.maps[i](rule.points[q]).det) * v * v.transpose();
    }
    ops.mass_primal_inv[i] = m.llt().solve(Matrix::Identity(m.rows(), m.cols()));
    ops.mass_primal[i] = std::move(m);
  }
#pragma omp parallel for schedule(static)
  for (int j = 0; j < nc; ++j) {
    Matrix m = Matrix::Zero(disc.n_psi(), disc.n_psi());
    for (int s : disc.dual.cells[j].subs) {
      const SubPoints pts = sub_volume_points(disc, s);
      for (std::size_t q = 0; q < pts.x.size(); ++q) m.noalias() += pts.weight[q] * pts.psi[q] * pts.psi[q].transpose();
    }
    ops.mass_dual_inv[j] = m.llt().solve(Matrix::Identity(m.rows(), m.cols()));
    ops.mass_dual[j] = std::move(m);
  }
}

void assemble_flux(const Discretization& disc, Operators& ops) {
  const int ns = static_cast<int>(disc.dual.subs.size());
  const int nphi = disc.n_phi(), npsi = disc.n_psi();
  ops.D.assign(ns, {});
  ops.Q.assign(ns, {});
  ops.D_edge.assign(ns, {});
  ops.Q_edge.assign(ns, {});
  ops.free_surface_applied = false;
#pragma omp parallel for schedule(static)
  for (int s = 0; s < ns; ++s) {
    const bool boundary = disc.dual.cells[disc.dual.subs[s].cell].boundary;
    const SubPoints vol = sub_volume_points(disc, s);
    const SubPoints edge = sub_edge_points(disc, s);
    for (int l = 0; l < 2; ++l) {
      // D[k, m] = int_edge phi_k psi_m n_l - int_sub d_l phi_k psi_m
      Matrix d_edge = Matrix::Zero(nphi, npsi);
      for (std::size_t q = 0; q < edge.x.size(); ++q)
        d_edge.noalias() += edge.weight[q] * edge.normal[q][l] * edge.phi[q] * edge.psi[q].transpose();
      Matrix d = d_edge;
      for (std::size_t q = 0; q < vol.x.size(); ++q)
        d.noalias() -= vol.weight[q] * vol.grad_phi[q].col(l) * vol.psi[q].transpose();

      // Q[m, k] = int_sub psi_m d_l phi_k - int_edge psi_m phi_k n_l
      Matrix q_edge = Matrix::Zero(npsi, nphi);
      for (std::size_t q = 0; q < edge.x.size(); ++q)
        q_edge.noalias() -= edge.weight[q] * edge.normal[q][l] * edge.psi[q] * edge.phi[q].transpose();
      Matrix qm = q_edge;
      for (std::size_t q = 0; q < vol.x.size(); ++q)
        qm.noalias() += vol.weight[q] * vol.psi[q] * vol.grad_phi[q].col(l).transpose();

      ops.D[s][l] = std::move(d);
      ops.Q[s][l] = std::move(qm);
      if (boundary) {
        ops.D_edge[s][l] = std::move(d_edge);
        ops.Q_edge[s][l] = std::move(q_edge);
      }
    }
  }
}

Operators assemble_operators(const Discretization& disc, double dt) {
  if (!(dt > 0.0)) throw ContractError("assemble_operators: time step must be positive");
  Operators ops;
  ops.dt = dt;
  ops.time = build_time_matrices(disc.gamma);
  assemble_mass(disc, ops);
  assemble_flux(disc, ops);
  return ops;
}

std::optional<PointLocation> locate_point(const Discretization& disc, const Vec2& x) {
  constexpr double tol = 1e-10;
  for (int i = 0; i < disc.num_elements(); ++i) {
    Vec2 xi;
    if (!disc.maps[i].inverse(x, xi)) continue;
    const double b0 = 1.0 - xi.x() - xi.y();
    if (xi.x() < -tol || xi.y() < -tol || b0 < -tol) continue;
    PointLocation loc;
    loc.element = i;
    loc.xi = xi;
    loc.on_boundary = std::min({xi.x(), xi.y(), b0}) <= tol;
    return loc;
  }
  return std::nullopt;
}

SourceVectors assemble_sources(const Discretization& disc, const std::vector<PointSource>& points,
                               const std::vector<SourceField>& volume, const std::vector<double>& rho, double t0,
                               double dt) {
  const int nphi = disc.n_phi(), npsi = disc.n_psi(), ng = disc.n_gamma();
  SourceVectors out;
  out.momentum = Vector::Zero(disc.velocity_size());
  out.stress = Vector::Zero(disc.stress_size());
  if (points.empty() && volume.empty()) return out;

  const auto gl = gauss_legendre(ng + 8);
  std::vector<Vector> gamma_q;
  for (double tau : gl.nodes) gamma_q.push_back(disc.gamma.values(tau));

  for (const auto& src : points) {
    const auto loc = locate_point(disc, src.position);
    if (!loc)
      throw ContractError("point source at (" + std::to_string(src.position.x()) + ", " +
                          std::to_string(src.position.y()) + ") lies outside the mesh");
    if (loc->on_boundary)
      throw ContractError("point source lies on the boundary of element " + std::to_string(loc->element) +
                          "; move it strictly inside an element");
    Vector moment = Vector::Zero(ng);
    for (std::size_t q = 0; q < gl.nodes.size(); ++q)
      moment += gl.weights[q] * src.time_function(t0 + gl.nodes[q] * dt) * gamma_q[q];
    moment *= dt;
    const Vector phi = disc.phi.values(loc->xi);
    for (int c = 0; c < 2; ++c) {
      Eigen::Map<Matrix> X(out.momentum.data() + Eigen::Index(loc->element) * disc.velocity_block() + c * nphi * ng,
                           nphi, ng);
      X += src.direction[c] * phi * moment.transpose();
    }
  }

  if (volume.empty()) return out;
  const auto& rule = disc.triangle_rule;
  for (int i = 0; i < disc.num_elements(); ++i) {
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const MapPoint m = disc.maps[i](rule.points[q]);
      const Vector phi = disc.phi.values(rule.points[q]);
      const double w = rule.weights[q] * std::abs(m.det) * rho[i] * dt;
      for (std::size_t r = 0; r < gl.nodes.size(); ++r) {
        Eigen::Matrix<double, 5, 1> f = Eigen::Matrix<double, 5, 1>::Zero();
        for (const auto& field : volume) f += field(m.x, t0 + gl.nodes[r] * dt);
        for (int c = 0; c < 2; ++c) {
          Eigen::Map<Matrix> X(out.momentum.data() + Eigen::Index(i) * disc.velocity_block() + c * nphi * ng, nphi,
                               ng);
          X += (w * gl.weights[r] * f[c]) * phi * gamma_q[r].transpose();
        }
      }
    }
  }
  for (int s = 0; s < static_cast<int>(disc.dual.subs.size()); ++s) {
    const int j = disc.dual.subs[s].cell;
    const SubPoints pts = sub_volume_points(disc, s);
    for (std::size_t q = 0; q < pts.x.size(); ++q)
      for (std::size_t r = 0; r < gl.nodes.size(); ++r) {
        Eigen::Matrix<double, 5, 1> f = Eigen::Matrix<double, 5, 1>::Zero();
        for (const auto& field : volume) f += field(pts.x[q], t0 + gl.nodes[r] * dt);
        for (int c = 0; c < 3; ++c) {
          Eigen::Map<Matrix> X(out.stress.data() + Eigen::Index(j) * disc.stress_block() + c * npsi * ng, npsi, ng);
          X += (pts.weight[q] * dt * gl.weights[r] * f[2 + c]) * pts.psi[q] * gamma_q[r].transpose();
        }
      }
  }
  return out;
}

}  // namespace stdg
