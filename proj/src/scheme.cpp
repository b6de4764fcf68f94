#include "stdg/scheme.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <set>

namespace stdg {

std::string to_string(TimeMode m) { return m == TimeMode::CrankNicolson ? "cn" : "spacetime"; }

std::string to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::Periodic ? "periodic" : "free_surface";
}

TimeMode time_mode_from_string(const std::string& s) {
  if (s == "cn") return TimeMode::CrankNicolson;
  if (s == "spacetime") return TimeMode::SpaceTime;
  throw ConfigError("unknown time mode '" + s + "' (expected cn or spacetime)");
}

BoundaryCondition boundary_condition_from_string(const std::string& s) {
  if (s == "free_surface") return BoundaryCondition::FreeSurface;
  if (s == "periodic") return BoundaryCondition::Periodic;
  throw ConfigError("unsupported boundary condition '" + s + "' (expected free_surface or periodic)");
}

State zero_state(const Discretization& disc) {
  State s;
  s.velocity = Vector::Zero(disc.velocity_size());
  s.stress = Vector::Zero(disc.stress_size());
  return s;
}

void apply_bc(const Discretization& disc, Operators& ops, BoundaryCondition bc) {
  if (bc == BoundaryCondition::Periodic) {
    if (!disc.conn.boundary.empty())
      throw ConfigError("periodic boundary condition requested but " + std::to_string(disc.conn.boundary.size()) +
                        " boundary edges remain unpaired (edge " + std::to_string(disc.conn.boundary.front()) + ")");
    return;
  }
  if (ops.free_surface_applied) return;
  for (std::size_t s = 0; s < ops.D.size(); ++s) {
    if (ops.D_edge[s][0].size() == 0) continue;
    for (int l = 0; l < 2; ++l) {
      ops.D[s][l] -= ops.D_edge[s][l];
      ops.Q[s][l] -= ops.Q_edge[s][l];
    }
  }
  ops.free_surface_applied = true;
}

// ---------------------------------------------------------------------------

SpaceTimeKernels::SpaceTimeKernels(const Discretization& disc, const Operators& ops, const MaterialField& materials)
    : disc_(disc), ops_(ops), mat_(materials) {}

void SpaceTimeKernels::strain(const Vector& v, Vector& out) const {
  const int nphi = disc_.n_phi(), npsi = disc_.n_psi(), ng = disc_.n_gamma();
  const int nc = disc_.num_cells();
  out.resize(disc_.stress_size());
  const Vector w = ops_.dt * ops_.time.weights;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < nc; ++j) {
    Matrix g[3] = {Matrix::Zero(npsi, ng), Matrix::Zero(npsi, ng), Matrix::Zero(npsi, ng)};
    for (int s : disc_.dual.cells[j].subs) {
      const int i = disc_.dual.subs[s].triangle;
      const double* base = v.data() + Eigen::Index(i) * disc_.velocity_block();
      Eigen::Map<const Matrix> U(base, nphi, ng), V(base + nphi * ng, nphi, ng);
      const auto& Q = ops_.Q[s];
      g[0].noalias() += Q[0] * U;
      g[1].noalias() += Q[1] * V;
      g[2].noalias() += 0.5 * (Q[1] * U);
      g[2].noalias() += 0.5 * (Q[0] * V);
    }
    for (auto& m : g) m = m * w.asDiagonal();
    const Mat3& E = mat_.cell_stiffness[j].E;
    double* o = out.data() + Eigen::Index(j) * disc_.stress_block();
    for (int c = 0; c < 3; ++c) {
      Eigen::Map<Matrix> O(o + c * npsi * ng, npsi, ng);
      O = E(c, 0) * g[0] + E(c, 1) * g[1] + E(c, 2) * g[2];
    }
  }
}

void SpaceTimeKernels::divergence(const Vector& s, Vector& out) const {
  const int nphi = disc_.n_phi(), npsi = disc_.n_psi(), ng = disc_.n_gamma();
  const int ne = disc_.num_elements();
  out.resize(disc_.velocity_size());
  const Vector w = ops_.dt * ops_.time.weights;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < ne; ++i) {
    Matrix fu = Matrix::Zero(nphi, ng), fv = Matrix::Zero(nphi, ng);
    for (int k = 0; k < 3; ++k) {
      const int sub = disc_.dual.tri_subs[i][k];
      const int j = disc_.dual.subs[sub].cell;
      const double* base = s.data() + Eigen::Index(j) * disc_.stress_block();
      Eigen::Map<const Matrix> Sxx(base, npsi, ng), Syy(base + npsi * ng, npsi, ng),
          Sxy(base + 2 * npsi * ng, npsi, ng);
      const auto& D = ops_.D[sub];
      fu.noalias() += D[0] * Sxx;
      fu.noalias() += D[1] * Sxy;
      fv.noalias() += D[0] * Sxy;
      fv.noalias() += D[1] * Syy;
    }
    double* o = out.data() + Eigen::Index(i) * disc_.velocity_block();
    Eigen::Map<Matrix>(o, nphi, ng) = fu * w.asDiagonal();
    Eigen::Map<Matrix>(o + nphi * ng, nphi, ng) = fv * w.asDiagonal();
  }
}

void SpaceTimeKernels::dual_mass_inv(const Vector& s, Vector& out) const {
  const int npsi = disc_.n_psi(), ng = disc_.n_gamma();
  const int nc = disc_.num_cells();
  out.resize(disc_.stress_size());
  const Matrix Tt = ops_.time.T_inv.transpose();
#pragma omp parallel for schedule(static)
  for (int j = 0; j < nc; ++j)
    for (int c = 0; c < 3; ++c) {
      const Eigen::Index off = Eigen::Index(j) * disc_.stress_block() + c * npsi * ng;
      Eigen::Map<const Matrix> X(s.data() + off, npsi, ng);
      Eigen::Map<Matrix>(out.data() + off, npsi, ng) = ops_.mass_dual_inv[j] * X * Tt;
    }
}

void SpaceTimeKernels::dual_minus_propagate(const Vector& s, Vector& out) const {
  const int npsi = disc_.n_psi(), ng = disc_.n_gamma();
  const Eigen::Index blocks = Eigen::Index(disc_.num_cells()) * 3;
  out.resize(disc_.stress_size());
  const Matrix Tt = ops_.time.T_inv_minus.transpose();
  for (Eigen::Index b = 0; b < blocks; ++b) {
    Eigen::Map<const Matrix> X(s.data() + b * npsi * ng, npsi, ng);
    Eigen::Map<Matrix>(out.data() + b * npsi * ng, npsi, ng) = X * Tt;
  }
}

void SpaceTimeKernels::primal_mass(const Matrix& temporal, const Vector& v, Vector& out) const {
  const int nphi = disc_.n_phi(), ng = disc_.n_gamma();
  const int ne = disc_.num_elements();
  out.resize(disc_.velocity_size());
  const Matrix Tt = temporal.transpose();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < ne; ++i)
    for (int c = 0; c < 2; ++c) {
      const Eigen::Index off = Eigen::Index(i) * disc_.velocity_block() + c * nphi * ng;
      Eigen::Map<const Matrix> X(v.data() + off, nphi, ng);
      Eigen::Map<Matrix>(out.data() + off, nphi, ng) = mat_.element[i].rho * ops_.mass_primal[i] * X * Tt;
    }
}

Matrix SpaceTimeKernels::strain_block(int sub) const {
  const int nphi = disc_.n_phi(), npsi = disc_.n_psi(), ng = disc_.n_gamma();
  const int vs = nphi * ng, ss = npsi * ng;
  const Matrix Qx = ops_.spacetime_Q(sub, 0), Qy = ops_.spacetime_Q(sub, 1);
  Matrix g = Matrix::Zero(3 * ss, 2 * vs);
  g.block(0, 0, ss, vs) = Qx;
  g.block(ss, vs, ss, vs) = Qy;
  g.block(2 * ss, 0, ss, vs) = 0.5 * Qy;
  g.block(2 * ss, vs, ss, vs) = 0.5 * Qx;
  return g;
}

Matrix SpaceTimeKernels::divergence_block(int sub) const {
  const int nphi = disc_.n_phi(), npsi = disc_.n_psi(), ng = disc_.n_gamma();
  const int vs = nphi * ng, ss = npsi * ng;
  const Matrix Dx = ops_.spacetime_D(sub, 0), Dy = ops_.spacetime_D(sub, 1);
  Matrix d = Matrix::Zero(2 * vs, 3 * ss);
  d.block(0, 0, vs, ss) = Dx;
  d.block(0, 2 * ss, vs, ss) = Dy;
  d.block(vs, 2 * ss, vs, ss) = Dx;
  d.block(vs, ss, vs, ss) = Dy;
  return d;
}

Matrix SpaceTimeKernels::cell_block(int cell) const {
  const Matrix minv = Eigen::kroneckerProduct(ops_.time.T_inv, ops_.mass_dual_inv[cell]);
  return Eigen::kroneckerProduct(Matrix(mat_.cell_stiffness[cell].E), minv);
}

// ---------------------------------------------------------------------------

SchurOperator::SchurOperator(const SpaceTimeKernels& kernels, TimeMode mode) : k_(kernels), mode_(mode) {
  if (mode == TimeMode::CrankNicolson && kernels.disc().p_gamma != 0)
    throw ConfigError("Crank-Nicolson mode requires p_gamma = 0");
}

void SchurOperator::apply(const Vector& x, Vector& y) const {
  Vector e, s;
  k_.strain(x, e);
  k_.dual_mass_inv(e, s);
  k_.divergence(s, y);
  Vector m;
  k_.primal_mass(k_.ops().time.T, x, m);
  y = m - theta() * y;
}

std::vector<int> SchurOperator::block_neighbors(int i) const {
  const auto& dual = k_.disc().dual;
  std::set<int> out;
  for (int sub : dual.tri_subs[i])
    for (int s2 : dual.cells[dual.subs[sub].cell].subs)
      if (dual.subs[s2].triangle != i) out.insert(dual.subs[s2].triangle);
  return {out.begin(), out.end()};
}

Matrix SchurOperator::block(int i, int e) const {
  const auto& disc = k_.disc();
  const int bs = disc.velocity_block();
  Matrix a = Matrix::Zero(bs, bs);
  if (i == e) {
    const Matrix m = Eigen::kroneckerProduct(k_.ops().time.T, k_.ops().mass_primal[i]);
    const int vs = disc.n_phi() * disc.n_gamma();
    a.topLeftCorner(vs, vs) = k_.materials().element[i].rho * m;
    a.bottomRightCorner(vs, vs) = a.topLeftCorner(vs, vs);
  }
  for (int sub : disc.dual.tri_subs[i]) {
    const int j = disc.dual.subs[sub].cell;
    Matrix left;
    for (int s2 : disc.dual.cells[j].subs) {
      if (disc.dual.subs[s2].triangle != e) continue;
      if (left.size() == 0) left = k_.divergence_block(sub) * k_.cell_block(j);
      a.noalias() -= theta() * left * k_.strain_block(s2);
    }
  }
  return a;
}

// ---------------------------------------------------------------------------

Scheme::Scheme(const Discretization& disc, MaterialField materials, SchemeConfig cfg)
    : disc_(disc),
      mat_(std::move(materials)),
      cfg_(cfg),
      ops_(assemble_operators(disc, cfg.dt)),
      kernels_(disc_, ops_, mat_),
      schur_(kernels_, cfg.mode) {
  cfg_.krylov.validate();
  if (static_cast<int>(mat_.element.size()) != disc.num_elements() ||
      static_cast<int>(mat_.cell.size()) != disc.num_cells())
    throw ContractError("Scheme: material field does not match the mesh");
  apply_bc(disc_, ops_, cfg_.boundary);
  pre_ = build_preconditioner(cfg_.preconditioner, schur_);
}

void Scheme::set_preconditioner(PreconditionerKind kind) {
  cfg_.preconditioner = kind;
  pre_ = build_preconditioner(kind, schur_);
}

Vector Scheme::compute_rhs(const State& s, const SourceVectors* src) const {
  Vector b, tmp, tmp2;
  if (cfg_.mode == TimeMode::CrankNicolson) {
    // rho Mbar v + D sigma + 1/2 D M^{-1} S + 1/4 D M^{-1} E Q v + rho S
    kernels_.primal_mass(ops_.time.T, s.velocity, b);
    kernels_.strain(s.velocity, tmp);
    tmp *= 0.25;
    if (src) tmp += 0.5 * src->stress;
    kernels_.dual_mass_inv(tmp, tmp2);
    tmp2 += s.stress;
    kernels_.divergence(tmp2, tmp);
    b += tmp;
  } else {
    // rho Mbar^- v + D M^{-1} (M^- sigma + S) + rho S
    kernels_.primal_mass(ops_.time.minus, s.velocity, b);
    kernels_.dual_minus_propagate(s.stress, tmp2);
    if (src) {
      kernels_.dual_mass_inv(src->stress, tmp);
      tmp2 += tmp;
    }
    kernels_.divergence(tmp2, tmp);
    b += tmp;
  }
  if (src) b += src->momentum;
  return b;
}

Vector Scheme::update_stress(const State& old, const Vector& velocity, const SourceVectors* src) const {
  Vector e, out;
  if (cfg_.mode == TimeMode::CrankNicolson) {
    kernels_.strain(old.velocity + velocity, e);
    e *= 0.5;
    if (src) e += src->stress;
    kernels_.dual_mass_inv(e, out);
    return old.stress + out;
  }
  kernels_.strain(velocity, e);
  if (src) e += src->stress;
  kernels_.dual_mass_inv(e, out);
  Vector prop;
  kernels_.dual_minus_propagate(old.stress, prop);
  return prop + out;
}

StepStats Scheme::advance(State& s, const SourceVectors* src) const {
  const Vector b = compute_rhs(s, src);
  SolveResult res;
  try {
    res = krylov_solve(schur_, b, s.velocity, cfg_.krylov, pre_.get());
  } catch (const SolverError& err) {
    throw SolverError("slab " + std::to_string(s.step) + ": " + err.what(), err.history());
  }
  s.stress = update_stress(s, res.x, src);
  s.velocity = std::move(res.x);
  ++s.step;
  s.time += cfg_.dt;
  return {res.iterations, res.residual};
}

namespace {

/// Trace X gamma(tau) of every component block.
Vector traces(const Vector& coeffs, int n_space, int n_gamma, const Vector& g) {
  const Eigen::Index blocks = coeffs.size() / (Eigen::Index(n_space) * n_gamma);
  Vector out(blocks * n_space);
  for (Eigen::Index b = 0; b < blocks; ++b)
    out.segment(b * n_space, n_space) =
        Eigen::Map<const Matrix>(coeffs.data() + b * n_space * n_gamma, n_space, n_gamma) * g;
  return out;
}

Energy energy_of_traces(const Scheme& sc, const Vector& vt, const Vector& st) {
  const auto& disc = sc.disc();
  const auto& ops = sc.operators();
  const int nphi = disc.n_phi(), npsi = disc.n_psi();
  Energy e;
  for (int i = 0; i < disc.num_elements(); ++i)
    for (int c = 0; c < 2; ++c) {
      const auto x = vt.segment((Eigen::Index(i) * 2 + c) * nphi, nphi);
      e.kinetic += 0.5 * sc.materials().element[i].rho * x.dot(ops.mass_primal[i] * x);
    }
  for (int j = 0; j < disc.num_cells(); ++j) {
    const Mat3 K = voigt_weight() * sc.materials().cell_stiffness[j].E_inv;
    Matrix ms(npsi, 3);
    for (int c = 0; c < 3; ++c) ms.col(c) = ops.mass_dual[j] * st.segment((Eigen::Index(j) * 3 + c) * npsi, npsi);
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d)
        e.elastic += 0.5 * K(c, d) * st.segment((Eigen::Index(j) * 3 + c) * npsi, npsi).dot(ms.col(d));
  }
  return e;
}

}  // namespace

Energy Scheme::energy(const State& s) const {
  const Vector& g1 = disc_.gamma.at_end();
  return energy_of_traces(*this, traces(s.velocity, disc_.n_phi(), disc_.n_gamma(), g1),
                          traces(s.stress, disc_.n_psi(), disc_.n_gamma(), g1));
}

Energy Scheme::jump_energy(const State& prev, const State& next) const {
  const Vector& g0 = disc_.gamma.at_start();
  const Vector& g1 = disc_.gamma.at_end();
  const int nphi = disc_.n_phi(), npsi = disc_.n_psi(), ng = disc_.n_gamma();
  const Vector dv = traces(next.velocity, nphi, ng, g0) - traces(prev.velocity, nphi, ng, g1);
  const Vector ds = traces(next.stress, npsi, ng, g0) - traces(prev.stress, npsi, ng, g1);
  return energy_of_traces(*this, dv, ds);
}

Vec2 evaluate_velocity(const Discretization& disc, const Vector& velocity, int element, const Vec2& xi, double tau) {
  const int nphi = disc.n_phi(), ng = disc.n_gamma();
  const Vector phi = disc.phi.values(xi);
  const Vector g = disc.gamma.values(tau);
  const double* base = velocity.data() + Eigen::Index(element) * disc.velocity_block();
  Vec2 out;
  for (int c = 0; c < 2; ++c) out[c] = phi.dot(Eigen::Map<const Matrix>(base + c * nphi * ng, nphi, ng) * g);
  return out;
}

Vec3 evaluate_stress(const Discretization& disc, const Vector& stress, int cell, const Vec2& x, double tau) {
  const int npsi = disc.n_psi(), ng = disc.n_gamma();
  const Vector psi = disc.psi_at(cell, x);
  const Vector g = disc.gamma.values(tau);
  const double* base = stress.data() + Eigen::Index(cell) * disc.stress_block();
  Vec3 out;
  for (int c = 0; c < 3; ++c) out[c] = psi.dot(Eigen::Map<const Matrix>(base + c * npsi * ng, npsi, ng) * g);
  return out;
}

}  // namespace stdg
