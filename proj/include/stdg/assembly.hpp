#pragma once

#include "stdg/basis.hpp"
#include "stdg/geometry.hpp"
#include "stdg/mesh.hpp"
#include "stdg/quadrature.hpp"

#include <array>
#include <functional>
#include <optional>
#include <vector>

namespace stdg {

/// Mesh, dual mesh, element maps, bases and quadrature for one (p, p_gamma).
///
/// Unknown layout. Velocity: element i, component c in {u, v}, time mode a,
/// spatial mode k at i * 2 Nphi Ngamma + c * Nphi Ngamma + a * Nphi + k.
/// Stress: dual cell j, component c in {sxx, syy, sxy}, likewise with Npsi.
/// The (k, a) coefficients of one component form a column-major
/// Nphi x Ngamma (Npsi x Ngamma) matrix X, so kron(T, S) vec(X) = vec(S X T^T).
struct Discretization {
  Discretization(PrimalMesh mesh, int p, int p_gamma);

  PrimalMesh mesh;
  EdgeConnectivity conn;
  DualMesh dual;
  std::vector<ElementMap> maps;
  int p;
  int p_gamma;
  TriangleBasis phi;
  SquareBasis psi;
  TimeBasis gamma;
  QuadratureRule triangle_rule;
  QuadratureRule edge_rule;

  int num_elements() const { return mesh.num_triangles(); }
  int num_cells() const { return dual.num_cells(); }
  int n_phi() const { return phi.size(); }
  int n_psi() const { return psi.size(); }
  int n_gamma() const { return gamma.size(); }
  int velocity_block() const { return 2 * n_phi() * n_gamma(); }
  int stress_block() const { return 3 * n_psi() * n_gamma(); }
  Eigen::Index velocity_size() const { return Eigen::Index(num_elements()) * velocity_block(); }
  Eigen::Index stress_size() const { return Eigen::Index(num_cells()) * stress_block(); }

  /// Dual basis of cell j at a point given in the cell frame.
  Vector psi_at(int cell, const Vec2& x) const;
};

/// Quadrature data on one sub-element T_{i,j} (volume) or on its primal edge.
struct SubPoints {
  std::vector<Vec2> x;  // physical, triangle frame
  std::vector<double> weight;
  std::vector<Vector> phi;
  std::vector<GradientMatrix> grad_phi;  // physical gradients (volume only)
  std::vector<Vector> psi;
  std::vector<Vec2> normal;  // outward unit normal of the triangle (edge only)
};
SubPoints sub_volume_points(const Discretization& disc, int sub);
SubPoints sub_edge_points(const Discretization& disc, int sub);

/// Purely temporal factors on the reference slab [0, 1].
struct TimeMatrices {
  Matrix P;      // gamma(1) gamma(1)^T
  Matrix minus;  // gamma(0) gamma(1)^T: couples to the previous slab's trace
  Matrix C;      // C[a, b] = int gamma_a' gamma_b
  Matrix T;      // P - C
  Matrix T_inv;
  Matrix T_inv_minus;
  Vector weights;  // int gamma_a gamma_b = diag(weights)
};
TimeMatrices build_time_matrices(const TimeBasis& gamma);

/// Space-time mass blocks kron(temporal, spatial).
struct SpaceTimeMass {
  Matrix plus, minus, circ, full, inv;
};
SpaceTimeMass spacetime_mass(const Matrix& spatial, const TimeMatrices& time);

/// Spatial operator blocks; the space-time operators are
/// D_st = dt kron(diag(w), D) and likewise for Q.
struct Operators {
  double dt = 0.0;
  TimeMatrices time;
  std::vector<Matrix> mass_primal, mass_primal_inv;  // per element
  std::vector<Matrix> mass_dual, mass_dual_inv;      // per dual cell
  std::vector<std::array<Matrix, 2>> D;  // per sub-element, Nphi x Npsi
  std::vector<std::array<Matrix, 2>> Q;  // per sub-element, Npsi x Nphi (assembled independently)
  /// Primal-edge parts of D and Q on boundary sub-elements (empty elsewhere).
  std::vector<std::array<Matrix, 2>> D_edge, Q_edge;
  bool free_surface_applied = false;

  Matrix spacetime_D(int sub, int l) const;
  Matrix spacetime_Q(int sub, int l) const;
};

void assemble_mass(const Discretization& disc, Operators& ops);
void assemble_flux(const Discretization& disc, Operators& ops);
Operators assemble_operators(const Discretization& disc, double dt);

/// Element containing x with its reference coordinates.
struct PointLocation {
  int element = kNone;
  Vec2 xi = Vec2::Zero();
  bool on_boundary = false;  // x lies on an element edge (within tolerance)
};
std::optional<PointLocation> locate_point(const Discretization& disc, const Vec2& x);

/// Directional point force f = direction * S(t) * delta(x - position).
struct PointSource {
  Vec2 position = Vec2::Zero();
  Vec2 direction = Vec2::Zero();
  std::function<double(double)> time_function;
};

/// Distributed source rates, ordered (u, v, sxx, syy, sxy).
using SourceField = std::function<Eigen::Matrix<double, 5, 1>(const Vec2&, double)>;

struct SourceVectors {
  Vector momentum;  // (rho S)_i, velocity layout
  Vector stress;    // S_j, stress layout
};

/// Source moments over the slab [t0, t0 + dt]. Point sources must lie
/// strictly inside an element. The velocity part of a volume source is
/// multiplied by the element density `rho`.
SourceVectors assemble_sources(const Discretization& disc, const std::vector<PointSource>& points,
                               const std::vector<SourceField>& volume, const std::vector<double>& rho, double t0,
                               double dt);

}  // namespace stdg
