#pragma once

#include "stdg/assembly.hpp"
#include "stdg/material.hpp"
#include "stdg/mesh.hpp"
#include "stdg/scheme.hpp"

#include <functional>
#include <string>
#include <vector>

namespace stdg {

/// Field values ordered (u, v, sxx, syy, sxy).
using Vec5 = Eigen::Matrix<double, 5, 1>;
using FieldFunction = std::function<Vec5(const Vec2&, double)>;

// --- mesh generators -------------------------------------------------------

/// nx x ny cells of the box, each split into two triangles with alternating
/// diagonals. Interior nodes are moved by a uniform random offset of at most
/// `perturbation` times the cell size (deterministic in `seed`). With
/// `periodic` the box is attached as a periodicity spec.
PrimalMesh structured_box_mesh(double xmin, double xmax, double ymin, double ymax, int nx, int ny,
                               double perturbation, unsigned seed, bool periodic);

/// Structured mesh of the image of the unit square under `map`.
PrimalMesh mapped_mesh(int nx, int ny, const std::function<Vec2(double, double)>& map);

/// Square [-half_width, half_width]^2 minus a centered disc, meshed by four
/// graded blocks; outer sides are periodic and the disc is a curved boundary.
PrimalMesh cavity_mesh(double half_width, double radius, int n_side, int n_radial);

struct SliverMeshes {
  PrimalMesh regular;
  PrimalMesh sliver;
  double min_incircle_regular = 0.0;
  double min_incircle_sliver = 0.0;
  double ratio() const { return min_incircle_regular / min_incircle_sliver; }
};

/// A near-uniform periodic triangulation of [-1.5, 1.5]^2 and a copy in
/// which two interior vertices are pushed towards an opposite edge until
/// the smallest incircle radius shrinks by `target_ratio`.
SliverMeshes make_sliver_meshes(int n = 10, double target_ratio = 70.53, unsigned seed = 7);

// --- scenarios -------------------------------------------------------------

enum class ScenarioKind { PlaneWaveCavity, PsConvergence, LambTilted, LayeredComplex, SliverStudy, Custom };
std::string to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(const std::string& s);

/// U(x, t) = amplitude * vector * sin(k . x - omega t + phase).
struct PlaneWaveMode {
  double amplitude = 1.0;
  Vec2 wave_vector = Vec2::Zero();
  Vec5 vector = Vec5::Zero();
  double omega = 0.0;
  double phase = 0.0;
  bool operator==(const PlaneWaveMode&) const = default;
};

/// a1 (0.5 + a2 (t - t_D)^2) exp(a2 (t - t_D)^2) with a2 = -(pi f_c)^2.
struct RickerSource {
  Vec2 position = Vec2::Zero();
  double theta_deg = 0.0;  // direction (-sin theta, cos theta)
  double a1 = -2000.0;
  double fc = 14.5;
  double t_delay = 0.08;
  double operator()(double t) const;
  Vec2 direction() const;
  bool operator==(const RickerSource&) const = default;
};

struct Receiver {
  std::string id;
  Vec2 position = Vec2::Zero();
  bool operator==(const Receiver&) const = default;
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Custom;
  double alpha = 0.1;
  Vec2 direction = Vec2(1.0, 1.0);  // n for ps_convergence and sliver_study
  bool s_wave = true;                // ps_convergence includes the s-mode
  std::vector<PlaneWaveMode> modes;  // custom initial data
  std::vector<RickerSource> sources;
  bool operator==(const ScenarioSpec&) const = default;
};

/// Eigenvectors for a plane wave along n, ordered (sxx, syy, sxy, u, v) as
/// printed; n is used as given (not normalized).
Vec5 p_eigenvector_printed(const IsotropicMaterial& m, const Vec2& n);
Vec5 s_eigenvector_printed(const IsotropicMaterial& m, const Vec2& n);
/// Reorders (sxx, syy, sxy, u, v) into (u, v, sxx, syy, sxy).
Vec5 to_velocity_first(const Vec5& printed);

/// Plane-wave modes of the scenario's initial data in a homogeneous medium.
std::vector<PlaneWaveMode> scenario_modes(const ScenarioSpec& spec, const IsotropicMaterial& m);

/// Built-in scenario defaults (material, period, time step hints) for `kind`.
ScenarioSpec default_scenario(ScenarioKind kind);

FieldFunction plane_wave_field(std::vector<PlaneWaveMode> modes);

/// U(x, t) for scenarios with an analytic solution on a periodic
/// homogeneous domain. Throws ContractError otherwise.
FieldFunction exact_solution(const ScenarioSpec& spec, const IsotropicMaterial& m);

/// L2 projection of field(., t) onto the primal (velocity) and dual
/// (stress) bases, constant in time over the slab.
State project_state(const Discretization& disc, const Operators& ops, const FieldFunction& field, double t);

/// Per-component L2 norms of (numerical - exact) of the end-of-slab trace,
/// ordered (u, v, sxx, syy, sxy).
Vec5 compute_l2_error(const Discretization& disc, const State& s, const FieldFunction& exact, double t);

/// 1/2 int (rho |v|^2 + sigma : E^{-1} sigma) of a field, by quadrature.
double field_energy(const Discretization& disc, const MaterialField& mat, const FieldFunction& field, double t);

/// Point sources of the scenario.
std::vector<PointSource> scenario_point_sources(const ScenarioSpec& spec);

}  // namespace stdg
