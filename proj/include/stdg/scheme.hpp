#pragma once

#include "stdg/assembly.hpp"
#include "stdg/material.hpp"
#include "stdg/solver.hpp"

#include <memory>
#include <string>

namespace stdg {

enum class TimeMode { SpaceTime, CrankNicolson };
enum class BoundaryCondition { FreeSurface, Periodic };

std::string to_string(TimeMode m);
std::string to_string(BoundaryCondition bc);
TimeMode time_mode_from_string(const std::string& s);
BoundaryCondition boundary_condition_from_string(const std::string& s);

/// Slab coefficients of velocity and stress (layout: see Discretization).
struct State {
  Vector velocity;
  Vector stress;
  int step = 0;
  double time = 0.0;
};

State zero_state(const Discretization& disc);

/// Free surface: removes the primal-edge parts of D and Q on boundary
/// sub-elements (zero traction, zero velocity jump). Periodic: requires that
/// no boundary edge is left. Idempotent.
void apply_bc(const Discretization& disc, Operators& ops, BoundaryCondition bc);

/// Building blocks of the velocity system; all are matrix-free.
class SpaceTimeKernels {
 public:
  SpaceTimeKernels(const Discretization& disc, const Operators& ops, const MaterialField& materials);

  const Discretization& disc() const { return disc_; }
  const Operators& ops() const { return ops_; }
  const MaterialField& materials() const { return mat_; }

  /// E_j sum_i Q_{i,j} v_i (stress layout).
  void strain(const Vector& v, Vector& out) const;
  /// sum_j D_{i,j} s_j (velocity layout).
  void divergence(const Vector& s, Vector& out) const;
  /// kron(T, M_j^{-1}) per dual cell.
  void dual_mass_inv(const Vector& s, Vector& out) const;
  /// kron(T^{-1} minus, I): propagates the previous slab's trace.
  void dual_minus_propagate(const Vector& s, Vector& out) const;
  /// rho_i kron(temporal, Mbar_i) per element.
  void primal_mass(const Matrix& temporal, const Vector& v, Vector& out) const;

  /// Dense per-sub-element factors used by block extraction.
  Matrix strain_block(int sub) const;      // (3 Npsi Ng) x (2 Nphi Ng), without E_j
  Matrix divergence_block(int sub) const;  // (2 Nphi Ng) x (3 Npsi Ng)
  Matrix cell_block(int cell) const;       // kron(E_j, kron(T^{-1}, M_j^{-1}))

 private:
  const Discretization& disc_;
  const Operators& ops_;
  const MaterialField& mat_;
};

/// Left-hand side of the velocity system:
///   A v = rho Mbar v - theta sum_j D M^{-1} E (Q_l v_l + Q_r v_r)
/// with theta = 1 in space-time mode and theta = 1/4 for Crank-Nicolson.
class SchurOperator : public BlockOperator {
 public:
  SchurOperator(const SpaceTimeKernels& kernels, TimeMode mode);

  Eigen::Index size() const override { return k_.disc().velocity_size(); }
  void apply(const Vector& x, Vector& y) const override;
  int num_blocks() const override { return k_.disc().num_elements(); }
  int block_size() const override { return k_.disc().velocity_block(); }
  std::vector<int> block_neighbors(int i) const override;
  Matrix block(int i, int e) const override;

  TimeMode mode() const { return mode_; }
  double theta() const { return mode_ == TimeMode::CrankNicolson ? 0.25 : 1.0; }

 private:
  const SpaceTimeKernels& k_;
  TimeMode mode_;
};

struct SchemeConfig {
  TimeMode mode = TimeMode::SpaceTime;
  double dt = 0.0;
  KrylovConfig krylov;
  PreconditionerKind preconditioner = PreconditionerKind::None;
  BoundaryCondition boundary = BoundaryCondition::FreeSurface;
};

struct Energy {
  double kinetic = 0.0;
  double elastic = 0.0;
  double total() const { return kinetic + elastic; }
};

struct StepStats {
  int iterations = 0;
  double residual = 0.0;
};

class Scheme {
 public:
  Scheme(const Discretization& disc, MaterialField materials, SchemeConfig cfg);
  Scheme(const Scheme&) = delete;
  Scheme& operator=(const Scheme&) = delete;

  const Discretization& disc() const { return disc_; }
  const Operators& operators() const { return ops_; }
  const MaterialField& materials() const { return mat_; }
  const SchemeConfig& config() const { return cfg_; }
  const SpaceTimeKernels& kernels() const { return kernels_; }
  const SchurOperator& schur() const { return schur_; }
  const Preconditioner& preconditioner() const { return *pre_; }

  /// Right-hand side for the slab following `s`. Sources may be null.
  Vector compute_rhs(const State& s, const SourceVectors* src) const;
  /// Stress of the new slab from its velocity.
  Vector update_stress(const State& old, const Vector& velocity, const SourceVectors* src) const;
  /// Solves the velocity system, updates the stress, advances the counters.
  StepStats advance(State& s, const SourceVectors* src = nullptr) const;

  /// Energy of the end-of-slab trace.
  Energy energy(const State& s) const;
  /// Quadratic forms of the temporal jumps between `prev` (at tau = 1) and
  /// `next` (at tau = 0).
  Energy jump_energy(const State& prev, const State& next) const;

  /// Rebuilds the preconditioner (e.g. after changing the kind).
  void set_preconditioner(PreconditionerKind kind);

 private:
  const Discretization& disc_;
  MaterialField mat_;
  SchemeConfig cfg_;
  Operators ops_;
  SpaceTimeKernels kernels_;
  SchurOperator schur_;
  std::unique_ptr<Preconditioner> pre_;
};

/// Velocity (u, v) at reference point xi of element i, time tau in [0, 1].
Vec2 evaluate_velocity(const Discretization& disc, const Vector& velocity, int element, const Vec2& xi, double tau);
/// Stress (sxx, syy, sxy) of dual cell j at x (cell frame), time tau.
Vec3 evaluate_stress(const Discretization& disc, const Vector& stress, int cell, const Vec2& x, double tau);

}  // namespace stdg
