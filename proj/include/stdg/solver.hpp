#pragma once

#include "stdg/common.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace stdg {

/// Reductions use a fixed chunked summation order when set; otherwise the
/// OpenMP reduction order is free.
void set_reproducible(bool on);
bool reproducible();
double dot(const Vector& a, const Vector& b);
inline double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Eigen::Index size() const = 0;
  virtual void apply(const Vector& x, Vector& y) const = 0;
};

class DenseOperator : public LinearOperator {
 public:
  explicit DenseOperator(Matrix a) : a_(std::move(a)) {}
  Eigen::Index size() const override { return a_.rows(); }
  void apply(const Vector& x, Vector& y) const override { y.noalias() = a_ * x; }

 private:
  Matrix a_;
};

/// Operator with a block structure: block rows couple only to themselves
/// and to a few neighbor blocks.
class BlockOperator : public LinearOperator {
 public:
  virtual int num_blocks() const = 0;
  virtual int block_size() const = 0;
  /// Distinct blocks e != i with a nonzero block(i, e).
  virtual std::vector<int> block_neighbors(int i) const = 0;
  /// Dense coupling block (zero if i and e are not coupled).
  virtual Matrix block(int i, int e) const = 0;
};

/// Dense matrix viewed as uniform blocks; neighbors are the nonzero blocks.
class DenseBlockOperator : public BlockOperator {
 public:
  DenseBlockOperator(Matrix a, int block_size);
  Eigen::Index size() const override { return a_.rows(); }
  void apply(const Vector& x, Vector& y) const override { y.noalias() = a_ * x; }
  int num_blocks() const override { return static_cast<int>(a_.rows() / bs_); }
  int block_size() const override { return bs_; }
  std::vector<int> block_neighbors(int i) const override;
  Matrix block(int i, int e) const override { return a_.block(i * bs_, e * bs_, bs_, bs_); }

 private:
  Matrix a_;
  int bs_;
};

/// Materializes any operator column by column. Throws ContractError above
/// `max_dimension`.
Matrix materialize(const LinearOperator& op, Eigen::Index max_dimension = 20000);

enum class KrylovMethod { CG, GMRES };
enum class PreconditionerKind { None, Pre1, Pre2 };

std::string to_string(KrylovMethod m);
std::string to_string(PreconditionerKind k);
KrylovMethod krylov_method_from_string(const std::string& s);
PreconditionerKind preconditioner_from_string(const std::string& s);

struct KrylovConfig {
  KrylovMethod method = KrylovMethod::GMRES;
  double tolerance = 1e-10;
  double absolute_tolerance = 1e-14;
  int max_iterations = 1000;
  int restart = 0;  // GMRES only; 0 = unrestarted
  void validate() const;
  bool operator==(const KrylovConfig&) const = default;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

struct SolveResult {
  Vector x;
  int iterations = 0;
  double residual = 0.0;  // true relative residual ||b - Ax|| / ||b||
  std::vector<double> history;
};

class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual PreconditionerKind kind() const = 0;
  virtual void apply(const Vector& r, Vector& z) const = 0;
};

class IdentityPreconditioner : public Preconditioner {
 public:
  PreconditionerKind kind() const override { return PreconditionerKind::None; }
  void apply(const Vector& r, Vector& z) const override { z = r; }
};

/// Inverse of the block diagonal.
class BlockJacobiPreconditioner : public Preconditioner {
 public:
  explicit BlockJacobiPreconditioner(const BlockOperator& a);
  PreconditionerKind kind() const override { return PreconditionerKind::Pre1; }
  void apply(const Vector& r, Vector& z) const override;

 private:
  int bs_;
  std::vector<Matrix> inv_;
};

/// Per block i, the first block row of the inverse of the local system on
/// {i} and its neighbors.
class LocalStencilPreconditioner : public Preconditioner {
 public:
  explicit LocalStencilPreconditioner(const BlockOperator& a);
  PreconditionerKind kind() const override { return PreconditionerKind::Pre2; }
  void apply(const Vector& r, Vector& z) const override;
  const std::vector<int>& stencil(int i) const { return stencil_[i]; }
  const Matrix& row(int i) const { return row_[i]; }

 private:
  int bs_;
  std::vector<std::vector<int>> stencil_;
  std::vector<Matrix> row_;
};

std::unique_ptr<Preconditioner> build_preconditioner(PreconditionerKind kind, const BlockOperator& a);

SolveResult cg_solve(const LinearOperator& a, const Vector& b, const Vector& x0, const KrylovConfig& cfg,
                     const Preconditioner* p = nullptr);
/// Left-preconditioned GMRES (modified Gram-Schmidt, Givens rotations).
/// Convergence is always confirmed on the true residual.
SolveResult gmres_solve(const LinearOperator& a, const Vector& b, const Vector& x0, const KrylovConfig& cfg,
                        const Preconditioner* p = nullptr);
SolveResult krylov_solve(const LinearOperator& a, const Vector& b, const Vector& x0, const KrylovConfig& cfg,
                         const Preconditioner* p = nullptr);

}  // namespace stdg
