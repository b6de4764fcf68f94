#include "stdg/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>

namespace stdg {

namespace {

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

}  // namespace

namespace {

std::atomic<bool> g_reproducible{false};
constexpr Eigen::Index kChunk = 4096;

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void set_reproducible(bool on) { g_reproducible = on; }
bool reproducible() { return g_reproducible; }

double dot(const Vector& a, const Vector& b) {
  const Eigen::Index n = a.size();
  if (g_reproducible) {
    const Eigen::Index chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < chunks; ++c) {
      const Eigen::Index lo = c * kChunk, len = std::min(kChunk, n - lo);
      partial[c] = a.segment(lo, len).dot(b.segment(lo, len));
    }
    double sum = 0.0;
    for (double v : partial) sum += v;
    return sum;
  }
  double sum = 0.0;
#pragma omp parallel for reduction(+ : sum) schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

DenseBlockOperator::DenseBlockOperator(Matrix a, int block_size) : a_(std::move(a)), bs_(block_size) {
  if (a_.rows() != a_.cols() || bs_ <= 0 || a_.rows() % bs_ != 0)
    throw ContractError("DenseBlockOperator: matrix is not square or not divisible into blocks");
}

std::vector<int> DenseBlockOperator::block_neighbors(int i) const {
  std::vector<int> out;
  for (int e = 0; e < num_blocks(); ++e)
    if (e != i && block(i, e).cwiseAbs().maxCoeff() > 0.0) out.push_back(e);
  return out;
}

Matrix materialize(const LinearOperator& op, Eigen::Index max_dimension) {
  const Eigen::Index n = op.size();
  if (n > max_dimension)
    throw ContractError("materialize: dimension " + std::to_string(n) + " exceeds guard " +
                        std::to_string(max_dimension));
  Matrix a(n, n);
  Vector e = Vector::Zero(n), y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    e[k] = 1.0;
    op.apply(e, y);
    a.col(k) = y;
    e[k] = 0.0;
  }
  return a;
}

std::string to_string(KrylovMethod m) { return m == KrylovMethod::CG ? "cg" : "gmres"; }

std::string to_string(PreconditionerKind k) {
  switch (k) {
    case PreconditionerKind::None: return "none";
    case PreconditionerKind::Pre1: return "pre1";
    case PreconditionerKind::Pre2: return "pre2";
  }
  return "none";
}

KrylovMethod krylov_method_from_string(const std::string& s) {
  if (s == "cg") return KrylovMethod::CG;
  if (s == "gmres") return KrylovMethod::GMRES;
  throw ConfigError("unknown Krylov method '" + s + "' (expected cg or gmres)");
}

PreconditionerKind preconditioner_from_string(const std::string& s) {
  if (s == "none") return PreconditionerKind::None;
  if (s == "pre1") return PreconditionerKind::Pre1;
  if (s == "pre2") return PreconditionerKind::Pre2;
  throw ConfigError("unknown preconditioner '" + s + "' (expected none, pre1 or pre2)");
}

void KrylovConfig::validate() const {
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw ConfigError("solver tolerance must lie in (0, 1)");
  if (!(absolute_tolerance >= 0.0)) throw ConfigError("absolute tolerance must be non-negative");
  if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (restart < 0) throw ConfigError("GMRES restart must be non-negative");
}

BlockJacobiPreconditioner::BlockJacobiPreconditioner(const BlockOperator& a) : bs_(a.block_size()) {
  const int n = a.num_blocks();
  inv_.resize(n);
  std::vector<int> singular(n, 0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    Eigen::FullPivLU<Matrix> lu(a.block(i, i));
    if (!lu.isInvertible()) {
      singular[i] = 1;
      continue;
    }
    inv_[i] = lu.inverse();
  }
  for (int i = 0; i < n; ++i)
    if (singular[i]) throw SolverError("Pre1: singular diagonal block of element " + std::to_string(i), {});
}

void BlockJacobiPreconditioner::apply(const Vector& r, Vector& z) const {
  z.resize(r.size());
  const int n = static_cast<int>(inv_.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) z.segment(Eigen::Index(i) * bs_, bs_).noalias() = inv_[i] * r.segment(Eigen::Index(i) * bs_, bs_);
}

LocalStencilPreconditioner::LocalStencilPreconditioner(const BlockOperator& a) : bs_(a.block_size()) {
  const int n = a.num_blocks();
  stencil_.resize(n);
  row_.resize(n);
  std::vector<int> singular(n, 0);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    std::vector<int> g{i};
    for (int e : a.block_neighbors(i)) g.push_back(e);
    const int m = static_cast<int>(g.size());
    Matrix local(m * bs_, m * bs_);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) local.block(r * bs_, c * bs_, bs_, bs_) = a.block(g[r], g[c]);
    Eigen::FullPivLU<Matrix> lu(local);
    if (!lu.isInvertible()) {
      singular[i] = 1;
      continue;
    }
    row_[i] = lu.inverse().topRows(bs_);
    stencil_[i] = std::move(g);
  }
  for (int i = 0; i < n; ++i)
    if (singular[i]) throw SolverError("Pre2: singular local system of element " + std::to_string(i), {});
}

void LocalStencilPreconditioner::apply(const Vector& r, Vector& z) const {
  z.resize(r.size());
  const int n = static_cast<int>(row_.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    auto zi = z.segment(Eigen::Index(i) * bs_, bs_);
    zi.setZero();
    const auto& g = stencil_[i];
    for (std::size_t e = 0; e < g.size(); ++e)
      zi.noalias() += row_[i].middleCols(Eigen::Index(e) * bs_, bs_) * r.segment(Eigen::Index(g[e]) * bs_, bs_);
  }
}

std::unique_ptr<Preconditioner> build_preconditioner(PreconditionerKind kind, const BlockOperator& a) {
  switch (kind) {
    case PreconditionerKind::None: return std::make_unique<IdentityPreconditioner>();
    case PreconditionerKind::Pre1: return std::make_unique<BlockJacobiPreconditioner>(a);
    case PreconditionerKind::Pre2: return std::make_unique<LocalStencilPreconditioner>(a);
  }
  return std::make_unique<IdentityPreconditioner>();
}

SolveResult cg_solve(const LinearOperator& a, const Vector& b, const Vector& x0, const KrylovConfig& cfg,
                     const Preconditioner* p) {
  cfg.validate();
  SolveResult res;
  res.x = x0.size() == b.size() ? x0 : Vector::Zero(b.size());
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    res.x.setZero();
    return res;
  }
  const double threshold = std::max(cfg.tolerance * bnorm, cfg.absolute_tolerance);
  Vector r(b.size()), z(b.size()), q(b.size());
  a.apply(res.x, q);
  r = b - q;
  double rnorm = norm2(r);
  res.history.push_back(rnorm / bnorm);
  if (rnorm <= threshold) {
    res.residual = rnorm / bnorm;
    return res;
  }
  if (p) p->apply(r, z); else z = r;
  Vector d = z;
  double rz = dot(r, z);
  while (res.iterations < cfg.max_iterations) {
    a.apply(d, q);
    const double dq = dot(d, q);
    const double alpha = rz / dq;
    if (!finite(alpha)) throw SolverError("CG diverged (non-finite step)", res.history);
    res.x += alpha * d;
    r -= alpha * q;
    ++res.iterations;
    rnorm = norm2(r);
    res.history.push_back(rnorm / bnorm);
    if (!finite(rnorm)) throw SolverError("CG diverged (non-finite residual)", res.history);
    if (rnorm <= threshold) break;
    if (p) p->apply(r, z); else z = r;
    const double rz_new = dot(r, z);
    d = z + (rz_new / rz) * d;
    rz = rz_new;
  }
  a.apply(res.x, q);
  res.residual = norm2(b - q) / bnorm;
  if (rnorm > threshold)
    throw SolverError("CG did not converge in " + std::to_string(cfg.max_iterations) +
                          " iterations (relative residual " + sci(rnorm / bnorm) + ")",
                      res.history);
  return res;
}

SolveResult gmres_solve(const LinearOperator& a, const Vector& b, const Vector& x0, const KrylovConfig& cfg,
                        const Preconditioner* p) {
  cfg.validate();
  SolveResult res;
  const Eigen::Index n = b.size();
  res.x = x0.size() == n ? x0 : Vector::Zero(n);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    res.x.setZero();
    return res;
  }
  auto precondition = [&](const Vector& in, Vector& out) {
    if (p) p->apply(in, out); else out = in;
  };
  const double threshold = std::max(cfg.tolerance * bnorm, cfg.absolute_tolerance);
  Vector tmp(n), w(n), r(n);
  precondition(b, tmp);
  const double pbnorm = norm2(tmp);
  double inner_target = cfg.tolerance * pbnorm;
  const int m = cfg.restart > 0 ? cfg.restart : cfg.max_iterations;

  a.apply(res.x, tmp);
  r = b - tmp;
  double true_norm = norm2(r);
  while (true_norm > threshold) {
    if (res.iterations >= cfg.max_iterations)
      throw SolverError("GMRES did not converge in " + std::to_string(cfg.max_iterations) +
                            " iterations (relative residual " + sci(true_norm / bnorm) + ")",
                        res.history);
    precondition(r, w);
    const double beta = norm2(w);
    if (!finite(beta)) throw SolverError("GMRES diverged (non-finite residual)", res.history);
    res.history.push_back(beta / pbnorm);
    std::vector<Vector> V;
    V.push_back(w / beta);
    Matrix H = Matrix::Zero(m + 1, m);
    Vector g = Vector::Zero(m + 1), cs = Vector::Zero(m), sn = Vector::Zero(m);
    g[0] = beta;
    int k = 0;
    while (k < m && res.iterations < cfg.max_iterations) {
      a.apply(V[k], tmp);
      precondition(tmp, w);
      for (int i = 0; i <= k; ++i) {
        H(i, k) = dot(w, V[i]);
        w -= H(i, k) * V[i];
      }
      const double h_next = norm2(w);
      H(k + 1, k) = h_next;
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      const double rr = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = H(k, k) / rr;
      sn[k] = H(k + 1, k) / rr;
      H(k, k) = rr;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      ++k;
      ++res.iterations;
      const double est = std::abs(g[k]);
      if (!finite(est)) throw SolverError("GMRES diverged (non-finite residual)", res.history);
      res.history.push_back(est / pbnorm);
      if (est <= inner_target || h_next == 0.0) break;  // converged or happy breakdown
      V.push_back(w / h_next);
    }
    const Vector y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    for (int i = 0; i < k; ++i) res.x += y[i] * V[i];
    a.apply(res.x, tmp);
    r = b - tmp;
    true_norm = norm2(r);
    if (!finite(true_norm)) throw SolverError("GMRES diverged (non-finite residual)", res.history);
    // the preconditioned estimate met its target but the true residual did not
    if (true_norm > threshold && std::abs(g[k]) <= inner_target)
      inner_target *= std::max(1e-3, 0.5 * threshold / true_norm);
  }
  res.residual = true_norm / bnorm;
  return res;
}

SolveResult krylov_solve(const LinearOperator& a, const Vector& b, const Vector& x0, const KrylovConfig& cfg,
                         const Preconditioner* p) {
  return cfg.method == KrylovMethod::CG ? cg_solve(a, b, x0, cfg, p) : gmres_solve(a, b, x0, cfg, p);
}

}  // namespace stdg
