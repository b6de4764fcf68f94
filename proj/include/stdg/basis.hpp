#pragma once

#include "stdg/common.hpp"

#include <array>
#include <vector>

namespace stdg {

inline constexpr int kMinSpatialDegree = 1;
inline constexpr int kMaxSpatialDegree = 6;
inline constexpr int kMaxTimeDegree = 4;

using GradientMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Nodal Lagrange basis of degree p on the reference triangle
/// {(xi, eta) : xi, eta >= 0, xi + eta <= 1} with equispaced nodes.
///
/// Nodes are ordered row by row: (i/p, j/p) for j = 0..p, i = 0..p-j, so the
/// three vertices come first for p = 1 and the basis reduces to barycentric
/// coordinates. Local edge k joins vertex k and vertex (k+1) % 3.
class TriangleBasis {
 public:
  explicit TriangleBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Vec2>& nodes() const { return nodes_; }

  Vector values(const Vec2& xi) const;
  GradientMatrix gradients(const Vec2& xi) const;

  /// Indices of the nodes lying on local edge k, ordered from vertex k to vertex k+1.
  std::vector<int> edge_nodes(int k) const;

  static int count(int degree) { return (degree + 1) * (degree + 2) / 2; }
  static const std::array<Vec2, 3>& vertices();

 private:
  int degree_;
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 2>> exponents_;
  Matrix coefficients_;  // monomial -> nodal change of basis
};

/// Tensor-product Lagrange basis of degree p on the unit square with
/// equispaced nodes; node (i, j) has index j * (p + 1) + i.
class SquareBasis {
 public:
  explicit SquareBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return (degree_ + 1) * (degree_ + 1); }
  const std::vector<Vec2>& nodes() const { return nodes_; }

  Vector values(const Vec2& xi) const;
  GradientMatrix gradients(const Vec2& xi) const;

 private:
  void eval_1d(double x, Vector& value, Vector& deriv) const;

  int degree_;
  std::vector<double> nodes_1d_;
  std::vector<Vec2> nodes_;
};

/// Lagrange polynomials through the Gauss-Legendre points of [0, 1]. The
/// basis is orthogonal: int_0^1 g_k g_m = w_k delta_km.
class TimeBasis {
 public:
  explicit TimeBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  Vector values(double tau) const;
  Vector derivatives(double tau) const;

  /// gamma_k(0) and gamma_k(1).
  const Vector& at_start() const { return at_start_; }
  const Vector& at_end() const { return at_end_; }

 private:
  int degree_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  Vector at_start_;
  Vector at_end_;
};

}  // namespace stdg
