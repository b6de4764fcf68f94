#pragma once

#include "stdg/common.hpp"

#include <vector>

namespace stdg {

/// Gauss-Legendre nodes and weights on [0, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on the unit interval (exact to degree 2n-1).
GaussLegendre gauss_legendre(int n);

enum class QuadratureKind { Interval, Triangle, Square };

/// A quadrature rule on a reference domain. Points are stored as 2D
/// coordinates; interval rules use only the x component.
struct QuadratureRule {
  QuadratureKind kind = QuadratureKind::Interval;
  int exactness = 0;
  std::vector<Vec2> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

/// Rule on the unit interval, the reference triangle {x,y >= 0, x+y <= 1}
/// or the unit square, integrating polynomials of total degree <= exactness.
/// Triangle rules are collapsed (Duffy) tensor Gauss rules.
QuadratureRule make_quadrature(QuadratureKind kind, int exactness);

inline constexpr int kMaxQuadratureExactness = 20;

}  // namespace stdg
