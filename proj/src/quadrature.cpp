#include "stdg/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace stdg {

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw ContractError("gauss_legendre: need at least one point");
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Newton iteration on P_n over [-1, 1], then affine map to [0, 1].
  auto legendre = [n](double x, double& pn, double& dpn) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    pn = p1;
    dpn = n * (x * p1 - p0) / (x * x - 1.0);
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pn = 0.0, dpn = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      legendre(x, pn, dpn);
      const double dx = pn / dpn;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, pn, dpn);
    const double w = 2.0 / ((1.0 - x * x) * dpn * dpn);
    // x is the i-th largest root; store nodes ascending on [0, 1]
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.5;
  return rule;
}

QuadratureRule make_quadrature(QuadratureKind kind, int exactness) {
  if (exactness < 0 || exactness > kMaxQuadratureExactness)
    throw ContractError("make_quadrature: unsupported exactness " + std::to_string(exactness));
  QuadratureRule rule;
  rule.kind = kind;
  rule.exactness = exactness;
  switch (kind) {
    case QuadratureKind::Interval: {
      const auto gl = gauss_legendre(exactness / 2 + 1);
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        rule.points.emplace_back(gl.nodes[i], 0.0);
        rule.weights.push_back(gl.weights[i]);
      }
      break;
    }
    case QuadratureKind::Square: {
      const auto gl = gauss_legendre(exactness / 2 + 1);
      for (std::size_t j = 0; j < gl.nodes.size(); ++j)
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
          rule.points.emplace_back(gl.nodes[i], gl.nodes[j]);
          rule.weights.push_back(gl.weights[i] * gl.weights[j]);
        }
      break;
    }
    case QuadratureKind::Triangle: {
      // x = s, y = t (1 - s); the factor (1 - s) raises the degree in s by one.
      const auto gs = gauss_legendre((exactness + 2 + 1) / 2);
      const auto gt = gauss_legendre(exactness / 2 + 1);
      for (std::size_t i = 0; i < gs.nodes.size(); ++i)
        for (std::size_t j = 0; j < gt.nodes.size(); ++j) {
          const double s = gs.nodes[i];
          const double t = gt.nodes[j];
          rule.points.emplace_back(s, t * (1.0 - s));
          rule.weights.push_back(gs.weights[i] * gt.weights[j] * (1.0 - s));
        }
      break;
    }
  }
  return rule;
}

}  // namespace stdg
