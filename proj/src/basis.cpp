#include "stdg/basis.hpp"

#include "stdg/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace stdg {

namespace {

void check_spatial_degree(int p) {
  if (p < kMinSpatialDegree || p > kMaxSpatialDegree)
    throw ContractError("spatial degree " + std::to_string(p) + " outside supported range [" +
                        std::to_string(kMinSpatialDegree) + ", " +
                        std::to_string(kMaxSpatialDegree) + "]");
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

const std::array<Vec2, 3>& TriangleBasis::vertices() {
  static const std::array<Vec2, 3> v{Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
  return v;
}

TriangleBasis::TriangleBasis(int degree) : degree_(degree) {
  check_spatial_degree(degree);
  const int p = degree;
  for (int j = 0; j <= p; ++j)
    for (int i = 0; i <= p - j; ++i) nodes_.emplace_back(double(i) / p, double(j) / p);
  for (int total = 0; total <= p; ++total)
    for (int b = 0; b <= total; ++b) exponents_.push_back({total - b, b});

  const int n = size();
  Matrix vandermonde(n, n);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      vandermonde(m, k) =
          ipow(nodes_[m].x(), exponents_[k][0]) * ipow(nodes_[m].y(), exponents_[k][1]);
  coefficients_ = vandermonde.inverse();
}

Vector TriangleBasis::values(const Vec2& xi) const {
  const int n = size();
  Vector mono(n);
  for (int k = 0; k < n; ++k)
    mono[k] = ipow(xi.x(), exponents_[k][0]) * ipow(xi.y(), exponents_[k][1]);
  return coefficients_.transpose() * mono;
}

GradientMatrix TriangleBasis::gradients(const Vec2& xi) const {
  const int n = size();
  GradientMatrix mono(n, 2);
  for (int k = 0; k < n; ++k) {
    const int a = exponents_[k][0];
    const int b = exponents_[k][1];
    mono(k, 0) = a == 0 ? 0.0 : a * ipow(xi.x(), a - 1) * ipow(xi.y(), b);
    mono(k, 1) = b == 0 ? 0.0 : b * ipow(xi.x(), a) * ipow(xi.y(), b - 1);
  }
  return coefficients_.transpose() * mono;
}

std::vector<int> TriangleBasis::edge_nodes(int k) const {
  if (k < 0 || k > 2) throw ContractError("edge_nodes: local edge index out of range");
  const Vec2& a = vertices()[k];
  const Vec2& b = vertices()[(k + 1) % 3];
  std::vector<std::pair<double, int>> on_edge;
  const Vec2 t = b - a;
  for (int m = 0; m < size(); ++m) {
    const Vec2 d = nodes_[m] - a;
    if (std::abs(cross2(t, d)) < 1e-12) on_edge.emplace_back(d.dot(t) / t.squaredNorm(), m);
  }
  std::sort(on_edge.begin(), on_edge.end());
  std::vector<int> out;
  for (const auto& [s, m] : on_edge) out.push_back(m);
  return out;
}

SquareBasis::SquareBasis(int degree) : degree_(degree) {
  check_spatial_degree(degree);
  for (int i = 0; i <= degree; ++i) nodes_1d_.push_back(double(i) / degree);
  for (int j = 0; j <= degree; ++j)
    for (int i = 0; i <= degree; ++i) nodes_.emplace_back(nodes_1d_[i], nodes_1d_[j]);
}

void SquareBasis::eval_1d(double x, Vector& value, Vector& deriv) const {
  const int n = degree_ + 1;
  value.resize(n);
  deriv.resize(n);
  for (int k = 0; k < n; ++k) {
    double v = 1.0;
    double d = 0.0;
    for (int m = 0; m < n; ++m) {
      if (m == k) continue;
      const double denom = nodes_1d_[k] - nodes_1d_[m];
      d = (d * (x - nodes_1d_[m]) + v) / denom;
      v *= (x - nodes_1d_[m]) / denom;
    }
    value[k] = v;
    deriv[k] = d;
  }
}

Vector SquareBasis::values(const Vec2& xi) const {
  Vector vx, dx, vy, dy;
  eval_1d(xi.x(), vx, dx);
  eval_1d(xi.y(), vy, dy);
  const int n = degree_ + 1;
  Vector out(size());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out[j * n + i] = vx[i] * vy[j];
  return out;
}

GradientMatrix SquareBasis::gradients(const Vec2& xi) const {
  Vector vx, dx, vy, dy;
  eval_1d(xi.x(), vx, dx);
  eval_1d(xi.y(), vy, dy);
  const int n = degree_ + 1;
  GradientMatrix out(size(), 2);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      out(j * n + i, 0) = dx[i] * vy[j];
      out(j * n + i, 1) = vx[i] * dy[j];
    }
  return out;
}

TimeBasis::TimeBasis(int degree) : degree_(degree) {
  if (degree < 0 || degree > kMaxTimeDegree)
    throw ContractError("time degree " + std::to_string(degree) + " outside supported range [0, " +
                        std::to_string(kMaxTimeDegree) + "]");
  const auto gl = gauss_legendre(degree + 1);
  nodes_ = gl.nodes;
  weights_ = gl.weights;
  at_start_ = values(0.0);
  at_end_ = values(1.0);
}

Vector TimeBasis::values(double tau) const {
  const int n = size();
  Vector out(n);
  for (int k = 0; k < n; ++k) {
    double v = 1.0;
    for (int m = 0; m < n; ++m)
      if (m != k) v *= (tau - nodes_[m]) / (nodes_[k] - nodes_[m]);
    out[k] = v;
  }
  return out;
}

Vector TimeBasis::derivatives(double tau) const {
  const int n = size();
  Vector out(n);
  for (int k = 0; k < n; ++k) {
    double v = 1.0;
    double d = 0.0;
    for (int m = 0; m < n; ++m) {
      if (m == k) continue;
      const double denom = nodes_[k] - nodes_[m];
      d = (d * (tau - nodes_[m]) + v) / denom;
      v *= (tau - nodes_[m]) / denom;
    }
    out[k] = d;
  }
  return out;
}

}  // namespace stdg
