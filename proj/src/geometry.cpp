#include "stdg/geometry.hpp"

#include "stdg/quadrature.hpp"

#include <cmath>

namespace stdg {

ElementMap::ElementMap(const Vec2& a, const Vec2& b, const Vec2& c) : origin_(a) {
  jacobian_.col(0) = b - a;
  jacobian_.col(1) = c - a;
}

ElementMap::ElementMap(std::shared_ptr<const TriangleBasis> basis, std::vector<Vec2> nodes)
    : basis_(std::move(basis)) {
  if (static_cast<int>(nodes.size()) != basis_->size())
    throw ContractError("ElementMap: node count does not match basis size");
  nodes_.resize(basis_->size(), 2);
  for (int k = 0; k < basis_->size(); ++k) nodes_.row(k) = nodes[k].transpose();
  // affine part through the three vertices, used as the Newton start
  origin_ = nodes[0];
  jacobian_.col(0) = nodes[basis_->degree()] - nodes[0];
  jacobian_.col(1) = nodes[basis_->size() - 1] - nodes[0];
}

MapPoint ElementMap::operator()(const Vec2& xi) const {
  MapPoint out;
  if (!basis_) {
    out.x = origin_ + jacobian_ * xi;
    out.jacobian = jacobian_;
  } else {
    out.x = nodes_.transpose() * basis_->values(xi);
    out.jacobian = nodes_.transpose() * basis_->gradients(xi);
  }
  out.det = out.jacobian.determinant();
  return out;
}

bool ElementMap::inverse(const Vec2& x, Vec2& xi) const {
  xi = jacobian_.inverse() * (x - origin_);
  if (!basis_) return true;
  const double scale = jacobian_.norm();
  for (int iter = 0; iter < 50; ++iter) {
    const MapPoint m = (*this)(xi);
    const Vec2 r = m.x - x;
    if (r.norm() <= 1e-14 * scale) return true;
    xi -= m.jacobian.inverse() * r;
  }
  return ((*this)(xi).x - x).norm() <= 1e-10 * scale;
}

void ElementMap::check_positive(const std::vector<Vec2>& points, int element) const {
  for (const auto& xi : points)
    if ((*this)(xi).det <= 0.0)
      throw MeshError("inverted element " + std::to_string(element) + ": non-positive Jacobian");
}

MapPoint QuadMap::operator()(const Vec2& xi) const {
  const double s = xi.x(), t = xi.y();
  MapPoint out;
  out.x = (1 - s) * (1 - t) * v_[0] + s * (1 - t) * v_[1] + s * t * v_[2] + (1 - s) * t * v_[3];
  out.jacobian.col(0) = (1 - t) * (v_[1] - v_[0]) + t * (v_[2] - v_[3]);
  out.jacobian.col(1) = (1 - s) * (v_[3] - v_[0]) + s * (v_[2] - v_[1]);
  out.det = out.jacobian.determinant();
  return out;
}

Vec2 QuadMap::inverse(const Vec2& x) const {
  Vec2 xi(0.5, 0.5);
  const double scale = (v_[2] - v_[0]).norm() + (v_[3] - v_[1]).norm();
  for (int iter = 0; iter < 50; ++iter) {
    const MapPoint m = (*this)(xi);
    const Vec2 r = m.x - x;
    if (r.norm() <= 1e-15 * scale) break;
    xi -= m.jacobian.inverse() * r;
  }
  return xi;
}

double QuadMap::area() const {
  double twice = 0.0;
  for (int k = 0; k < 4; ++k) twice += cross2(v_[k], v_[(k + 1) % 4]);
  return 0.5 * std::abs(twice);
}

namespace {

const Circle* circle_through(const PrimalMesh& mesh, const Vec2& a, const Vec2& b) {
  for (const auto& c : mesh.circles) {
    const double tol = 1e-8 * c.radius;
    if (std::abs((a - c.center).norm() - c.radius) < tol && std::abs((b - c.center).norm() - c.radius) < tol)
      return &c;
  }
  return nullptr;
}

}  // namespace

std::vector<ElementMap> build_element_maps(const PrimalMesh& mesh, const EdgeConnectivity& conn, int p) {
  std::vector<ElementMap> maps;
  maps.reserve(mesh.num_triangles());
  std::shared_ptr<const TriangleBasis> basis;
  const auto check_points = make_quadrature(QuadratureKind::Triangle, 2 * p + 2).points;
  for (int i = 0; i < mesh.num_triangles(); ++i) {
    const Vec2 &a = mesh.vertex(i, 0), &b = mesh.vertex(i, 1), &c = mesh.vertex(i, 2);
    std::vector<std::pair<int, const Circle*>> curved;
    for (int k = 0; k < 3; ++k) {
      const int j = conn.tri_edges[i][k];
      if (!conn.is_boundary(j)) continue;
      if (const Circle* circ = circle_through(mesh, mesh.vertex(i, k), mesh.vertex(i, (k + 1) % 3)))
        curved.emplace_back(k, circ);
    }
    if (curved.empty() || p == 1) {
      maps.emplace_back(a, b, c);
      continue;
    }
    if (!basis) basis = std::make_shared<const TriangleBasis>(p);
    const ElementMap affine(a, b, c);
    std::vector<Vec2> nodes;
    for (const auto& xi : basis->nodes()) nodes.push_back(affine(xi).x);
    for (const auto& [k, circ] : curved)
      for (int m : basis->edge_nodes(k)) {
        const Vec2 d = nodes[m] - circ->center;
        nodes[m] = circ->center + circ->radius * d / d.norm();
      }
    maps.emplace_back(basis, std::move(nodes));
    maps.back().check_positive(check_points, i);
  }
  return maps;
}

double DualMesh::total_area() const {
  double sum = 0.0;
  for (const auto& c : cells) sum += c.area;
  return sum;
}

DualMesh build_dual(const PrimalMesh& mesh, const EdgeConnectivity& conn) {
  DualMesh dual;
  const int ne = conn.num_edges();
  dual.edge_to_cell.assign(ne, kNone);
  dual.tri_subs.assign(mesh.num_triangles(), {kNone, kNone, kNone});

  for (int j = 0; j < ne; ++j) {
    if (conn.canonical(j) != j) continue;
    DualCell cell;
    cell.edge = j;
    cell.left = conn.left[j];
    cell.right = conn.right[j];
    cell.boundary = conn.is_boundary(j);
    const Vec2& a = mesh.nodes[conn.edges[j][0]];
    const Vec2& b = mesh.nodes[conn.edges[j][1]];
    const Vec2 bl = mesh.barycenter(cell.left);
    const int id = dual.num_cells();
    dual.edge_to_cell[j] = id;

    auto add_sub = [&](int tri, int edge_copy, const Vec2& shift) {
      SubElement s;
      s.triangle = tri;
      s.edge = edge_copy;
      s.cell = id;
      s.local_edge = conn.local_edge(tri, edge_copy);
      s.sign = conn.sign(tri, edge_copy);
      s.shift = shift;
      const int k = s.local_edge;
      s.vertices = {mesh.barycenter(tri), mesh.vertex(tri, k), mesh.vertex(tri, (k + 1) % 3)};
      s.area = 0.5 * std::abs(cross2(s.vertices[1] - s.vertices[0], s.vertices[2] - s.vertices[0]));
      s.normal = s.sign * conn.normal[j];
      dual.tri_subs[tri][k] = static_cast<int>(dual.subs.size());
      cell.subs.push_back(static_cast<int>(dual.subs.size()));
      cell.area += s.area;
      dual.subs.push_back(s);
    };

    add_sub(cell.left, j, Vec2::Zero());
    if (cell.boundary) {
      cell.region = mesh.region[cell.left];
      const Vec2 t = (b - a).normalized();
      const Vec2 foot = a + (bl - a).dot(t) * t;
      cell.quad = QuadMap({bl, a, 2.0 * foot - bl, b});
    } else {
      cell.region = std::min(mesh.region[cell.left], mesh.region[cell.right]);
      int r_copy = j;
      Vec2 shift = Vec2::Zero();
      if (conn.is_periodic(j)) {
        r_copy = conn.partner[j];
        dual.edge_to_cell[r_copy] = id;
        shift = a - mesh.nodes[conn.edges[r_copy][0]];
      }
      cell.quad = QuadMap({bl, a, mesh.barycenter(cell.right) + shift, b});
      add_sub(cell.right, r_copy, shift);
    }
    dual.cells.push_back(std::move(cell));
  }
  return dual;
}

}  // namespace stdg
