#pragma once

#include "stdg/basis.hpp"
#include "stdg/mesh.hpp"

#include <array>
#include <memory>
#include <vector>

namespace stdg {

struct MapPoint {
  Vec2 x;
  Mat2 jacobian;
  double det = 0.0;
};

/// Map from the reference triangle to a primal element: affine, or
/// isoparametric of degree p when the element touches a curved boundary.
class ElementMap {
 public:
  ElementMap() = default;
  ElementMap(const Vec2& a, const Vec2& b, const Vec2& c);
  /// Isoparametric map through the given nodal positions of `basis`.
  ElementMap(std::shared_ptr<const TriangleBasis> basis, std::vector<Vec2> nodes);

  bool curved() const { return basis_ != nullptr; }
  MapPoint operator()(const Vec2& xi) const;
  /// Reference coordinates of x (Newton for curved maps). Returns false if
  /// the iteration fails to converge.
  bool inverse(const Vec2& x, Vec2& xi) const;
  /// Throws MeshError if detJ <= 0 at any point of the given reference set.
  void check_positive(const std::vector<Vec2>& points, int element) const;

 private:
  Vec2 origin_ = Vec2::Zero();
  Mat2 jacobian_ = Mat2::Identity();
  std::shared_ptr<const TriangleBasis> basis_;
  Eigen::Matrix<double, Eigen::Dynamic, 2> nodes_;
};

/// Bilinear map from the unit square onto a quadrilateral with corners
/// v[0]..v[3] at (0,0), (1,0), (1,1), (0,1).
class QuadMap {
 public:
  QuadMap() = default;
  explicit QuadMap(const std::array<Vec2, 4>& v) : v_(v) {}

  const std::array<Vec2, 4>& vertices() const { return v_; }
  MapPoint operator()(const Vec2& xi) const;
  /// Newton inverse; valid slightly outside the square (the bilinear
  /// polynomial is extended).
  Vec2 inverse(const Vec2& x) const;
  double area() const;

 private:
  std::array<Vec2, 4> v_{};
};

/// Builds one map per triangle. Triangles with a boundary edge whose end
/// points lie on one of `mesh.circles` get an isoparametric map of degree p
/// whose edge nodes are projected onto the circle; all others are affine.
std::vector<ElementMap> build_element_maps(const PrimalMesh& mesh, const EdgeConnectivity& conn, int p);

/// T_{i,j}: the part of triangle i inside the dual cell of edge j.
struct SubElement {
  int triangle = kNone;
  int edge = kNone;  // edge copy that belongs to `triangle`
  int cell = kNone;
  int local_edge = kNone;
  int sign = 1;
  /// Translation from the triangle's coordinates into the dual cell frame
  /// (nonzero only across periodic boundaries).
  Vec2 shift = Vec2::Zero();
  std::array<Vec2, 3> vertices;  // barycenter, edge start, edge end (triangle frame)
  double area = 0.0;
  Vec2 normal = Vec2::Zero();  // n_{i,j} = s_{i,j} n_j
};

struct DualCell {
  int edge = kNone;  // canonical edge index
  int left = kNone;
  int right = kNone;
  bool boundary = false;
  int region = 0;
  /// Frame of the dual basis. Interior: (bary_l, a, bary_r, b). Boundary:
  /// the kite (bary_l, a, mirror of bary_l across the edge, b); only the
  /// half inside triangle l belongs to the cell.
  QuadMap quad;
  std::vector<int> subs;
  double area = 0.0;
};

struct DualMesh {
  std::vector<DualCell> cells;
  std::vector<SubElement> subs;
  std::vector<int> edge_to_cell;  // for every edge copy
  std::vector<std::array<int, 3>> tri_subs;  // per triangle, by local edge

  int num_cells() const { return static_cast<int>(cells.size()); }
  double total_area() const;
};

DualMesh build_dual(const PrimalMesh& mesh, const EdgeConnectivity& conn);

}  // namespace stdg
