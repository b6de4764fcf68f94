#pragma once

#include "stdg/common.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stdg {

inline constexpr int kNone = -1;

/// Axis-aligned box whose opposite sides are identified.
struct PeriodicBox {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  bool operator==(const PeriodicBox&) const = default;
};

/// A circular boundary. Boundary edges whose endpoints both lie on the
/// circle get an isoparametric element map.
struct Circle {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
  bool operator==(const Circle&) const = default;
};

/// Primal triangulation. Triangles are counterclockwise after validation.
struct PrimalMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> region;
  std::optional<PeriodicBox> periodic;
  std::vector<Circle> circles;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  const Vec2& vertex(int tri, int k) const { return nodes[triangles[tri][k]]; }
  double signed_area(int tri) const;
  double area(int tri) const { return std::abs(signed_area(tri)); }
  Vec2 barycenter(int tri) const;
  double total_area() const;
  /// Mean over triangles of the longest edge.
  double characteristic_size() const;
  /// Radius of the inscribed circle of a (straight) triangle.
  double incircle_radius(int tri) const;
};

/// Checks indices, duplicates and degeneracy; flips clockwise triangles.
/// Throws MeshError naming the offending triangle.
void validate_and_orient(PrimalMesh& mesh);

/// Reads the native ASCII format or a Gmsh 2.2 ASCII file (detected from
/// the first token). Non-triangle Gmsh elements are skipped; a warning is
/// appended to `warnings` when given.
PrimalMesh read_mesh(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);
PrimalMesh parse_native_mesh(std::istream& in);
PrimalMesh parse_gmsh_mesh(std::istream& in, std::vector<std::string>* warnings = nullptr);
void write_native_mesh(const PrimalMesh& mesh, std::ostream& out);
void write_native_mesh(const PrimalMesh& mesh, const std::filesystem::path& path);

/// Edge-based connectivity of the primal mesh.
///
/// Every geometric edge gets an index. Interior edges carry a left and a
/// right triangle with left < right; the edge nodes are ordered
/// counterclockwise as seen from the left triangle and the unit normal points
/// from left to right. With periodicity both geometric copies of an
/// identified edge stay in the list, linked through `partner`; they share
/// left/right/normal, and each copy belongs to exactly one triangle.
struct EdgeConnectivity {
  std::vector<std::array<int, 2>> edges;
  std::vector<int> left;
  std::vector<int> right;  // kNone on boundary edges
  std::vector<int> partner;  // kNone unless periodic
  std::vector<Vec2> normal;
  std::vector<double> length;
  /// S_i: edge index of local edge k (vertex k -> vertex k+1) of triangle i.
  std::vector<std::array<int, 3>> tri_edges;
  std::vector<int> boundary;

  int num_edges() const { return static_cast<int>(edges.size()); }
  bool is_boundary(int j) const { return right[j] == kNone; }
  bool is_periodic(int j) const { return partner[j] != kNone; }
  /// Local edge number of j in triangle i, or kNone.
  int local_edge(int i, int j) const;
  /// The triangle across edge j from i (kNone on the boundary).
  int neighbor(int i, int j) const;
  /// s_{i,j} = (r - 2i + l) / (r - l); +1 on boundary edges.
  int sign(int i, int j) const;
  /// The edge copy that carries the dual cell (the one in the left triangle).
  int canonical(int j) const;
};

/// Builds the connectivity. `periodic` overrides `mesh.periodic` when given.
EdgeConnectivity build_connectivity(const PrimalMesh& mesh,
                                    const std::optional<PeriodicBox>& periodic = std::nullopt);

}  // namespace stdg
