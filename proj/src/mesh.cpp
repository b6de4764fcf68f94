#include "stdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace stdg {

double PrimalMesh::signed_area(int tri) const {
  const Vec2& a = vertex(tri, 0);
  return 0.5 * cross2(vertex(tri, 1) - a, vertex(tri, 2) - a);
}

Vec2 PrimalMesh::barycenter(int tri) const {
  return (vertex(tri, 0) + vertex(tri, 1) + vertex(tri, 2)) / 3.0;
}

double PrimalMesh::total_area() const {
  double sum = 0.0;
  for (int i = 0; i < num_triangles(); ++i) sum += area(i);
  return sum;
}

double PrimalMesh::characteristic_size() const {
  if (triangles.empty()) return 0.0;
  double sum = 0.0;
  for (int i = 0; i < num_triangles(); ++i) {
    double longest = 0.0;
    for (int k = 0; k < 3; ++k)
      longest = std::max(longest, (vertex(i, (k + 1) % 3) - vertex(i, k)).norm());
    sum += longest;
  }
  return sum / num_triangles();
}

double PrimalMesh::incircle_radius(int tri) const {
  double perimeter = 0.0;
  for (int k = 0; k < 3; ++k) perimeter += (vertex(tri, (k + 1) % 3) - vertex(tri, k)).norm();
  return 2.0 * area(tri) / perimeter;
}

void validate_and_orient(PrimalMesh& mesh) {
  if (mesh.region.empty()) mesh.region.assign(mesh.triangles.size(), 0);
  if (mesh.region.size() != mesh.triangles.size())
    throw MeshError("region list length does not match triangle count");
  std::set<std::array<int, 3>> seen;
  double scale = 0.0;
  for (const auto& x : mesh.nodes) scale = std::max(scale, x.cwiseAbs().maxCoeff());
  scale = std::max(scale, 1e-300);
  for (int i = 0; i < mesh.num_triangles(); ++i) {
    auto& t = mesh.triangles[i];
    for (int k = 0; k < 3; ++k)
      if (t[k] < 0 || t[k] >= mesh.num_nodes())
        throw MeshError("triangle " + std::to_string(i) + " references node " +
                        std::to_string(t[k]) + " outside [0, " +
                        std::to_string(mesh.num_nodes()) + ")");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw MeshError("triangle " + std::to_string(i) + " repeats a node");
    auto key = t;
    std::sort(key.begin(), key.end());
    if (!seen.insert(key).second) throw MeshError("duplicate triangle " + std::to_string(i));
    const double a = mesh.signed_area(i);
    if (std::abs(a) <= 1e-14 * scale * scale)
      throw MeshError("degenerate (zero-area) triangle " + std::to_string(i));
    if (a < 0.0) std::swap(t[1], t[2]);
  }
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw MeshError("mesh parse error at line " + std::to_string(line) + ": " + what);
}

/// Line-oriented reader that tracks line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  /// Next non-empty, non-comment line; false at end of input.
  bool next(std::istringstream& out) {
    std::string s;
    while (std::getline(in_, s)) {
      ++line_;
      const auto pos = s.find_first_not_of(" \t\r");
      if (pos == std::string::npos || s[pos] == '#') continue;
      out.clear();
      out.str(s);
      return true;
    }
    return false;
  }
  int line() const { return line_; }

 private:
  std::istream& in_;
  int line_ = 0;
};

}  // namespace

PrimalMesh parse_native_mesh(std::istream& in) {
  PrimalMesh mesh;
  LineReader reader(in);
  std::istringstream ls;
  bool have_nodes = false, have_triangles = false;
  while (reader.next(ls)) {
    std::string keyword;
    ls >> keyword;
    if (keyword == "NODES") {
      int n = -1;
      if (!(ls >> n) || n < 0) parse_fail(reader.line(), "expected node count after NODES");
      mesh.nodes.resize(n);
      for (int k = 0; k < n; ++k) {
        if (!reader.next(ls)) parse_fail(reader.line(), "unexpected end of file in NODES");
        double x, y;
        if (!(ls >> x >> y)) parse_fail(reader.line(), "expected '<x> <y>'");
        mesh.nodes[k] = Vec2(x, y);
      }
      have_nodes = true;
    } else if (keyword == "TRIANGLES") {
      int m = -1;
      if (!(ls >> m) || m < 0) parse_fail(reader.line(), "expected triangle count after TRIANGLES");
      mesh.triangles.resize(m);
      mesh.region.resize(m);
      for (int k = 0; k < m; ++k) {
        if (!reader.next(ls)) parse_fail(reader.line(), "unexpected end of file in TRIANGLES");
        std::array<int, 3> t;
        int region = 0;
        if (!(ls >> t[0] >> t[1] >> t[2] >> region))
          parse_fail(reader.line(), "expected '<i1> <i2> <i3> <region_id>'");
        for (int c = 0; c < 3; ++c)
          if (t[c] < 0 || t[c] >= mesh.num_nodes())
            parse_fail(reader.line(), "triangle " + std::to_string(k) + " references node " +
                                          std::to_string(t[c]) + " beyond node count " +
                                          std::to_string(mesh.num_nodes()));
        mesh.triangles[k] = t;
        mesh.region[k] = region;
      }
      have_triangles = true;
    } else if (keyword == "PERIODIC") {
      std::string box;
      PeriodicBox pb;
      if (!(ls >> box >> pb.xmin >> pb.xmax >> pb.ymin >> pb.ymax) || box != "BOX")
        parse_fail(reader.line(), "expected 'PERIODIC BOX <xmin> <xmax> <ymin> <ymax>'");
      mesh.periodic = pb;
    } else if (keyword == "CIRCLE") {
      Circle c;
      if (!(ls >> c.center.x() >> c.center.y() >> c.radius) || c.radius <= 0.0)
        parse_fail(reader.line(), "expected 'CIRCLE <cx> <cy> <radius>'");
      mesh.circles.push_back(c);
    } else {
      parse_fail(reader.line(), "unknown keyword '" + keyword + "'");
    }
  }
  if (!have_nodes || !have_triangles) parse_fail(reader.line(), "missing NODES or TRIANGLES section");
  validate_and_orient(mesh);
  return mesh;
}

PrimalMesh parse_gmsh_mesh(std::istream& in, std::vector<std::string>* warnings) {
  PrimalMesh mesh;
  LineReader reader(in);
  std::istringstream ls;
  std::map<long, int> node_index;
  std::map<int, int> skipped;
  bool have_nodes = false, have_elements = false;
  while (reader.next(ls)) {
    std::string keyword;
    ls >> keyword;
    if (keyword == "$Nodes") {
      if (!reader.next(ls)) parse_fail(reader.line(), "missing node count");
      long n = -1;
      if (!(ls >> n) || n < 0) parse_fail(reader.line(), "bad node count");
      for (long k = 0; k < n; ++k) {
        if (!reader.next(ls)) parse_fail(reader.line(), "unexpected end of file in $Nodes");
        long id;
        double x, y, z;
        if (!(ls >> id >> x >> y >> z)) parse_fail(reader.line(), "expected '<id> <x> <y> <z>'");
        node_index[id] = mesh.num_nodes();
        mesh.nodes.emplace_back(x, y);
      }
      if (!reader.next(ls)) parse_fail(reader.line(), "missing $EndNodes");
      have_nodes = true;
    } else if (keyword == "$Elements") {
      if (!reader.next(ls)) parse_fail(reader.line(), "missing element count");
      long n = -1;
      if (!(ls >> n) || n < 0) parse_fail(reader.line(), "bad element count");
      for (long k = 0; k < n; ++k) {
        if (!reader.next(ls)) parse_fail(reader.line(), "unexpected end of file in $Elements");
        long id;
        int type, ntags;
        if (!(ls >> id >> type >> ntags)) parse_fail(reader.line(), "bad element header");
        std::vector<long> tags(ntags);
        for (auto& t : tags)
          if (!(ls >> t)) parse_fail(reader.line(), "bad element tags");
        if (type != 2) {
          ++skipped[type];
          continue;
        }
        std::array<int, 3> tri;
        for (int c = 0; c < 3; ++c) {
          long nid;
          if (!(ls >> nid)) parse_fail(reader.line(), "bad triangle node list");
          const auto it = node_index.find(nid);
          if (it == node_index.end())
            parse_fail(reader.line(), "element " + std::to_string(id) + " references unknown node " +
                                          std::to_string(nid));
          tri[c] = it->second;
        }
        mesh.triangles.push_back(tri);
        mesh.region.push_back(ntags > 0 ? static_cast<int>(tags[0]) : 0);
      }
      if (!reader.next(ls)) parse_fail(reader.line(), "missing $EndElements");
      have_elements = true;
    } else if (keyword == "$MeshFormat") {
      if (!reader.next(ls)) parse_fail(reader.line(), "missing format line");
      double version;
      ls >> version;
      if (version < 2.0 || version >= 3.0) parse_fail(reader.line(), "only Gmsh 2.x ASCII is supported");
      if (!reader.next(ls)) parse_fail(reader.line(), "missing $EndMeshFormat");
    } else if (!keyword.empty() && keyword[0] == '$') {
      // unknown section: skip to its end marker
      const std::string end = "$End" + keyword.substr(1);
      std::string tok;
      do {
        if (!reader.next(ls)) parse_fail(reader.line(), "unterminated section " + keyword);
        ls >> tok;
      } while (tok != end);
    } else {
      parse_fail(reader.line(), "unexpected content '" + keyword + "'");
    }
  }
  if (!have_nodes || !have_elements) parse_fail(reader.line(), "missing $Nodes or $Elements");
  if (warnings)
    for (const auto& [type, count] : skipped)
      warnings->push_back("ignored " + std::to_string(count) + " Gmsh element(s) of type " +
                          std::to_string(type));
  validate_and_orient(mesh);
  return mesh;
}

PrimalMesh read_mesh(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file " + path.string());
  std::string first;
  in >> first;
  in.clear();
  in.seekg(0);
  if (!first.empty() && first[0] == '$') return parse_gmsh_mesh(in, warnings);
  return parse_native_mesh(in);
}

void write_native_mesh(const PrimalMesh& mesh, std::ostream& out) {
  out << std::setprecision(17);
  out << "NODES " << mesh.num_nodes() << '\n';
  for (const auto& x : mesh.nodes) out << x.x() << ' ' << x.y() << '\n';
  out << "TRIANGLES " << mesh.num_triangles() << '\n';
  for (int i = 0; i < mesh.num_triangles(); ++i) {
    const auto& t = mesh.triangles[i];
    out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << mesh.region[i] << '\n';
  }
  if (mesh.periodic)
    out << "PERIODIC BOX " << mesh.periodic->xmin << ' ' << mesh.periodic->xmax << ' '
        << mesh.periodic->ymin << ' ' << mesh.periodic->ymax << '\n';
  for (const auto& c : mesh.circles)
    out << "CIRCLE " << c.center.x() << ' ' << c.center.y() << ' ' << c.radius << '\n';
}

void write_native_mesh(const PrimalMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write mesh file " + path.string());
  write_native_mesh(mesh, out);
}

// ---------------------------------------------------------------------------

int EdgeConnectivity::local_edge(int i, int j) const {
  for (int k = 0; k < 3; ++k)
    if (tri_edges[i][k] == j) return k;
  return kNone;
}

int EdgeConnectivity::neighbor(int i, int j) const {
  if (local_edge(i, j) == kNone)
    throw ContractError("edge " + std::to_string(j) + " is not an edge of triangle " + std::to_string(i));
  if (is_boundary(j)) return kNone;
  return i == left[j] ? right[j] : left[j];
}

int EdgeConnectivity::sign(int i, int j) const {
  if (local_edge(i, j) == kNone)
    throw ContractError("sign: edge " + std::to_string(j) + " is not in S_" + std::to_string(i));
  if (is_boundary(j)) return 1;
  return (right[j] - 2 * i + left[j]) / (right[j] - left[j]);
}

int EdgeConnectivity::canonical(int j) const {
  if (partner[j] == kNone) return j;
  return local_edge(left[j], j) != kNone ? j : partner[j];
}

namespace {

Vec2 right_normal(const Vec2& a, const Vec2& b) {
  const Vec2 t = b - a;
  return Vec2(t.y(), -t.x()) / t.norm();
}

}  // namespace

EdgeConnectivity build_connectivity(const PrimalMesh& mesh, const std::optional<PeriodicBox>& periodic_arg) {
  const auto periodic = periodic_arg ? periodic_arg : mesh.periodic;
  EdgeConnectivity conn;
  const int nt = mesh.num_triangles();
  conn.tri_edges.assign(nt, {kNone, kNone, kNone});

  // first triangle (and local edge) seen for each undirected node pair
  std::map<std::pair<int, int>, int> edge_of;
  for (int i = 0; i < nt; ++i) {
    for (int k = 0; k < 3; ++k) {
      const int a = mesh.triangles[i][k];
      const int b = mesh.triangles[i][(k + 1) % 3];
      const auto key = std::minmax(a, b);
      auto it = edge_of.find(key);
      if (it == edge_of.end()) {
        const int j = conn.num_edges();
        edge_of.emplace(key, j);
        conn.edges.push_back({a, b});
        conn.left.push_back(i);
        conn.right.push_back(kNone);
        conn.tri_edges[i][k] = j;
      } else {
        const int j = it->second;
        if (conn.right[j] != kNone)
          throw MeshError("non-manifold edge " + std::to_string(j) + " (nodes " + std::to_string(a) +
                          ", " + std::to_string(b) + ") shared by more than two triangles");
        conn.right[j] = i;
        conn.tri_edges[i][k] = j;
      }
    }
  }
  const int ne = conn.num_edges();
  conn.partner.assign(ne, kNone);

  if (periodic) {
    const PeriodicBox& box = *periodic;
    const double diameter = std::hypot(box.xmax - box.xmin, box.ymax - box.ymin);
    const double tol = 1e-9 * diameter;
    auto on = [&](int j, int axis, double value) {
      for (int n : conn.edges[j])
        if (std::abs(mesh.nodes[n][axis] - value) > tol) return false;
      return true;
    };
    // pair boundary edges on opposite sides by their sorted tangential coordinates
    for (int axis = 0; axis < 2; ++axis) {
      const double lo = axis == 0 ? box.xmin : box.ymin;
      const double hi = axis == 0 ? box.xmax : box.ymax;
      const int other = 1 - axis;
      std::vector<int> low_side, high_side;
      for (int j = 0; j < ne; ++j) {
        if (conn.right[j] != kNone) continue;
        if (on(j, axis, lo)) low_side.push_back(j);
        if (on(j, axis, hi)) high_side.push_back(j);
      }
      auto span = [&](int j) {
        double s0 = mesh.nodes[conn.edges[j][0]][other];
        double s1 = mesh.nodes[conn.edges[j][1]][other];
        return std::make_pair(std::min(s0, s1), std::max(s0, s1));
      };
      std::vector<bool> used(high_side.size(), false);
      for (int j : low_side) {
        const auto sj = span(j);
        int match = kNone;
        for (std::size_t m = 0; m < high_side.size(); ++m) {
          if (used[m]) continue;
          const auto sm = span(high_side[m]);
          if (std::abs(sm.first - sj.first) <= tol && std::abs(sm.second - sj.second) <= tol) {
            match = static_cast<int>(m);
            break;
          }
        }
        if (match == kNone)
          throw MeshError("periodic edge " + std::to_string(j) + " has no partner on the opposite side");
        used[match] = true;
        const int jj = high_side[match];
        conn.partner[j] = jj;
        conn.partner[jj] = j;
      }
      for (std::size_t m = 0; m < high_side.size(); ++m)
        if (!used[m])
          throw MeshError("periodic edge " + std::to_string(high_side[m]) +
                          " has no partner on the opposite side");
    }
    // resolve left/right across each pair
    for (int j = 0; j < ne; ++j) {
      const int jj = conn.partner[j];
      if (jj == kNone || jj < j) continue;
      const int t1 = conn.left[j];
      const int t2 = conn.left[jj];
      if (t1 == t2)
        throw MeshError("periodic edges " + std::to_string(j) + " and " + std::to_string(jj) +
                        " belong to the same triangle " + std::to_string(t1));
      const int l = std::min(t1, t2);
      const int r = std::max(t1, t2);
      for (int e : {j, jj}) {
        conn.left[e] = l;
        conn.right[e] = r;
      }
      // the copy in r is stored reversed so both copies read left-counterclockwise
      const int in_r = (t1 == r) ? j : jj;
      std::swap(conn.edges[in_r][0], conn.edges[in_r][1]);
    }
  }

  for (int j = 0; j < ne; ++j) {
    // orient every edge counterclockwise with respect to its left triangle
    const int l = conn.left[j];
    const int owner_local = conn.local_edge(l, j);
    if (owner_local != kNone) {
      conn.edges[j] = {mesh.triangles[l][owner_local], mesh.triangles[l][(owner_local + 1) % 3]};
    }
    const auto& e = conn.edges[j];
    conn.normal.push_back(right_normal(mesh.nodes[e[0]], mesh.nodes[e[1]]));
    conn.length.push_back((mesh.nodes[e[1]] - mesh.nodes[e[0]]).norm());
    if (conn.right[j] == kNone) conn.boundary.push_back(j);
  }
  return conn;
}

}  // namespace stdg
