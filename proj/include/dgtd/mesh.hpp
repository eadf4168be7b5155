#pragma once

// Conforming triangular meshes: generation, text I/O, connectivity and
// per-element geometry.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dgtd/errors.hpp"
#include "dgtd/reference_element.hpp"

namespace dgtd {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

using Triangle = std::array<int, 3>;

inline constexpr int kBoundary = -1;

/// Boundary labels per edge. A single condition is applied to all boundary
/// edges in the solver; the label is stored per edge.
enum class BoundaryLabel { kNone = 0, kOuter = 1 };

/// Affine map derivatives of the reference -> physical map on one element.
struct JacobianFactors {
  double rx = 0.0;
  double ry = 0.0;
  double sx = 0.0;
  double sy = 0.0;
  double det = 0.0;  // |T_k| / |reference triangle| = area / 2
};

struct FaceRef {
  int element = kBoundary;
  int face = -1;
};

/// Triangular mesh with derived connectivity and geometry. Face f of a
/// triangle joins its local vertices f and (f+1)%3, matching the reference
/// element face numbering.
struct Mesh2D {
  std::vector<Point2> vertices;
  std::vector<Triangle> triangles;

  // Filled by build_connectivity().
  std::vector<std::array<FaceRef, 3>> neighbor;
  std::vector<std::array<Point2, 3>> normals;
  std::vector<std::array<double, 3>> edge_length;
  std::vector<std::array<BoundaryLabel, 3>> boundary_label;
  std::vector<double> area;
  std::vector<JacobianFactors> jacobian;
  std::vector<double> h;    // diameter (longest edge)
  std::vector<double> tau;  // inscribed circle diameter
  std::vector<std::pair<int, int>> interior_faces;  // (element, face) with element < neighbor
  std::vector<std::pair<int, int>> boundary_faces;

  int element_count() const { return static_cast<int>(triangles.size()); }

  double h_min() const {
    double v = std::numeric_limits<double>::infinity();
    for (double hk : h) v = std::min(v, hk);
    return v;
  }
  double h_max() const {
    double v = 0.0;
    for (double hk : h) v = std::max(v, hk);
    return v;
  }
  double perimeter(int k) const { return edge_length[k][0] + edge_length[k][1] + edge_length[k][2]; }

  Point2 vertex(int k, int local) const { return vertices[triangles[k][local]]; }

  /// Physical coordinates of a reference point on element k.
  Point2 map_to_physical(int k, RefPoint p) const {
    const Point2 a = vertex(k, 0), b = vertex(k, 1), c = vertex(k, 2);
    const double l0 = -(p.r + p.s) / 2.0, l1 = (1.0 + p.r) / 2.0, l2 = (1.0 + p.s) / 2.0;
    return {l0 * a.x + l1 * b.x + l2 * c.x, l0 * a.y + l1 * b.y + l2 * c.y};
  }

  RefPoint map_to_reference(int k, Point2 p) const {
    const Point2 a = vertex(k, 0);
    const JacobianFactors& j = jacobian[k];
    const double dx = p.x - a.x, dy = p.y - a.y;
    return {-1.0 + j.rx * dx + j.ry * dy, -1.0 + j.sx * dx + j.sy * dy};
  }
};

inline double signed_area(Point2 a, Point2 b, Point2 c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

namespace detail {

inline std::pair<int, int> edge_key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

inline std::string element_name(int k) { return "triangle " + std::to_string(k); }

}  // namespace detail

/// Fills neighbor/normal/geometry data. Throws MeshError on degenerate or
/// inverted triangles, repeated triangles and non-manifold edges.
inline void build_connectivity(Mesh2D& mesh) {
  const int nk = mesh.element_count();
  const int nv = static_cast<int>(mesh.vertices.size());
  if (nk == 0) throw MeshError("mesh has no triangles");

  mesh.neighbor.assign(nk, {});
  mesh.normals.assign(nk, {});
  mesh.edge_length.assign(nk, {});
  mesh.boundary_label.assign(nk, {});
  mesh.area.assign(nk, 0.0);
  mesh.jacobian.assign(nk, {});
  mesh.h.assign(nk, 0.0);
  mesh.tau.assign(nk, 0.0);
  mesh.interior_faces.clear();
  mesh.boundary_faces.clear();

  std::map<std::array<int, 3>, int> seen;
  for (int k = 0; k < nk; ++k) {
    const Triangle& t = mesh.triangles[k];
    for (int v : t) {
      if (v < 0 || v >= nv) {
        throw MeshError(detail::element_name(k) + " references vertex " + std::to_string(v) + " out of range");
      }
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw MeshError(detail::element_name(k) + " repeats a vertex");
    }
    std::array<int, 3> sorted = t;
    std::sort(sorted.begin(), sorted.end());
    if (auto [it, inserted] = seen.emplace(sorted, k); !inserted) {
      throw MeshError(detail::element_name(k) + " duplicates triangle " + std::to_string(it->second));
    }

    const Point2 a = mesh.vertex(k, 0), b = mesh.vertex(k, 1), c = mesh.vertex(k, 2);
    const double area = signed_area(a, b, c);
    if (area <= 0.0) {
      throw MeshError(detail::element_name(k) + (area == 0.0 ? " is degenerate" : " is inverted (clockwise)"));
    }
    mesh.area[k] = area;

    const double xr = 0.5 * (b.x - a.x), yr = 0.5 * (b.y - a.y);
    const double xs = 0.5 * (c.x - a.x), ys = 0.5 * (c.y - a.y);
    const double det = xr * ys - xs * yr;
    mesh.jacobian[k] = {ys / det, -xs / det, -yr / det, xr / det, det};

    double hk = 0.0;
    for (int f = 0; f < 3; ++f) {
      const Point2 p = mesh.vertex(k, f), q = mesh.vertex(k, (f + 1) % 3);
      const double dx = q.x - p.x, dy = q.y - p.y;
      const double len = std::hypot(dx, dy);
      mesh.edge_length[k][f] = len;
      mesh.normals[k][f] = {dy / len, -dx / len};
      hk = std::max(hk, len);
    }
    mesh.h[k] = hk;
    mesh.tau[k] = 4.0 * area / mesh.perimeter(k);
  }

  std::map<std::pair<int, int>, std::vector<FaceRef>> edges;
  for (int k = 0; k < nk; ++k) {
    for (int f = 0; f < 3; ++f) {
      edges[detail::edge_key(mesh.triangles[k][f], mesh.triangles[k][(f + 1) % 3])].push_back({k, f});
    }
  }
  for (const auto& [key, owners] : edges) {
    if (owners.size() > 2) {
      throw MeshError("non-manifold edge (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                      ") shared by " + std::to_string(owners.size()) + " triangles");
    }
    if (owners.size() == 2) {
      const FaceRef a = owners[0], b = owners[1];
      // Consistently oriented neighbours traverse a shared edge in opposite directions.
      if (mesh.triangles[a.element][a.face] == mesh.triangles[b.element][b.face]) {
        throw MeshError("edge (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                        ") has inconsistent orientation between " + detail::element_name(a.element) + " and " +
                        detail::element_name(b.element));
      }
      mesh.neighbor[a.element][a.face] = b;
      mesh.neighbor[b.element][b.face] = a;
      const FaceRef lo = a.element < b.element ? a : b;
      mesh.interior_faces.emplace_back(lo.element, lo.face);
    } else {
      const FaceRef a = owners[0];
      mesh.neighbor[a.element][a.face] = {kBoundary, -1};
      mesh.boundary_label[a.element][a.face] = BoundaryLabel::kOuter;
      mesh.boundary_faces.emplace_back(a.element, a.face);
    }
  }
}

enum class Diagonal { kSouthWestNorthEast, kSouthEastNorthWest };

/// Uniform grid of n x n rectangles, each split into two triangles along the
/// same diagonal.
inline Mesh2D structured_square_mesh(int n_cells, double xmin, double xmax, double ymin, double ymax,
                                     Diagonal diagonal = Diagonal::kSouthWestNorthEast) {
  if (n_cells < 1) throw DomainError("structured mesh needs at least one cell per side");
  if (!(xmax > xmin) || !(ymax > ymin)) throw DomainError("structured mesh extents are degenerate");
  Mesh2D mesh;
  const double dx = (xmax - xmin) / n_cells, dy = (ymax - ymin) / n_cells;
  for (int j = 0; j <= n_cells; ++j) {
    for (int i = 0; i <= n_cells; ++i) {
      mesh.vertices.push_back({i == n_cells ? xmax : xmin + i * dx, j == n_cells ? ymax : ymin + j * dy});
    }
  }
  auto id = [n_cells](int i, int j) { return j * (n_cells + 1) + i; };
  for (int j = 0; j < n_cells; ++j) {
    for (int i = 0; i < n_cells; ++i) {
      const int sw = id(i, j), se = id(i + 1, j), nw = id(i, j + 1), ne = id(i + 1, j + 1);
      if (diagonal == Diagonal::kSouthWestNorthEast) {
        mesh.triangles.push_back({sw, se, ne});
        mesh.triangles.push_back({sw, ne, nw});
      } else {
        mesh.triangles.push_back({sw, se, nw});
        mesh.triangles.push_back({se, ne, nw});
      }
    }
  }
  build_connectivity(mesh);
  return mesh;
}

/// Builds a mesh from raw vertices/triangles. Clockwise triangles are
/// reoriented when `reorient` is set, otherwise rejected.
inline Mesh2D make_mesh(std::vector<Point2> vertices, std::vector<Triangle> triangles, bool reorient = false) {
  Mesh2D mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  if (reorient) {
    for (auto& t : mesh.triangles) {
      const auto nv = static_cast<int>(mesh.vertices.size());
      if (t[0] < 0 || t[1] < 0 || t[2] < 0 || t[0] >= nv || t[1] >= nv || t[2] >= nv) continue;
      if (signed_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) < 0.0) std::swap(t[1], t[2]);
    }
  }
  build_connectivity(mesh);
  return mesh;
}

inline constexpr const char* kMeshHeader = "dgtd-mesh v1";

inline void write_mesh(const Mesh2D& mesh, std::ostream& out) {
  out << kMeshHeader << '\n';
  out << "V " << mesh.vertices.size() << '\n';
  out << std::setprecision(17);
  for (const Point2& p : mesh.vertices) out << p.x << ' ' << p.y << '\n';
  out << "T " << mesh.triangles.size() << '\n';
  for (const Triangle& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

inline void save_mesh(const Mesh2D& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open mesh file for writing: " + path.string());
  write_mesh(mesh, out);
}

inline Mesh2D read_mesh(std::istream& in, bool reorient = false) {
  std::string line;
  if (!std::getline(in, line)) throw MeshError("empty mesh file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMeshHeader) throw MeshError("bad mesh header '" + line + "', expected '" + kMeshHeader + "'");

  auto read_count = [&in](char tag) {
    std::string t;
    long long count = -1;
    if (!(in >> t >> count) || t.size() != 1 || t[0] != tag || count < 0) {
      throw MeshError(std::string("expected '") + tag + " <count>' section");
    }
    return static_cast<std::size_t>(count);
  };

  std::vector<Point2> vertices(read_count('V'));
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!(in >> vertices[i].x >> vertices[i].y)) throw MeshError("malformed vertex " + std::to_string(i));
  }
  std::vector<Triangle> triangles(read_count('T'));
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    auto& t = triangles[i];
    if (!(in >> t[0] >> t[1] >> t[2])) throw MeshError("malformed " + detail::element_name(static_cast<int>(i)));
  }
  std::string trailing;
  if (in >> trailing) throw MeshError("unexpected trailing content '" + trailing + "'");
  return make_mesh(std::move(vertices), std::move(triangles), reorient);
}

inline Mesh2D load_mesh(const std::filesystem::path& path, bool reorient = false) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file: " + path.string());
  return read_mesh(in, reorient);
}

}  // namespace dgtd
