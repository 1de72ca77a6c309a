#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace twophase {

enum class NodeTag { Interior, Dirichlet, Neumann };
enum class EdgeTag { Interior, DirichletBoundary, NeumannBoundary };

/// How each cell of the structured grid is cut into triangles.
enum class SplitPattern {
  Diagonal,   // 2 triangles per cell, diagonal from lower-left to upper-right
  CrissCross  // 4 triangles per cell around an added center node
};

struct Rect {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
};

/// Conforming triangulation with node/edge/triangle incidence.
///
/// Triangles are counterclockwise. Edges store the smaller vertex index
/// first and are enumerated in lexicographic order of their index pairs.
/// Each triangle knows its three edges (edge k opposite vertex k) together
/// with an orientation sign: +1 when the edge's fixed global normal (the
/// 90-degree counterclockwise rotation of the vector from the smaller to
/// the larger vertex index) coincides with the triangle's outward normal.
struct TriMesh {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> triangle_edges;
  std::vector<std::array<int, 3>> triangle_edge_signs;
  std::vector<NodeTag> node_tag;
  std::vector<EdgeTag> edge_tag;

  int num_nodes() const { return static_cast<int>(vertices.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  double triangle_area(int t) const {
    const auto& tri = triangles[t];
    const Eigen::Vector2d a = vertices[tri[1]] - vertices[tri[0]];
    const Eigen::Vector2d b = vertices[tri[2]] - vertices[tri[0]];
    return 0.5 * (a.x() * b.y() - a.y() * b.x());
  }

  double edge_length(int e) const {
    return (vertices[edges[e][1]] - vertices[edges[e][0]]).norm();
  }

  Eigen::Vector2d centroid(int t) const {
    const auto& tri = triangles[t];
    return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
  }

  /// Number of triangles incident to each edge (1 = boundary, 2 = interior).
  std::vector<int> edge_incidence() const {
    std::vector<int> count(edges.size(), 0);
    for (const auto& te : triangle_edges)
      for (int e : te) ++count[e];
    return count;
  }
};

namespace detail {

// Derives edges, triangle->edge incidence and orientation signs from the
// triangle list. Edge numbering is lexicographic in the (min,max) pairs.
inline void build_edge_incidence(TriMesh& mesh) {
  std::vector<std::array<int, 2>> pairs;
  pairs.reserve(mesh.triangles.size() * 3);
  for (const auto& tri : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const int p = tri[(k + 1) % 3];
      const int q = tri[(k + 2) % 3];
      pairs.push_back({std::min(p, q), std::max(p, q)});
    }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  mesh.edges = std::move(pairs);

  auto edge_index = [&mesh](int a, int b) {
    const std::array<int, 2> key{std::min(a, b), std::max(a, b)};
    const auto it = std::lower_bound(mesh.edges.begin(), mesh.edges.end(), key);
    return static_cast<int>(it - mesh.edges.begin());
  };

  mesh.triangle_edges.assign(mesh.triangles.size(), {});
  mesh.triangle_edge_signs.assign(mesh.triangles.size(), {});
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      // Directed traversal p->q of the edge opposite vertex k; for a
      // counterclockwise triangle the outward normal matches the global
      // normal exactly when the traversal runs from the larger index to
      // the smaller one.
      const int p = tri[(k + 1) % 3];
      const int q = tri[(k + 2) % 3];
      mesh.triangle_edges[t][k] = edge_index(p, q);
      mesh.triangle_edge_signs[t][k] = (p < q) ? -1 : 1;
    }
  }
}

// Default tagging: boundary entities Dirichlet, everything else interior.
inline void tag_boundary_dirichlet(TriMesh& mesh) {
  const std::vector<int> incidence = mesh.edge_incidence();
  mesh.edge_tag.assign(mesh.edges.size(), EdgeTag::Interior);
  mesh.node_tag.assign(mesh.vertices.size(), NodeTag::Interior);
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    if (incidence[e] != 1) continue;
    mesh.edge_tag[e] = EdgeTag::DirichletBoundary;
    mesh.node_tag[mesh.edges[e][0]] = NodeTag::Dirichlet;
    mesh.node_tag[mesh.edges[e][1]] = NodeTag::Dirichlet;
  }
}

}  // namespace detail

/// Builds a mesh from explicit vertex coordinates and CCW triangles.
/// Boundary entities are tagged Dirichlet by default; use classify_boundary
/// to retag.
inline TriMesh build_mesh(std::vector<Eigen::Vector2d> vertices,
                          std::vector<std::array<int, 3>> triangles) {
  TriMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  for (int t = 0; t < mesh.num_triangles(); ++t)
    if (!(mesh.triangle_area(t) > 0.0))
      throw std::invalid_argument("build_mesh: triangle " + std::to_string(t) +
                                  " is degenerate or clockwise");
  detail::build_edge_incidence(mesh);
  detail::tag_boundary_dirichlet(mesh);
  return mesh;
}

/// Uniform structured triangulation of a rectangle. Grid nodes are numbered
/// row-major (x fastest); CrissCross center nodes follow, one per cell.
inline TriMesh build_initial_mesh(const Rect& rect, int nx, int ny,
                                  SplitPattern pattern) {
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("build_initial_mesh: cell counts must be >= 1");
  if (!(rect.width() > 0.0) || !(rect.height() > 0.0))
    throw std::invalid_argument("build_initial_mesh: degenerate rectangle");

  const double hx = rect.width() / nx;
  const double hy = rect.height() / ny;

  std::vector<Eigen::Vector2d> vertices;
  vertices.reserve((nx + 1) * (ny + 1) +
                   (pattern == SplitPattern::CrissCross ? nx * ny : 0));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      vertices.emplace_back(rect.xmin + i * hx, rect.ymin + j * hy);

  auto grid = [nx](int i, int j) { return j * (nx + 1) + i; };

  std::vector<std::array<int, 3>> triangles;
  if (pattern == SplitPattern::Diagonal) {
    triangles.reserve(2 * nx * ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const int v00 = grid(i, j), v10 = grid(i + 1, j);
        const int v01 = grid(i, j + 1), v11 = grid(i + 1, j + 1);
        triangles.push_back({v00, v10, v11});
        triangles.push_back({v00, v11, v01});
      }
  } else {
    const int ngrid = (nx + 1) * (ny + 1);
    triangles.reserve(4 * nx * ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        vertices.emplace_back(rect.xmin + (i + 0.5) * hx,
                              rect.ymin + (j + 0.5) * hy);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const int c = ngrid + j * nx + i;
        const int v00 = grid(i, j), v10 = grid(i + 1, j);
        const int v01 = grid(i, j + 1), v11 = grid(i + 1, j + 1);
        triangles.push_back({v00, v10, c});
        triangles.push_back({v10, v11, c});
        triangles.push_back({v11, v01, c});
        triangles.push_back({v01, v00, c});
      }
  }
  return build_mesh(std::move(vertices), std::move(triangles));
}

/// Red refinement: every triangle is split into 4 congruent children through
/// its edge midpoints. Node and edge tags are inherited (the midpoint of a
/// tagged boundary edge carries that tag).
inline TriMesh refine_red(const TriMesh& mesh) {
  const int old_nodes = mesh.num_nodes();

  TriMesh fine;
  fine.vertices = mesh.vertices;
  fine.vertices.reserve(old_nodes + mesh.num_edges());
  fine.node_tag = mesh.node_tag;
  fine.node_tag.reserve(old_nodes + mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    fine.vertices.emplace_back(
        0.5 * (mesh.vertices[mesh.edges[e][0]] + mesh.vertices[mesh.edges[e][1]]));
    switch (mesh.edge_tag[e]) {
      case EdgeTag::DirichletBoundary: fine.node_tag.push_back(NodeTag::Dirichlet); break;
      case EdgeTag::NeumannBoundary: fine.node_tag.push_back(NodeTag::Neumann); break;
      default: fine.node_tag.push_back(NodeTag::Interior); break;
    }
  }

  fine.triangles.reserve(4 * mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const auto& te = mesh.triangle_edges[t];
    const int m0 = old_nodes + te[0];  // midpoint opposite vertex 0
    const int m1 = old_nodes + te[1];
    const int m2 = old_nodes + te[2];
    fine.triangles.push_back({tri[0], m2, m1});
    fine.triangles.push_back({m2, tri[1], m0});
    fine.triangles.push_back({m1, m0, tri[2]});
    fine.triangles.push_back({m2, m0, m1});
  }

  detail::build_edge_incidence(fine);

  // A child edge with exactly one midpoint endpoint lies on that midpoint's
  // parent edge and inherits its tag; midpoint-midpoint edges are interior.
  fine.edge_tag.assign(fine.edges.size(), EdgeTag::Interior);
  for (std::size_t e = 0; e < fine.edges.size(); ++e) {
    const int a = fine.edges[e][0];
    const int b = fine.edges[e][1];
    if (a < old_nodes && b >= old_nodes)
      fine.edge_tag[e] = mesh.edge_tag[b - old_nodes];
  }
  return fine;
}

/// Retags boundary entities from geometric region predicates (closure
/// membership of both edge endpoints). Dirichlet wins on nodes where the
/// two region closures meet.
inline TriMesh classify_boundary(
    TriMesh mesh, const std::function<bool(const Eigen::Vector2d&)>& dirichlet_region,
    const std::function<bool(const Eigen::Vector2d&)>& neumann_region) {
  const std::vector<int> incidence = mesh.edge_incidence();
  mesh.edge_tag.assign(mesh.edges.size(), EdgeTag::Interior);
  mesh.node_tag.assign(mesh.vertices.size(), NodeTag::Interior);

  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    if (incidence[e] != 1) continue;
    const Eigen::Vector2d& a = mesh.vertices[mesh.edges[e][0]];
    const Eigen::Vector2d& b = mesh.vertices[mesh.edges[e][1]];
    if (dirichlet_region(a) && dirichlet_region(b)) {
      mesh.edge_tag[e] = EdgeTag::DirichletBoundary;
    } else if (neumann_region && neumann_region(a) && neumann_region(b)) {
      mesh.edge_tag[e] = EdgeTag::NeumannBoundary;
    } else {
      throw std::runtime_error(
          "classify_boundary: boundary edge matched by no region predicate");
    }
  }
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    if (mesh.edge_tag[e] != EdgeTag::NeumannBoundary) continue;
    mesh.node_tag[mesh.edges[e][0]] = NodeTag::Neumann;
    mesh.node_tag[mesh.edges[e][1]] = NodeTag::Neumann;
  }
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    if (mesh.edge_tag[e] != EdgeTag::DirichletBoundary) continue;
    mesh.node_tag[mesh.edges[e][0]] = NodeTag::Dirichlet;
    mesh.node_tag[mesh.edges[e][1]] = NodeTag::Dirichlet;
  }
  return mesh;
}

inline double total_area(const TriMesh& mesh) {
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) sum += mesh.triangle_area(t);
  return sum;
}

}  // namespace twophase
