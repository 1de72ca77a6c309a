#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "test_helpers.hpp"
#include "twophase/mesh.hpp"
#include "twophase/problems.hpp"

using namespace twophase;

namespace {

void check_invariants(const TriMesh& mesh, double expected_area) {
  for (int t = 0; t < mesh.num_triangles(); ++t)
    REQUIRE(mesh.triangle_area(t) > 0.0);

  REQUIRE(mesh.num_nodes() - mesh.num_edges() + mesh.num_triangles() == 1);

  // Interior edges: two incident triangles with opposite orientation signs;
  // boundary edges: exactly one triangle.
  std::vector<int> count(mesh.num_edges(), 0);
  std::vector<int> sign_sum(mesh.num_edges(), 0);
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) {
      count[mesh.triangle_edges[t][k]] += 1;
      sign_sum[mesh.triangle_edges[t][k]] += mesh.triangle_edge_signs[t][k];
    }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    REQUIRE((count[e] == 1 || count[e] == 2));
    if (count[e] == 2) REQUIRE(sign_sum[e] == 0);
  }

  REQUIRE_THAT(total_area(mesh),
               Catch::Matchers::WithinRel(expected_area, 1e-12));
}

bool coordinates_nested(const TriMesh& coarse, const TriMesh& fine) {
  std::set<std::pair<double, double>> fine_coords;
  for (const auto& p : fine.vertices) fine_coords.insert({p.x(), p.y()});
  return std::all_of(coarse.vertices.begin(), coarse.vertices.end(),
                     [&](const Eigen::Vector2d& p) {
                       return fine_coords.count({p.x(), p.y()}) == 1;
                     });
}

}  // namespace

TEST_CASE("initial mesh counts and invariants") {
  SECTION("benchmark strip, 4x2 diagonal") {
    const TriMesh m =
        build_initial_mesh(Rect{-1.0, 1.0, 0.0, 1.0}, 4, 2, SplitPattern::Diagonal);
    REQUIRE(m.num_nodes() == 15);
    REQUIRE(m.num_triangles() == 16);
    REQUIRE(m.num_edges() == 30);
    check_invariants(m, 2.0);
  }
  SECTION("benchmark square, 2x2 criss-cross") {
    const TriMesh m = build_initial_mesh(Rect{-1.0, 1.0, -1.0, 1.0}, 2, 2,
                                         SplitPattern::CrissCross);
    REQUIRE(m.num_nodes() == 13);
    REQUIRE(m.num_triangles() == 16);
    REQUIRE(m.num_edges() == 28);
    check_invariants(m, 4.0);
  }
  SECTION("smallest diagonal split") {
    const TriMesh m =
        build_initial_mesh(Rect{0.0, 1.0, 0.0, 1.0}, 1, 1, SplitPattern::Diagonal);
    REQUIRE(m.num_nodes() == 4);
    REQUIRE(m.num_triangles() == 2);
    REQUIRE(m.num_edges() == 5);
  }
  SECTION("zero cell count rejected") {
    REQUIRE_THROWS_AS(
        build_initial_mesh(Rect{0.0, 1.0, 0.0, 1.0}, 0, 1, SplitPattern::Diagonal),
        std::invalid_argument);
  }
  SECTION("degenerate rectangle rejected") {
    REQUIRE_THROWS_AS(
        build_initial_mesh(Rect{0.0, 0.0, 0.0, 1.0}, 1, 1, SplitPattern::Diagonal),
        std::invalid_argument);
  }
}

TEST_CASE("red refinement") {
  SECTION("node growth |N| + |E| and table hierarchies") {
    TriMesh m =
        build_initial_mesh(Rect{-1.0, 1.0, 0.0, 1.0}, 4, 2, SplitPattern::Diagonal);
    const std::vector<int> expected_nodes{15, 45, 153, 561, 2145};
    for (std::size_t level = 1; level < expected_nodes.size(); ++level) {
      const int nodes = m.num_nodes();
      const int edges = m.num_edges();
      const int tris = m.num_triangles();
      const TriMesh fine = refine_red(m);
      REQUIRE(fine.num_nodes() == nodes + edges);
      REQUIRE(fine.num_triangles() == 4 * tris);
      REQUIRE(fine.num_nodes() == expected_nodes[level]);
      REQUIRE(coordinates_nested(m, fine));
      check_invariants(fine, 2.0);
      m = fine;
    }
  }
  SECTION("criss-cross hierarchy matches the square benchmark") {
    TriMesh m = build_initial_mesh(Rect{-1.0, 1.0, -1.0, 1.0}, 2, 2,
                                   SplitPattern::CrissCross);
    const std::vector<int> expected_nodes{13, 41, 145, 545, 2113, 8321};
    for (std::size_t level = 1; level < expected_nodes.size(); ++level) {
      m = refine_red(m);
      REQUIRE(m.num_nodes() == expected_nodes[level]);
    }
    check_invariants(m, 4.0);
  }
  SECTION("single triangle") {
    const TriMesh fine = refine_red(test_helpers::unit_right_triangle());
    REQUIRE(fine.num_triangles() == 4);
    REQUIRE(fine.num_nodes() == 6);
    REQUIRE(fine.num_edges() == 9);
  }
}

TEST_CASE("boundary classification") {
  auto example1_regions = [] {
    auto dirichlet = [](const Eigen::Vector2d& p) {
      return std::abs(std::abs(p.x()) - 1.0) <= 1e-12;
    };
    auto neumann = [](const Eigen::Vector2d& p) {
      return std::abs(p.y()) <= 1e-12 || std::abs(p.y() - 1.0) <= 1e-12;
    };
    return std::make_pair(dirichlet, neumann);
  };

  SECTION("strip benchmark: 6 Dirichlet nodes at level 1") {
    const auto [dirichlet, neumann] = example1_regions();
    const TriMesh m = classify_boundary(
        build_initial_mesh(Rect{-1.0, 1.0, 0.0, 1.0}, 4, 2, SplitPattern::Diagonal),
        dirichlet, neumann);
    const int n_dirichlet = static_cast<int>(
        std::count(m.node_tag.begin(), m.node_tag.end(), NodeTag::Dirichlet));
    const int n_neumann = static_cast<int>(
        std::count(m.node_tag.begin(), m.node_tag.end(), NodeTag::Neumann));
    REQUIRE(n_dirichlet == 6);
    REQUIRE(n_neumann == 6);  // non-corner nodes of the horizontal sides
  }
  SECTION("square benchmark: 8 Dirichlet, 5 interior") {
    const TriMesh m = classify_boundary(
        build_initial_mesh(Rect{-1.0, 1.0, -1.0, 1.0}, 2, 2, SplitPattern::CrissCross),
        [](const Eigen::Vector2d&) { return true; }, nullptr);
    REQUIRE(std::count(m.node_tag.begin(), m.node_tag.end(), NodeTag::Dirichlet) == 8);
    REQUIRE(std::count(m.node_tag.begin(), m.node_tag.end(), NodeTag::Interior) == 5);
  }
  SECTION("all-Dirichlet predicate leaves no Neumann entities") {
    const TriMesh m = classify_boundary(
        build_initial_mesh(Rect{0.0, 1.0, 0.0, 1.0}, 2, 2, SplitPattern::Diagonal),
        [](const Eigen::Vector2d&) { return true; },
        [](const Eigen::Vector2d&) { return true; });
    REQUIRE(std::count(m.node_tag.begin(), m.node_tag.end(), NodeTag::Neumann) == 0);
    REQUIRE(std::count(m.edge_tag.begin(), m.edge_tag.end(),
                       EdgeTag::NeumannBoundary) == 0);
  }
  SECTION("unmatched boundary edge is a configuration error") {
    REQUIRE_THROWS_AS(
        classify_boundary(
            build_initial_mesh(Rect{0.0, 1.0, 0.0, 1.0}, 1, 1, SplitPattern::Diagonal),
            [](const Eigen::Vector2d& p) { return p.x() <= 0.5; }, nullptr),
        std::runtime_error);
  }
  SECTION("tags are inherited through refinement") {
    const auto [dirichlet, neumann] = example1_regions();
    TriMesh m = classify_boundary(
        build_initial_mesh(Rect{-1.0, 1.0, 0.0, 1.0}, 4, 2, SplitPattern::Diagonal),
        dirichlet, neumann);
    m = refine_red(m);
    const TriMesh reference = classify_boundary(m, dirichlet, neumann);
    REQUIRE(m.node_tag == reference.node_tag);
    REQUIRE(m.edge_tag == reference.edge_tag);
  }
}
