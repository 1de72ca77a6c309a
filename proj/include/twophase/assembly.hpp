#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "twophase/mesh.hpp"

namespace twophase {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Continuous piecewise-linear function, one value per mesh node.
struct P1Field {
  Eigen::VectorXd values;

  P1Field() = default;
  explicit P1Field(Eigen::VectorXd v) : values(std::move(v)) {}
  static P1Field zeros(int n) { return P1Field(Eigen::VectorXd::Zero(n)); }
  int size() const { return static_cast<int>(values.size()); }
};

/// Elementwise-constant function, one value per triangle.
struct P0Field {
  Eigen::VectorXd values;

  P0Field() = default;
  explicit P0Field(Eigen::VectorXd v) : values(std::move(v)) {}
  static P0Field zeros(int n) { return P0Field(Eigen::VectorXd::Zero(n)); }
  int size() const { return static_cast<int>(values.size()); }
};

/// Lowest-order Raviart-Thomas field: signed normal flux per edge, taken
/// with respect to the edge's fixed global normal.
struct RT0Field {
  Eigen::VectorXd coefficients;

  RT0Field() = default;
  explicit RT0Field(Eigen::VectorXd c) : coefficients(std::move(c)) {}
  static RT0Field zeros(int n) { return RT0Field(Eigen::VectorXd::Zero(n)); }
  int size() const { return static_cast<int>(coefficients.size()); }
};

/// Per-triangle geometry used throughout assembly: vertex coordinates,
/// area, and the (constant) gradients of the three P1 hat functions.
struct TriGeometry {
  std::array<Eigen::Vector2d, 3> p;
  double area = 0.0;
  std::array<Eigen::Vector2d, 3> grad;
};

inline TriGeometry triangle_geometry(const TriMesh& mesh, int t) {
  TriGeometry g;
  const auto& tri = mesh.triangles[t];
  for (int k = 0; k < 3; ++k) g.p[k] = mesh.vertices[tri[k]];
  g.area = mesh.triangle_area(t);
  if (!(g.area > 0.0))
    throw std::runtime_error("assembly: degenerate triangle " + std::to_string(t));
  for (int k = 0; k < 3; ++k) {
    const Eigen::Vector2d d = g.p[(k + 2) % 3] - g.p[(k + 1) % 3];
    g.grad[k] = Eigen::Vector2d(-d.y(), d.x()) / (2.0 * g.area);
  }
  return g;
}

inline Eigen::Vector2d p1_gradient_on(const TriMesh& mesh, const P1Field& v, int t) {
  const TriGeometry g = triangle_geometry(mesh, t);
  const auto& tri = mesh.triangles[t];
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  for (int k = 0; k < 3; ++k) grad += v.values[tri[k]] * g.grad[k];
  return grad;
}

/// Value of an RT0 field at a point of triangle t. The local basis for the
/// edge opposite vertex k is sign * |E|/(2|T|) * (x - p_k).
inline Eigen::Vector2d rt0_value_at(const TriMesh& mesh, const RT0Field& eta, int t,
                                    const Eigen::Vector2d& x) {
  const TriGeometry g = triangle_geometry(mesh, t);
  Eigen::Vector2d value = Eigen::Vector2d::Zero();
  for (int k = 0; k < 3; ++k) {
    const int e = mesh.triangle_edges[t][k];
    const double s = mesh.triangle_edge_signs[t][k];
    const double len = mesh.edge_length(e);
    value += eta.coefficients[e] * s * len / (2.0 * g.area) * (x - g.p[k]);
  }
  return value;
}

/// P1 stiffness matrix: v^T K w = integral of grad(v).grad(w).
inline SparseMatrix p1_stiffness(const TriMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.num_triangles() * 9);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const TriGeometry g = triangle_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trips.emplace_back(tri[i], tri[j], g.area * g.grad[i].dot(g.grad[j]));
  }
  SparseMatrix K(mesh.num_nodes(), mesh.num_nodes());
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

/// Rectangular P1-P0 mass matrix: v^T M mu = integral of v*mu. Entry (i,T)
/// is |T|/3 when node i belongs to triangle T.
inline SparseMatrix p1_p0_mass(const TriMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.num_triangles() * 3);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double third = mesh.triangle_area(t) / 3.0;
    for (int k = 0; k < 3; ++k)
      trips.emplace_back(mesh.triangles[t][k], t, third);
  }
  SparseMatrix M(mesh.num_nodes(), mesh.num_triangles());
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

/// RT0 mass matrix, assembled with the 3-point edge-midpoint rule (exact
/// for the quadratic integrand).
inline SparseMatrix rt0_mass(const TriMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.num_triangles() * 9);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const TriGeometry g = triangle_geometry(mesh, t);
    std::array<Eigen::Vector2d, 3> mid;
    for (int k = 0; k < 3; ++k) mid[k] = 0.5 * (g.p[(k + 1) % 3] + g.p[(k + 2) % 3]);

    std::array<std::array<Eigen::Vector2d, 3>, 3> psi;  // psi[basis][quad point]
    for (int k = 0; k < 3; ++k) {
      const double s = mesh.triangle_edge_signs[t][k];
      const double len = mesh.edge_length(mesh.triangle_edges[t][k]);
      const double scale = s * len / (2.0 * g.area);
      for (int m = 0; m < 3; ++m) psi[k][m] = scale * (mid[m] - g.p[k]);
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (int m = 0; m < 3; ++m) acc += psi[i][m].dot(psi[j][m]);
        trips.emplace_back(mesh.triangle_edges[t][i], mesh.triangle_edges[t][j],
                           g.area / 3.0 * acc);
      }
  }
  SparseMatrix M(mesh.num_edges(), mesh.num_edges());
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

/// RT0 div-div matrix; divergences are elementwise constant, so the local
/// entries are sign_i*sign_j*|E_i|*|E_j|/|T|.
inline SparseMatrix rt0_divdiv(const TriMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.num_triangles() * 9);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double area = mesh.triangle_area(t);
    if (!(area > 0.0))
      throw std::runtime_error("assembly: degenerate triangle " + std::to_string(t));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double si = mesh.triangle_edge_signs[t][i];
        const double sj = mesh.triangle_edge_signs[t][j];
        const double li = mesh.edge_length(mesh.triangle_edges[t][i]);
        const double lj = mesh.edge_length(mesh.triangle_edges[t][j]);
        trips.emplace_back(mesh.triangle_edges[t][i], mesh.triangle_edges[t][j],
                           si * sj * li * lj / area);
      }
  }
  SparseMatrix K(mesh.num_edges(), mesh.num_edges());
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

/// c_i = integral of grad(v).psi_i; uses the exact identity
/// integral_T (x - p) dx = |T| (centroid - p).
inline Eigen::VectorXd rt0_flux_load(const TriMesh& mesh, const P1Field& v) {
  if (v.size() != mesh.num_nodes())
    throw std::invalid_argument("rt0_flux_load: field size mismatch");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(mesh.num_edges());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::Vector2d grad = p1_gradient_on(mesh, v, t);
    const Eigen::Vector2d xc = mesh.centroid(t);
    const TriGeometry g = triangle_geometry(mesh, t);
    for (int k = 0; k < 3; ++k) {
      const int e = mesh.triangle_edges[t][k];
      const double s = mesh.triangle_edge_signs[t][k];
      const double len = mesh.edge_length(e);
      c[e] += s * len / 2.0 * grad.dot(xc - g.p[k]);
    }
  }
  return c;
}

/// d_i = integral of mu * div(psi_i) = sum over triangles of mu_T*sign*|E|.
inline Eigen::VectorXd rt0_div_load(const TriMesh& mesh, const P0Field& mu) {
  if (mu.size() != mesh.num_triangles())
    throw std::invalid_argument("rt0_div_load: field size mismatch");
  Eigen::VectorXd d = Eigen::VectorXd::Zero(mesh.num_edges());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) {
      const int e = mesh.triangle_edges[t][k];
      const double s = mesh.triangle_edge_signs[t][k];
      d[e] += mu.values[t] * s * mesh.edge_length(e);
    }
  return d;
}

/// Elementwise divergence of an RT0 field (exact; constant per triangle).
inline P0Field rt0_divergence(const TriMesh& mesh, const RT0Field& eta) {
  Eigen::VectorXd div(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    double acc = 0.0;
    for (int k = 0; k < 3; ++k) {
      const int e = mesh.triangle_edges[t][k];
      acc += mesh.triangle_edge_signs[t][k] * mesh.edge_length(e) *
             eta.coefficients[e];
    }
    div[t] = acc / mesh.triangle_area(t);
  }
  return P0Field(std::move(div));
}

struct PosNegIntegrals {
  double pos = 0.0;
  double neg = 0.0;
};

/// Exact integrals of max(v,0) and max(-v,0) over a triangle for the linear
/// interpolant of the given nodal values.
///
/// Mixed-sign triples are split along the zero level line: the vertex whose
/// strict sign is unique spans a sub-triangle with barycentric edge crossings
/// t = a/(a-b), and the complementary part follows from the exact identity
/// pos - neg = area * mean. Nodal values below 1e-14 of the triple's scale
/// are snapped to zero to avoid sliver sub-triangles.
inline PosNegIntegrals pos_neg_part_integrals(const std::array<double, 3>& nodal_values,
                                              double area) {
  if (!(area > 0.0))
    throw std::invalid_argument("pos_neg_part_integrals: area must be positive");

  std::array<double, 3> v = nodal_values;
  const double scale =
      std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
  for (double& x : v)
    if (std::abs(x) <= 1e-14 * scale) x = 0.0;

  const double mean_integral = area * (v[0] + v[1] + v[2]) / 3.0;
  int npos = 0, nneg = 0;
  for (double x : v) {
    if (x > 0.0) ++npos;
    if (x < 0.0) ++nneg;
  }
  if (nneg == 0) return {mean_integral, 0.0};
  if (npos == 0) return {0.0, -mean_integral};

  // Apex = the vertex whose strict sign occurs once.
  int apex = -1;
  const bool positive_apex = (npos == 1);
  for (int k = 0; k < 3; ++k) {
    if (positive_apex && v[k] > 0.0) apex = k;
    if (!positive_apex && v[k] < 0.0) apex = k;
  }
  const double a = v[apex];
  const double b = v[(apex + 1) % 3];
  const double c = v[(apex + 2) % 3];
  const double tb = a / (a - b);
  const double tc = a / (a - c);
  const double wedge = area * tb * tc * std::abs(a) / 3.0;

  PosNegIntegrals result;
  if (positive_apex) {
    result.pos = wedge;
    result.neg = wedge - mean_integral;
  } else {
    result.neg = wedge;
    result.pos = wedge + mean_integral;
  }
  return result;
}

/// Primal energy J(v) = 1/2 |grad v|^2 + alpha+ v^+ + alpha- v^-, with the
/// nondifferentiable terms integrated exactly.
inline double primal_energy(const TriMesh& mesh, const P1Field& v,
                            double alpha_plus, double alpha_minus) {
  if (v.size() != mesh.num_nodes())
    throw std::invalid_argument("primal_energy: field size mismatch");
  double energy = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const TriGeometry g = triangle_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    for (int k = 0; k < 3; ++k) grad += v.values[tri[k]] * g.grad[k];
    const PosNegIntegrals pn = pos_neg_part_integrals(
        {v.values[tri[0]], v.values[tri[1]], v.values[tri[2]]}, g.area);
    energy += 0.5 * g.area * grad.squaredNorm() + alpha_plus * pn.pos +
              alpha_minus * pn.neg;
  }
  return energy;
}

struct CompoundTerms {
  double d_f = 0.0;  // integral of alpha+ v^+ + alpha- v^- - lambda v
  double d_g = 0.0;  // 1/2 |grad(u - v)|^2
};

/// Compound functionals of the energy identity D_F + D_G = J(v) - J(u),
/// for problems with a known exact pair. Exact as long as lambda is constant
/// and grad(u) linear within each element (true for meshes aligned with the
/// exact free boundary).
inline CompoundTerms compound_terms(
    const TriMesh& mesh, const P1Field& v, double alpha_plus, double alpha_minus,
    const std::function<double(double, double)>& lambda_exact,
    const std::function<Eigen::Vector2d(double, double)>& grad_u_exact) {
  if (!lambda_exact || !grad_u_exact)
    throw std::invalid_argument("compound_terms: exact solution required");
  if (v.size() != mesh.num_nodes())
    throw std::invalid_argument("compound_terms: field size mismatch");

  CompoundTerms out;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const TriGeometry g = triangle_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    const std::array<double, 3> vals{v.values[tri[0]], v.values[tri[1]],
                                     v.values[tri[2]]};
    const PosNegIntegrals pn = pos_neg_part_integrals(vals, g.area);
    const Eigen::Vector2d xc = mesh.centroid(t);
    const double mean_v = (vals[0] + vals[1] + vals[2]) / 3.0;
    out.d_f += alpha_plus * pn.pos + alpha_minus * pn.neg -
               lambda_exact(xc.x(), xc.y()) * g.area * mean_v;

    Eigen::Vector2d grad_v = Eigen::Vector2d::Zero();
    for (int k = 0; k < 3; ++k) grad_v += vals[k] * g.grad[k];
    double acc = 0.0;
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector2d mid = 0.5 * (g.p[(k + 1) % 3] + g.p[(k + 2) % 3]);
      acc += (grad_u_exact(mid.x(), mid.y()) - grad_v).squaredNorm();
    }
    out.d_g += 0.5 * g.area / 3.0 * acc;
  }
  return out;
}

}  // namespace twophase
