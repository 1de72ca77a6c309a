#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>

#include "twophase/mesh.hpp"

namespace twophase {

struct ExactSolution {
  std::function<double(double, double)> u;
  std::function<Eigen::Vector2d(double, double)> grad_u;
  std::function<double(double, double)> lambda;
  double energy = 0.0;
};

/// Benchmark problem description: domain, coefficients, boundary data,
/// Friedrichs constant, initial mesh recipe and (optionally) the exact pair.
struct ProblemSpec {
  std::string name;
  Rect domain;
  double alpha_plus = 0.0;
  double alpha_minus = 0.0;
  std::function<double(double, double)> dirichlet_value;
  std::function<bool(const Eigen::Vector2d&)> dirichlet_region;
  std::function<bool(const Eigen::Vector2d&)> neumann_region;  // may be null
  double friedrichs_c = 0.0;
  int initial_nx = 1;
  int initial_ny = 1;
  SplitPattern pattern = SplitPattern::Diagonal;
  int pre_refinements = 0;  // red refinements applied before level 1
  std::optional<ExactSolution> exact;
};

/// Sharp Friedrichs constant for functions vanishing on the two long sides
/// of an infinite strip of the given width: width/pi.
inline double friedrichs_dirichlet_strip(double width) {
  return width / std::numbers::pi;
}

/// Sharp Friedrichs constant for functions vanishing on the whole boundary
/// of a wx-by-wy rectangle: 1/sqrt(lambda_1) with
/// lambda_1 = pi^2 (1/wx^2 + 1/wy^2).
inline double friedrichs_dirichlet_rectangle(double wx, double wy) {
  return 1.0 / (std::numbers::pi * std::sqrt(1.0 / (wx * wx) + 1.0 / (wy * wy)));
}

/// Two-phase membrane on (-1,1)x(0,1) with alpha = 8, u = -1/+1 on x = -1/+1
/// and natural (zero normal derivative) conditions on y in {0,1}. The exact
/// solution is y-independent and piecewise quadratic with free boundary at
/// x = +-1/2; its energy is 16/3.
inline ProblemSpec example1_spec() {
  constexpr double tol = 1e-12;
  ProblemSpec spec;
  spec.name = "example1";
  spec.domain = Rect{-1.0, 1.0, 0.0, 1.0};
  spec.alpha_plus = 8.0;
  spec.alpha_minus = 8.0;
  spec.dirichlet_value = [](double x, double) { return x < 0.0 ? -1.0 : 1.0; };
  spec.dirichlet_region = [](const Eigen::Vector2d& p) {
    return std::abs(std::abs(p.x()) - 1.0) <= tol;
  };
  spec.neumann_region = [](const Eigen::Vector2d& p) {
    return std::abs(p.y()) <= tol || std::abs(p.y() - 1.0) <= tol;
  };
  spec.friedrichs_c = friedrichs_dirichlet_strip(2.0);
  spec.initial_nx = 4;
  spec.initial_ny = 2;
  spec.pattern = SplitPattern::Diagonal;

  ExactSolution exact;
  exact.u = [](double x, double) {
    if (x <= -0.5) return -4.0 * x * x - 4.0 * x - 1.0;
    if (x >= 0.5) return 4.0 * x * x - 4.0 * x + 1.0;
    return 0.0;
  };
  exact.grad_u = [](double x, double) {
    if (x <= -0.5) return Eigen::Vector2d(-8.0 * x - 4.0, 0.0);
    if (x >= 0.5) return Eigen::Vector2d(8.0 * x - 4.0, 0.0);
    return Eigen::Vector2d(0.0, 0.0);
  };
  exact.lambda = [](double x, double) {
    if (x < -0.5) return -8.0;
    if (x > 0.5) return 8.0;
    return 0.0;
  };
  exact.energy = 16.0 / 3.0;
  spec.exact = std::move(exact);
  return spec;
}

/// Two-phase membrane on the square (-1,1)^2 with alpha = 4 and sign-changing
/// Dirichlet data; no exact solution is known. The mesh hierarchy starts from
/// the square cut by its two diagonals; level 1 is one red refinement of it
/// (13 nodes).
inline ProblemSpec example2_spec() {
  constexpr double tol = 1e-12;
  ProblemSpec spec;
  spec.name = "example2";
  spec.domain = Rect{-1.0, 1.0, -1.0, 1.0};
  spec.alpha_plus = 4.0;
  spec.alpha_minus = 4.0;
  spec.dirichlet_value = [](double x, double y) {
    if (std::abs(y - 1.0) <= tol) return x + 1.0;
    if (std::abs(y + 1.0) <= tol) return x - 1.0;
    if (std::abs(x - 1.0) <= tol) return y + 1.0;
    if (std::abs(x + 1.0) <= tol) return y - 1.0;
    throw std::invalid_argument("example2 dirichlet_value: point not on boundary");
  };
  spec.dirichlet_region = [](const Eigen::Vector2d& p) {
    return std::abs(std::abs(p.x()) - 1.0) <= tol ||
           std::abs(std::abs(p.y()) - 1.0) <= tol;
  };
  spec.neumann_region = nullptr;
  spec.friedrichs_c = friedrichs_dirichlet_rectangle(2.0, 2.0);
  spec.initial_nx = 1;
  spec.initial_ny = 1;
  spec.pattern = SplitPattern::CrissCross;
  spec.pre_refinements = 1;
  return spec;
}

inline double friedrichs_constant(const ProblemSpec& spec) {
  return spec.friedrichs_c;
}

/// Level-1 mesh is the initial structured mesh after the problem's
/// pre-refinements; each further level is one red refinement. Boundary tags
/// follow the problem's region predicates.
inline TriMesh mesh_at_level(const ProblemSpec& spec, int level) {
  if (level < 1) throw std::invalid_argument("mesh_at_level: level must be >= 1");
  TriMesh mesh = build_initial_mesh(spec.domain, spec.initial_nx, spec.initial_ny,
                                    spec.pattern);
  mesh = classify_boundary(std::move(mesh), spec.dirichlet_region,
                           spec.neumann_region);
  for (int l = 0; l < spec.pre_refinements + level - 1; ++l)
    mesh = refine_red(mesh);
  return mesh;
}

}  // namespace twophase
