#pragma once

#include "twophase/dual_solver.hpp"
#include "twophase/problems.hpp"

namespace twophase {

struct ReferenceSolution {
  P1Field u;           // lives on the mesh at `level`
  double energy = 0.0;  // J(u), an upper bound of the exact energy
  int level = 0;        // one level above the requested one
};

/// Reference solution for problems without a known exact solution: the dual
/// solver's approximation on the mesh one level higher than `level`.
inline ReferenceSolution reference_solution(const ProblemSpec& problem, int level,
                                            const SolveOptions& opts = {}) {
  ReferenceSolution ref;
  ref.level = level + 1;
  const TriMesh mesh = mesh_at_level(problem, ref.level);
  DualSolveResult solve = solve_two_phase(mesh, problem, opts);
  ref.u = std::move(solve.u_lambda);
  ref.energy = solve.primal_energy;
  return ref;
}

}  // namespace twophase
