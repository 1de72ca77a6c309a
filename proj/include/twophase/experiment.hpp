#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "twophase/dual_solver.hpp"
#include "twophase/io.hpp"
#include "twophase/majorant.hpp"
#include "twophase/problems.hpp"

namespace twophase {

enum class ReferenceMode {
  Auto,          // exact energy when available, otherwise one level higher
  Exact,         // requires the problem's exact energy
  LevelPlusOne,  // dual solve on the mesh one level above the finest
};

struct RunConfig {
  int example = 1;
  int levels = 5;
  int majorant_iters = 1000;
  double qp_tol = 1e-9;
  ReferenceMode reference = ReferenceMode::Auto;
  std::string output_dir = "out";
  bool emit_vtk = false;
  std::optional<double> friedrichs_override;
  bool keep_details = false;  // retain meshes/solves/majorants per level
};

struct LevelDetail {
  TriMesh mesh;
  DualSolveResult solve;
  MajorantBreakdown majorant;
};

struct ExperimentResult {
  std::vector<LevelRecord> records;
  bool bounds_ok = true;  // gap <= majorant on every level, QP converged
  std::optional<double> reference_energy;
  int reference_level = 0;
  std::vector<LevelDetail> details;
};

/// Runs the full benchmark pipeline for one example: a hierarchy of red
/// refinements, the dual solve and majorant optimization per level, and the
/// CSV / VTK / sweep-log outputs.
inline ExperimentResult run_experiment(const RunConfig& config) {
  if (config.example != 1 && config.example != 2)
    throw std::invalid_argument("run_experiment: example must be 1 or 2");
  if (config.levels < 1)
    throw std::invalid_argument("run_experiment: levels must be >= 1");
  if (config.majorant_iters < 0)
    throw std::invalid_argument("run_experiment: majorant_iters must be >= 0");

  ProblemSpec problem = (config.example == 1) ? example1_spec() : example2_spec();
  if (config.friedrichs_override) problem.friedrichs_c = *config.friedrichs_override;

  ReferenceMode mode = config.reference;
  if (mode == ReferenceMode::Auto)
    mode = problem.exact ? ReferenceMode::Exact : ReferenceMode::LevelPlusOne;
  if (mode == ReferenceMode::Exact && !problem.exact)
    throw std::invalid_argument(
        "run_experiment: exact reference requested but unavailable");

  std::filesystem::create_directories(config.output_dir);
  const std::string tag = "example" + std::to_string(config.example);
  std::ofstream sweep_log(
      (std::filesystem::path(config.output_dir) / ("majorant_sweeps_" + tag + ".txt"))
          .string());

  SolveOptions opts;
  opts.qp_tol = config.qp_tol;

  ExperimentResult result;
  TriMesh mesh = mesh_at_level(problem, 1);
  for (int level = 1; level <= config.levels; ++level) {
    if (level > 1) mesh = refine_red(mesh);

    DualSolveResult solve = solve_two_phase(mesh, problem, opts);
    MajorantBreakdown majorant = optimize_majorant(
        mesh, solve.u_lambda, solve.lambda, problem.friedrichs_c,
        problem.alpha_plus, problem.alpha_minus, config.majorant_iters);

    for (std::size_t s = 0; s < majorant.sweep_totals.size(); ++s)
      sweep_log << level << ' ' << s + 1 << ' '
                << detail::format_full(majorant.sweep_totals[s]) << '\n';

    LevelRecord rec;
    rec.level = level;
    rec.num_nodes = mesh.num_nodes();
    rec.j_primal = solve.primal_energy;
    rec.i_dual = solve.dual_energy;
    rec.majorant_total = majorant.total;
    rec.m1 = majorant.m1;
    rec.m2 = majorant.m2;
    rec.m3 = majorant.m3;
    rec.beta = majorant.beta;
    rec.energy_lower = solve.primal_energy - majorant.total;
    result.records.push_back(rec);
    if (!solve.converged) result.bounds_ok = false;

    if (config.emit_vtk) {
      VtkFields fields;
      fields.point_fields.emplace_back("u_lambda", solve.u_lambda);
      fields.cell_fields.emplace_back("lambda", solve.lambda);
      fields.cell_fields.emplace_back("mu", majorant.mu);
      fields.cell_fields.emplace_back("density1", majorant.density1);
      fields.cell_fields.emplace_back("density2", majorant.density2);
      fields.cell_fields.emplace_back("density3", majorant.density3);
      write_vtk(mesh, fields,
                (std::filesystem::path(config.output_dir) /
                 (tag + "_level" + std::to_string(level) + ".vtk"))
                    .string());
    }
    if (config.keep_details)
      result.details.push_back({mesh, std::move(solve), std::move(majorant)});
  }

  if (mode == ReferenceMode::Exact) {
    for (auto& rec : result.records) rec.gap = rec.j_primal - problem.exact->energy;
  } else {
    mesh = refine_red(mesh);
    result.reference_level = config.levels + 1;
    DualSolveResult ref = solve_two_phase(mesh, problem, opts);
    result.reference_energy = ref.primal_energy;
    if (!ref.converged) result.bounds_ok = false;
    for (auto& rec : result.records) rec.gap = rec.j_primal - ref.primal_energy;
  }

  for (const auto& rec : result.records)
    if (rec.gap > rec.majorant_total + 1e-12 * std::max(1.0, rec.majorant_total))
      result.bounds_ok = false;

  write_csv(result.records,
            (std::filesystem::path(config.output_dir) / (tag + ".csv")).string());
  return result;
}

}  // namespace twophase
