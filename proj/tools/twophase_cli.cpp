#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "twophase/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two-phase membrane solver with guaranteed energy error bounds"};

  twophase::RunConfig config;
  double friedrichs = 0.0;
  app.add_option("--example", config.example, "Benchmark example (1 or 2)")
      ->check(CLI::Range(1, 2));
  app.add_option("--levels", config.levels,
                 "Number of nested uniform refinement levels")
      ->check(CLI::PositiveNumber);
  app.add_option("--majorant-iters", config.majorant_iters,
                 "Majorant optimization sweeps")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--qp-tol", config.qp_tol,
                 "Projected-gradient tolerance of the dual QP");
  app.add_option("--out", config.output_dir, "Output directory");
  app.add_flag("--vtk", config.emit_vtk, "Write a VTK file per level");
  auto* friedrichs_opt = app.add_option("--friedrichs", friedrichs,
                                        "Override the Friedrichs constant");
  CLI11_PARSE(app, argc, argv);
  if (friedrichs_opt->count() > 0) config.friedrichs_override = friedrichs;

  try {
    const twophase::ExperimentResult result = twophase::run_experiment(config);

    std::printf("example %d\n", config.example);
    std::printf("%5s %9s %12s %12s %10s %10s %10s %10s %10s %12s\n", "level",
                "nodes", "J", "I*", "gap", "M+", "M+1", "M+2", "M+3",
                "J(u) lower");
    for (const auto& r : result.records)
      std::printf("%5d %9d %12.6f %12.6f %10.3e %10.3e %10.3e %10.3e %10.3e %12.6f\n",
                  r.level, r.num_nodes, r.j_primal, r.i_dual, r.gap,
                  r.majorant_total, r.m1, r.m2, r.m3, r.energy_lower);
    if (result.reference_energy)
      std::printf("reference: level %d, J = %.6f\n", result.reference_level,
                  *result.reference_energy);
    if (!result.bounds_ok) {
      std::fprintf(stderr, "error: a per-level bound invariant was violated\n");
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
