#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "twophase/experiment.hpp"
#include "twophase/io.hpp"
#include "twophase/problems.hpp"

using namespace twophase;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "twophase_io_test";
  std::filesystem::create_directories(dir);
  return dir;
}

// Minimal reader for the POINTS block of a legacy VTK file.
std::vector<Eigen::Vector2d> parse_vtk_points(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string token;
  int n = 0;
  while (in >> token)
    if (token == "POINTS") {
      in >> n >> token;
      break;
    }
  std::vector<Eigen::Vector2d> points(n);
  for (int i = 0; i < n; ++i) {
    double x, y, z;
    in >> x >> y >> z;
    points[i] = Eigen::Vector2d(x, y);
  }
  return points;
}

}  // namespace

TEST_CASE("VTK writer") {
  const ProblemSpec spec = example1_spec();
  const TriMesh mesh = mesh_at_level(spec, 1);
  const auto dir = temp_dir();

  SECTION("level-1 strip mesh: 15 points, 16 triangle cells") {
    VtkFields fields;
    fields.point_fields.emplace_back(
        "u_lambda", P1Field(Eigen::VectorXd::LinSpaced(15, 0.0, 1.0)));
    fields.cell_fields.emplace_back(
        "lambda", P0Field(Eigen::VectorXd::LinSpaced(16, -8.0, 8.0)));
    const std::string path = (dir / "level1.vtk").string();
    write_vtk(mesh, fields, path);

    const std::string content = slurp(path);
    REQUIRE(content.find("# vtk DataFile Version 3.0") == 0);
    REQUIRE(content.find("POINTS 15 double") != std::string::npos);
    REQUIRE(content.find("CELLS 16 64") != std::string::npos);
    REQUIRE(content.find("CELL_TYPES 16") != std::string::npos);
    REQUIRE(content.find("SCALARS u_lambda double 1") != std::string::npos);
    REQUIRE(content.find("SCALARS lambda double 1") != std::string::npos);

    const auto points = parse_vtk_points(path);
    REQUIRE(points.size() == 15);
    for (int n = 0; n < 15; ++n) {
      REQUIRE(points[n].x() == mesh.vertices[n].x());
      REQUIRE(points[n].y() == mesh.vertices[n].y());
    }
  }
  SECTION("point data only") {
    VtkFields fields;
    fields.point_fields.emplace_back("u_lambda", P1Field::zeros(15));
    const std::string path = (dir / "points_only.vtk").string();
    write_vtk(mesh, fields, path);
    const std::string content = slurp(path);
    REQUIRE(content.find("POINT_DATA 15") != std::string::npos);
    REQUIRE(content.find("CELL_DATA") == std::string::npos);
  }
  SECTION("field size mismatch is rejected") {
    VtkFields fields;
    fields.cell_fields.emplace_back("lambda", P0Field::zeros(3));
    REQUIRE_THROWS_AS(write_vtk(mesh, fields, (dir / "bad.vtk").string()),
                      std::invalid_argument);
  }
}

TEST_CASE("CSV writer") {
  const auto dir = temp_dir();

  SECTION("empty record list produces a header-only file") {
    const std::string path = (dir / "empty.csv").string();
    write_csv({}, path);
    REQUIRE(slurp(path) == std::string(kCsvHeader) + "\n");
  }
  SECTION("repeated writes are byte-identical") {
    LevelRecord rec;
    rec.level = 1;
    rec.num_nodes = 15;
    rec.j_primal = 6.038336;
    rec.i_dual = 5.997475;
    rec.gap = 7.05e-1;
    rec.majorant_total = 1.457;
    rec.m1 = 1.365;
    rec.m2 = 1.8e-11;
    rec.m3 = 9.18e-2;
    rec.beta = 1.3e-11;
    rec.energy_lower = 4.58;
    const std::string p1 = (dir / "a.csv").string();
    const std::string p2 = (dir / "b.csv").string();
    write_csv({rec}, p1);
    write_csv({rec}, p2);
    REQUIRE(slurp(p1) == slurp(p2));
    REQUIRE(slurp(p1).find("6.03834e+00") != std::string::npos);
  }
}

TEST_CASE("experiment runner") {
  const auto dir = temp_dir() / "run";

  SECTION("single level with zero majorant sweeps still yields a valid row") {
    RunConfig config;
    config.example = 1;
    config.levels = 1;
    config.majorant_iters = 0;
    config.output_dir = (dir / "ex1").string();
    const ExperimentResult result = run_experiment(config);
    REQUIRE(result.records.size() == 1);
    const LevelRecord& r = result.records.front();
    REQUIRE(r.num_nodes == 15);
    REQUIRE_THAT(r.j_primal, Catch::Matchers::WithinAbs(6.0383, 5e-3));
    REQUIRE_THAT(r.i_dual, Catch::Matchers::WithinAbs(5.9975, 5e-3));
    REQUIRE_THAT(r.gap, Catch::Matchers::WithinAbs(7.05e-1, 5e-3));
    REQUIRE(r.gap <= r.majorant_total);
    REQUIRE(result.bounds_ok);

    const std::string csv = slurp(config.output_dir + "/example1.csv");
    REQUIRE(csv.find(kCsvHeader) == 0);
    REQUIRE(csv.find("1,15,6.03834e+00,5.99747e+00") != std::string::npos);
  }
  SECTION("square benchmark uses the level-plus-one reference") {
    RunConfig config;
    config.example = 2;
    config.levels = 1;
    config.majorant_iters = 50;
    config.output_dir = (dir / "ex2").string();
    config.emit_vtk = true;
    const ExperimentResult result = run_experiment(config);
    REQUIRE(result.reference_energy.has_value());
    REQUIRE(result.reference_level == 2);
    REQUIRE_THAT(*result.reference_energy,
                 Catch::Matchers::WithinAbs(13.1924, 5e-3));
    REQUIRE_THAT(result.records.front().gap,
                 Catch::Matchers::WithinAbs(13.6667 - 13.1924, 1e-2));
    REQUIRE(std::filesystem::exists(config.output_dir + "/example2_level1.vtk"));
    REQUIRE(std::filesystem::exists(config.output_dir +
                                    "/majorant_sweeps_example2.txt"));
  }
  SECTION("re-running produces byte-identical outputs") {
    RunConfig config;
    config.example = 1;
    config.levels = 2;
    config.majorant_iters = 30;
    config.output_dir = (dir / "det1").string();
    run_experiment(config);
    const std::string first = slurp(config.output_dir + "/example1.csv");
    config.output_dir = (dir / "det2").string();
    run_experiment(config);
    REQUIRE(first == slurp(config.output_dir + "/example1.csv"));
  }
  SECTION("friedrichs override is honored and keeps the bound valid") {
    RunConfig config;
    config.example = 1;
    config.levels = 2;
    config.majorant_iters = 200;
    config.friedrichs_override = 1.0;  // above the sharp constant: still valid
    config.output_dir = (dir / "override").string();
    const ExperimentResult result = run_experiment(config);
    REQUIRE(result.bounds_ok);
    for (const auto& r : result.records) REQUIRE(r.gap <= r.majorant_total);
  }
  SECTION("invalid configuration is rejected") {
    RunConfig config;
    config.example = 3;
    REQUIRE_THROWS_AS(run_experiment(config), std::invalid_argument);
    config.example = 1;
    config.levels = 0;
    REQUIRE_THROWS_AS(run_experiment(config), std::invalid_argument);
  }
}
