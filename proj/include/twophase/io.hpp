#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "twophase/assembly.hpp"
#include "twophase/mesh.hpp"

namespace twophase {

struct VtkFields {
  std::vector<std::pair<std::string, P1Field>> point_fields;
  std::vector<std::pair<std::string, P0Field>> cell_fields;
};

namespace detail {

inline std::string format_full(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string format_sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.5e", x);  // 6 significant digits
  return buf;
}

}  // namespace detail

/// Legacy ASCII VTK unstructured-grid writer (triangles, cell type 5).
/// Coordinates are printed with enough digits to round-trip exactly.
inline void write_vtk(const TriMesh& mesh, const VtkFields& fields,
                      const std::string& path) {
  for (const auto& [name, f] : fields.point_fields)
    if (f.size() != mesh.num_nodes())
      throw std::invalid_argument("write_vtk: point field '" + name +
                                  "' size mismatch");
  for (const auto& [name, f] : fields.cell_fields)
    if (f.size() != mesh.num_triangles())
      throw std::invalid_argument("write_vtk: cell field '" + name +
                                  "' size mismatch");

  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_vtk: cannot open " + path);

  out << "# vtk DataFile Version 3.0\n";
  out << "two-phase membrane fields\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (const auto& p : mesh.vertices)
    out << detail::format_full(p.x()) << ' ' << detail::format_full(p.y())
        << " 0\n";
  out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles()
      << '\n';
  for (const auto& tri : mesh.triangles)
    out << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
  out << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (int t = 0; t < mesh.num_triangles(); ++t) out << "5\n";

  if (!fields.point_fields.empty()) {
    out << "POINT_DATA " << mesh.num_nodes() << '\n';
    for (const auto& [name, f] : fields.point_fields) {
      out << "SCALARS " << name << " double 1\n";
      out << "LOOKUP_TABLE default\n";
      for (int n = 0; n < f.size(); ++n)
        out << detail::format_full(f.values[n]) << '\n';
    }
  }
  if (!fields.cell_fields.empty()) {
    out << "CELL_DATA " << mesh.num_triangles() << '\n';
    for (const auto& [name, f] : fields.cell_fields) {
      out << "SCALARS " << name << " double 1\n";
      out << "LOOKUP_TABLE default\n";
      for (int t = 0; t < f.size(); ++t)
        out << detail::format_full(f.values[t]) << '\n';
    }
  }
  if (!out) throw std::runtime_error("write_vtk: write failed for " + path);
}

struct LevelRecord {
  int level = 0;
  int num_nodes = 0;
  double j_primal = 0.0;
  double i_dual = 0.0;
  double gap = 0.0;
  double majorant_total = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double beta = 0.0;
  double energy_lower = 0.0;
};

inline constexpr const char* kCsvHeader =
    "level,num_nodes,J_primal,I_dual,gap,majorant_total,m1,m2,m3,beta,"
    "energy_lower";

inline void write_csv(const std::vector<LevelRecord>& records,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.level << ',' << r.num_nodes << ',' << detail::format_sci(r.j_primal)
        << ',' << detail::format_sci(r.i_dual) << ',' << detail::format_sci(r.gap)
        << ',' << detail::format_sci(r.majorant_total) << ','
        << detail::format_sci(r.m1) << ',' << detail::format_sci(r.m2) << ','
        << detail::format_sci(r.m3) << ',' << detail::format_sci(r.beta) << ','
        << detail::format_sci(r.energy_lower) << '\n';
  }
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

}  // namespace twophase
