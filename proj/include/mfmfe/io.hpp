#pragma once

#include "mfmfe/mesh.hpp"
#include "mfmfe/newton.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace mfmfe {

/// Shortest round-trip text for a double (17 significant digits).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CellField {
  std::string name;
  std::vector<double> values;
};

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  return os;
}

inline void finish_output(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

inline int vtk_cell_type(CellKind k) {
  switch (k) {
  case CellKind::Triangle: return 5;
  case CellKind::Quadrilateral: return 9;
  case CellKind::Tetrahedron: return 10;
  case CellKind::Hexahedron: return 12;
  }
  return 0;
}

} // namespace detail

/// Legacy ASCII VTK unstructured grid with CELL_DATA scalars.
template <int Dim>
void write_vtk(const Mesh<Dim>& mesh, const std::vector<CellField>& fields,
               const std::filesystem::path& path, const std::string& title = "mfmfe") {
  for (const auto& f : fields) {
    if (static_cast<int>(f.values.size()) != mesh.num_cells()) {
      throw StructuralError("write_vtk: field '" + f.name + "' is not sized to the mesh cells");
    }
  }
  auto os = detail::open_output(path);
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& v : mesh.vertices()) {
    os << format_double(v[0]) << ' ' << format_double(v[1]) << ' '
       << (Dim == 3 ? format_double(v[Dim - 1]) : std::string("0")) << '\n';
  }
  std::size_t size = 0;
  for (const auto& c : mesh.cells()) size += c.vertices.size() + 1;
  os << "CELLS " << mesh.num_cells() << ' ' << size << '\n';
  for (const auto& c : mesh.cells()) {
    os << c.vertices.size();
    for (int v : c.vertices) os << ' ' << v;
    os << '\n';
  }
  os << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (const auto& c : mesh.cells()) os << detail::vtk_cell_type(c.kind) << '\n';
  if (!fields.empty()) {
    os << "CELL_DATA " << mesh.num_cells() << '\n';
    for (const auto& f : fields) {
      os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : f.values) os << format_double(v) << '\n';
    }
  }
  detail::finish_output(os, path);
}

/// Numeric table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline void write_csv(const CsvTable& table, const std::filesystem::path& path) {
  auto os = detail::open_output(path);
  for (std::size_t k = 0; k < table.header.size(); ++k) os << (k ? "," : "") << table.header[k];
  os << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw StructuralError("write_csv: ragged row");
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << format_double(row[k]);
    os << '\n';
  }
  detail::finish_output(os, path);
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  if (!std::getline(is, line)) throw IoError("'" + path.string() + "' is empty");
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        if (cell == "nan") row.push_back(std::nan(""));
        else throw IoError("'" + path.string() + "': cannot parse '" + cell + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Per-step solver statistics.
inline CsvTable step_stats_table(const std::vector<StepRecord>& steps) {
  CsvTable t;
  t.header = {"step", "time", "newton_iters", "final_residual", "linear_iters", "pressure_change"};
  for (const auto& s : steps) {
    t.rows.push_back({static_cast<double>(s.step), s.time, static_cast<double>(s.newton_iterations),
                      s.final_residual, static_cast<double>(s.linear_iterations), s.pressure_change});
  }
  return t;
}

/// key=value manifest, one entry per line, in the given order.
inline void write_manifest(const std::vector<std::pair<std::string, std::string>>& entries,
                           const std::filesystem::path& path) {
  auto os = detail::open_output(path);
  for (const auto& [k, v] : entries) os << k << '=' << v << '\n';
  detail::finish_output(os, path);
}

} // namespace mfmfe
