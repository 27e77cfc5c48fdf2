#pragma once

#include "mfmfe/core.hpp"

#include <array>
#include <cmath>
#include <string_view>
#include <vector>

namespace mfmfe {

enum class CellKind { Triangle, Quadrilateral, Tetrahedron, Hexahedron };

constexpr int cell_dimension(CellKind kind) {
  return (kind == CellKind::Triangle || kind == CellKind::Quadrilateral) ? 2 : 3;
}

constexpr int num_vertices(CellKind kind) {
  switch (kind) {
  case CellKind::Triangle: return 3;
  case CellKind::Quadrilateral: return 4;
  case CellKind::Tetrahedron: return 4;
  case CellKind::Hexahedron: return 8;
  }
  return 0;
}

constexpr int num_faces(CellKind kind) {
  switch (kind) {
  case CellKind::Triangle: return 3;
  case CellKind::Quadrilateral: return 4;
  case CellKind::Tetrahedron: return 4;
  case CellKind::Hexahedron: return 6;
  }
  return 0;
}

constexpr bool is_simplex(CellKind kind) {
  return kind == CellKind::Triangle || kind == CellKind::Tetrahedron;
}

constexpr std::string_view to_string(CellKind kind) {
  switch (kind) {
  case CellKind::Triangle: return "triangle";
  case CellKind::Quadrilateral: return "quadrilateral";
  case CellKind::Tetrahedron: return "tetrahedron";
  case CellKind::Hexahedron: return "hexahedron";
  }
  return "?";
}

/// Geometry of a reference cell: unit simplex, unit square or unit cube.
///
/// Faces list their vertices so that consecutive entries are adjacent on the
/// face; normals are outward and of unit length. Face measures are the
/// reference lengths (areas), which also scale the velocity degrees of
/// freedom so that coefficients are volumetric fluxes.
template <int Dim>
struct ReferenceCell {
  CellKind kind;
  std::vector<Vec<Dim>> vertices;
  std::vector<std::vector<int>> faces;
  std::vector<Vec<Dim>> normals;
  std::vector<double> face_measures;
  double measure = 0.0;
  Vec<Dim> centroid;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }
};

namespace detail {

inline ReferenceCell<2> make_triangle() {
  ReferenceCell<2> r;
  r.kind = CellKind::Triangle;
  r.vertices = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  r.faces = {{0, 1}, {1, 2}, {2, 0}};
  const double s = std::sqrt(0.5);
  r.normals = {Vec2(0, -1), Vec2(s, s), Vec2(-1, 0)};
  r.face_measures = {1.0, std::sqrt(2.0), 1.0};
  r.measure = 0.5;
  r.centroid = Vec2(1.0 / 3.0, 1.0 / 3.0);
  return r;
}

inline ReferenceCell<2> make_square() {
  ReferenceCell<2> r;
  r.kind = CellKind::Quadrilateral;
  r.vertices = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  r.faces = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  r.normals = {Vec2(0, -1), Vec2(1, 0), Vec2(0, 1), Vec2(-1, 0)};
  r.face_measures = {1.0, 1.0, 1.0, 1.0};
  r.measure = 1.0;
  r.centroid = Vec2(0.5, 0.5);
  return r;
}

inline ReferenceCell<3> make_tetrahedron() {
  ReferenceCell<3> r;
  r.kind = CellKind::Tetrahedron;
  r.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  r.faces = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
  const double s = 1.0 / std::sqrt(3.0);
  r.normals = {Vec3(0, 0, -1), Vec3(0, -1, 0), Vec3(-1, 0, 0), Vec3(s, s, s)};
  r.face_measures = {0.5, 0.5, 0.5, std::sqrt(3.0) / 2.0};
  r.measure = 1.0 / 6.0;
  r.centroid = Vec3(0.25, 0.25, 0.25);
  return r;
}

inline ReferenceCell<3> make_cube() {
  ReferenceCell<3> r;
  r.kind = CellKind::Hexahedron;
  r.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0),
                Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(1, 1, 1), Vec3(0, 1, 1)};
  r.faces = {{0, 1, 2, 3}, {4, 5, 6, 7}, {0, 1, 5, 4},
             {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7}};
  r.normals = {Vec3(0, 0, -1), Vec3(0, 0, 1), Vec3(0, -1, 0),
               Vec3(1, 0, 0),  Vec3(0, 1, 0), Vec3(-1, 0, 0)};
  r.face_measures = {1, 1, 1, 1, 1, 1};
  r.measure = 1.0;
  r.centroid = Vec3(0.5, 0.5, 0.5);
  return r;
}

} // namespace detail

template <int Dim>
const ReferenceCell<Dim>& reference_cell(CellKind kind) {
  if (cell_dimension(kind) != Dim) {
    throw DomainError("reference_cell: " + std::string(to_string(kind)) +
                      " is not a " + std::to_string(Dim) + "D cell");
  }
  if constexpr (Dim == 2) {
    static const ReferenceCell<2> tri = detail::make_triangle();
    static const ReferenceCell<2> quad = detail::make_square();
    return kind == CellKind::Triangle ? tri : quad;
  } else {
    static const ReferenceCell<3> tet = detail::make_tetrahedron();
    static const ReferenceCell<3> hex = detail::make_cube();
    return kind == CellKind::Tetrahedron ? tet : hex;
  }
}

/// True if x lies in the closed reference cell (with a small tolerance).
template <int Dim>
bool in_reference_cell(CellKind kind, const Vec<Dim>& x, double tol = 1e-12) {
  if ((x.array() < -tol).any()) return false;
  if (is_simplex(kind)) return x.sum() <= 1.0 + tol;
  return (x.array() <= 1.0 + tol).all();
}

} // namespace mfmfe
