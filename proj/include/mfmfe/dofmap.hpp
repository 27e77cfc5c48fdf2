#pragma once

#include "mfmfe/basis.hpp"
#include "mfmfe/mesh.hpp"

#include <algorithm>
#include <vector>

namespace mfmfe {

struct LocalDof {
  int global;
  int sign; ///< +1 if the cell's outward normal matches the face's global normal
};

/// Velocity and pressure numbering.
///
/// Velocity dofs are one per (face, face vertex) pair and are numbered vertex
/// by vertex, so the dofs meeting at mesh vertex v occupy the contiguous range
/// [group_offset(v), group_offset(v+1)). Pressure dof i is cell i.
template <int Dim>
class DofMap {
public:
  explicit DofMap(const Mesh<Dim>& mesh) {
    const int nv = mesh.num_vertices();
    group_offsets_.assign(nv + 1, 0);
    face_vertex_dof_.resize(mesh.num_faces());
    for (int f = 0; f < mesh.num_faces(); ++f)
      face_vertex_dof_[f].assign(mesh.face(f).vertices.size(), -1);

    int next = 0;
    for (int v = 0; v < nv; ++v) {
      group_offsets_[v] = next;
      for (int f : mesh.vertex_faces(v)) {
        const auto& fv = mesh.face(f).vertices;
        const auto it = std::find(fv.begin(), fv.end(), v);
        face_vertex_dof_[f][it - fv.begin()] = next;
        dof_vertex_.push_back(v);
        dof_face_.push_back(f);
        essential_.push_back(mesh.face(f).boundary == BoundaryKind::Neumann ? 1 : 0);
        ++next;
      }
    }
    group_offsets_[nv] = next;
    num_dofs_ = next;

    cell_dofs_.resize(mesh.num_cells());
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const Cell& cell = mesh.cell(c);
      const auto& basis = reference_basis<Dim>(cell.kind);
      auto& table = cell_dofs_[c];
      table.reserve(basis.size());
      for (const auto& d : basis.dofs()) {
        const int f = mesh.cell_face(c, d.face);
        const int gv = cell.vertices[d.vertex];
        const auto& fv = mesh.face(f).vertices;
        const auto it = std::find(fv.begin(), fv.end(), gv);
        if (it == fv.end()) throw StructuralError("DofMap: inconsistent face connectivity");
        table.push_back({face_vertex_dof_[f][it - fv.begin()], mesh.face_sign(c, d.face)});
      }
    }
    num_cells_ = mesh.num_cells();
  }

  /// Total number of velocity dofs (L = n * number of faces).
  int num_velocity_dofs() const { return num_dofs_; }
  int num_pressure_dofs() const { return num_cells_; }
  int num_groups() const { return static_cast<int>(group_offsets_.size()) - 1; }

  int group_offset(int v) const { return group_offsets_[v]; }
  int group_size(int v) const { return group_offsets_[v + 1] - group_offsets_[v]; }

  int dof_vertex(int g) const { return dof_vertex_[g]; }
  int dof_face(int g) const { return dof_face_[g]; }
  bool is_essential(int g) const { return essential_[g] != 0; }

  const std::vector<LocalDof>& cell_dofs(int c) const { return cell_dofs_[c]; }

  /// Global dof of (face, k-th face vertex).
  int face_dof(int f, int k) const { return face_vertex_dof_[f][k]; }

private:
  int num_dofs_ = 0;
  int num_cells_ = 0;
  std::vector<int> group_offsets_;
  std::vector<int> dof_vertex_;
  std::vector<int> dof_face_;
  std::vector<char> essential_;
  std::vector<std::vector<int>> face_vertex_dof_;
  std::vector<std::vector<LocalDof>> cell_dofs_;
};

template <int Dim>
DofMap<Dim> build_dof_map(const Mesh<Dim>& mesh) {
  return DofMap<Dim>(mesh);
}

} // namespace mfmfe
