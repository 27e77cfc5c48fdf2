#pragma once

#include "mfmfe/gauss.hpp"
#include "mfmfe/refmap.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace mfmfe {

enum class BoundaryKind { Interior, Dirichlet, Neumann };

struct Cell {
  CellKind kind;
  std::vector<int> vertices; ///< global vertex ids in reference order
};

/// A face (edge in 2D). `cells[0]` is the lower-indexed neighbour; the
/// global normal is the outward normal of `cells[0]`, so it points from the
/// lower to the higher cell index.
struct Face {
  std::vector<int> vertices; ///< global ids, in the local order of cells[0]
  std::array<int, 2> cells{-1, -1};
  std::array<int, 2> local_face{-1, -1};
  BoundaryKind boundary = BoundaryKind::Interior;

  bool is_boundary() const { return cells[1] < 0; }
};

/// Conforming mesh with face connectivity. Immutable once built; boundary
/// markers are fixed at construction (see with_boundary()).
template <int Dim>
class Mesh {
public:
  using Point = Vec<Dim>;
  using BoundaryClassifier = std::function<BoundaryKind(const Point& midpoint)>;

  Mesh() = default;

  Mesh(std::vector<Point> vertices, std::vector<Cell> cells)
      : vertices_(std::move(vertices)), cells_(std::move(cells)) {
    build_faces();
    compute_geometry();
  }

  Mesh(std::vector<Point> vertices, std::vector<Cell> cells, const BoundaryClassifier& classify)
      : Mesh(std::move(vertices), std::move(cells)) {
    apply_classifier(classify);
  }

  /// Copy of this mesh with boundary faces relabelled by `classify`, which
  /// receives the face midpoint.
  Mesh with_boundary(const BoundaryClassifier& classify) const {
    Mesh m = *this;
    m.apply_classifier(classify);
    return m;
  }

  int dimension() const { return Dim; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const Point& vertex(int v) const { return vertices_[v]; }
  const std::vector<Cell>& cells() const { return cells_; }
  const Cell& cell(int c) const { return cells_[c]; }
  const std::vector<Face>& faces() const { return faces_; }
  const Face& face(int f) const { return faces_[f]; }

  int cell_face(int c, int local_face) const { return cell_faces_[c][local_face]; }

  /// +1 if the cell's outward normal on this local face agrees with the
  /// face's global normal, -1 otherwise.
  int face_sign(int c, int local_face) const {
    return faces_[cell_face(c, local_face)].cells[0] == c ? 1 : -1;
  }

  RefMap<Dim> ref_map(int c) const {
    std::vector<Point> r;
    r.reserve(cells_[c].vertices.size());
    for (int v : cells_[c].vertices) r.push_back(vertices_[v]);
    return RefMap<Dim>(cells_[c].kind, std::move(r));
  }

  double cell_measure(int c) const { return measures_[c]; }
  /// Centre of mass (J-weighted centroid).
  const Point& centroid(int c) const { return centroids_[c]; }
  /// Largest element diameter.
  /// Image of the reference centre of mass, F_E(x_hat_c); the point where
  /// cell pressures are compared with exact values.
  Point center(int c) const {
    return ref_map(c).map_unchecked(reference_cell<Dim>(cells_[c].kind).centroid);
  }

  double h() const { return h_; }

  Point face_midpoint(int f) const {
    Point m = Point::Zero();
    for (int v : faces_[f].vertices) m += vertices_[v];
    return m / static_cast<double>(faces_[f].vertices.size());
  }

  /// Faces incident to each vertex, ordered by face id.
  const std::vector<int>& vertex_faces(int v) const { return vertex_faces_[v]; }
  const std::vector<int>& vertex_cells(int v) const { return vertex_cells_[v]; }

private:
  void build_faces() {
    std::map<std::vector<int>, int> lookup;
    cell_faces_.assign(cells_.size(), {});
    for (int c = 0; c < num_cells(); ++c) {
      const auto& cell = cells_[c];
      if (cell_dimension(cell.kind) != Dim) {
        throw StructuralError("Mesh: cell " + std::to_string(c) + " has the wrong dimension");
      }
      if (static_cast<int>(cell.vertices.size()) != mfmfe::num_vertices(cell.kind)) {
        throw StructuralError("Mesh: cell " + std::to_string(c) + " has a wrong vertex count");
      }
      for (int v : cell.vertices) {
        if (v < 0 || v >= num_vertices()) {
          throw StructuralError("Mesh: cell " + std::to_string(c) + " references vertex " +
                                std::to_string(v) + " out of range");
        }
      }
      const auto& ref = reference_cell<Dim>(cell.kind);
      cell_faces_[c].resize(ref.num_faces());
      for (int lf = 0; lf < ref.num_faces(); ++lf) {
        std::vector<int> fv;
        for (int k : ref.faces[lf]) fv.push_back(cell.vertices[k]);
        std::vector<int> key = fv;
        std::sort(key.begin(), key.end());
        auto [it, inserted] = lookup.try_emplace(key, num_faces());
        if (inserted) {
          Face face;
          face.vertices = fv;
          face.cells[0] = c;
          face.local_face[0] = lf;
          faces_.push_back(std::move(face));
        } else {
          Face& face = faces_[it->second];
          if (face.cells[1] >= 0) {
            throw StructuralError("Mesh: face shared by more than two cells (cell " +
                                  std::to_string(c) + ")");
          }
          face.cells[1] = c;
          face.local_face[1] = lf;
        }
        cell_faces_[c][lf] = it->second;
      }
    }
    vertex_faces_.assign(vertices_.size(), {});
    vertex_cells_.assign(vertices_.size(), {});
    for (int f = 0; f < num_faces(); ++f) {
      if (faces_[f].is_boundary()) faces_[f].boundary = BoundaryKind::Dirichlet;
      for (int v : faces_[f].vertices) vertex_faces_[v].push_back(f);
    }
    for (int c = 0; c < num_cells(); ++c)
      for (int v : cells_[c].vertices) vertex_cells_[v].push_back(c);
  }

  void compute_geometry() {
    measures_.resize(cells_.size());
    centroids_.resize(cells_.size());
    h_ = 0.0;
    for (int c = 0; c < num_cells(); ++c) {
      const auto map = ref_map(c);
      const auto rule = cell_rule<Dim>(cells_[c].kind, 2);
      double m = 0.0;
      Point xc = Point::Zero();
      for (const auto& q : rule) {
        const double J = map.jacobian(q.point).J;
        m += q.weight * J;
        xc += q.weight * J * map.map_unchecked(q.point);
      }
      measures_[c] = m;
      centroids_[c] = xc / m;
      const auto& vs = cells_[c].vertices;
      for (std::size_t a = 0; a < vs.size(); ++a)
        for (std::size_t b = a + 1; b < vs.size(); ++b)
          h_ = std::max(h_, (vertices_[vs[a]] - vertices_[vs[b]]).norm());
    }
  }

  void apply_classifier(const BoundaryClassifier& classify) {
    for (int f = 0; f < num_faces(); ++f) {
      if (!faces_[f].is_boundary()) continue;
      const BoundaryKind kind = classify(face_midpoint(f));
      if (kind == BoundaryKind::Interior) {
        throw StructuralError("Mesh: boundary face " + std::to_string(f) +
                              " classified as interior");
      }
      faces_[f].boundary = kind;
    }
  }

  std::vector<Point> vertices_;
  std::vector<Cell> cells_;
  std::vector<Face> faces_;
  std::vector<std::vector<int>> cell_faces_;
  std::vector<std::vector<int>> vertex_faces_;
  std::vector<std::vector<int>> vertex_cells_;
  std::vector<double> measures_;
  std::vector<Point> centroids_;
  double h_ = 0.0;
};

/// Mesh consisting of a single reference-ordered element.
template <int Dim>
Mesh<Dim> single_cell_mesh(CellKind kind, std::vector<Vec<Dim>> vertices) {
  std::vector<int> ids(vertices.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  return Mesh<Dim>(std::move(vertices), {Cell{kind, ids}});
}

} // namespace mfmfe
