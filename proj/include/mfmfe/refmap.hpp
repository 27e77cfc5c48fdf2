#pragma once

#include "mfmfe/reference.hpp"

#include <array>
#include <sstream>
#include <utility>
#include <vector>

namespace mfmfe {

/// Shape functions of the affine / bilinear / trilinear reference mapping.
/// Values and reference gradients at a reference point.
template <int Dim>
struct ShapeValues {
  std::array<double, 8> value{};
  std::array<Vec<Dim>, 8> gradient{};
};

template <int Dim>
ShapeValues<Dim> mapping_shape(CellKind kind, const Vec<Dim>& x) {
  ShapeValues<Dim> s;
  if constexpr (Dim == 2) {
    const double X = x[0], Y = x[1];
    if (kind == CellKind::Triangle) {
      s.value[0] = 1 - X - Y;
      s.value[1] = X;
      s.value[2] = Y;
      s.gradient[0] = Vec2(-1, -1);
      s.gradient[1] = Vec2(1, 0);
      s.gradient[2] = Vec2(0, 1);
    } else {
      s.value[0] = (1 - X) * (1 - Y);
      s.value[1] = X * (1 - Y);
      s.value[2] = X * Y;
      s.value[3] = (1 - X) * Y;
      s.gradient[0] = Vec2(-(1 - Y), -(1 - X));
      s.gradient[1] = Vec2(1 - Y, -X);
      s.gradient[2] = Vec2(Y, X);
      s.gradient[3] = Vec2(-Y, 1 - X);
    }
  } else {
    const double X = x[0], Y = x[1], Z = x[2];
    if (kind == CellKind::Tetrahedron) {
      s.value[0] = 1 - X - Y - Z;
      s.value[1] = X;
      s.value[2] = Y;
      s.value[3] = Z;
      s.gradient[0] = Vec3(-1, -1, -1);
      s.gradient[1] = Vec3(1, 0, 0);
      s.gradient[2] = Vec3(0, 1, 0);
      s.gradient[3] = Vec3(0, 0, 1);
    } else {
      // vertex i of the unit cube sits at (bx, by, bz)
      static constexpr int bx[8] = {0, 1, 1, 0, 0, 1, 1, 0};
      static constexpr int by[8] = {0, 0, 1, 1, 0, 0, 1, 1};
      static constexpr int bz[8] = {0, 0, 0, 0, 1, 1, 1, 1};
      for (int i = 0; i < 8; ++i) {
        const double fx = bx[i] ? X : 1 - X, dx = bx[i] ? 1 : -1;
        const double fy = by[i] ? Y : 1 - Y, dy = by[i] ? 1 : -1;
        const double fz = bz[i] ? Z : 1 - Z, dz = bz[i] ? 1 : -1;
        s.value[i] = fx * fy * fz;
        s.gradient[i] = Vec3(dx * fy * fz, fx * dy * fz, fx * fy * dz);
      }
    }
  }
  return s;
}

/// Mapping F_E from the reference cell onto a physical element, given the
/// physical vertices in reference order (counterclockwise for 2D cells).
template <int Dim>
class RefMap {
public:
  struct Jacobian {
    Mat<Dim> DF;
    double J; ///< |det DF|
  };

  RefMap() = default;

  RefMap(CellKind kind, std::vector<Vec<Dim>> vertices)
      : kind_(kind), vertices_(std::move(vertices)) {
    if (cell_dimension(kind) != Dim) {
      throw DomainError("RefMap: cell kind does not match the space dimension");
    }
    if (static_cast<int>(vertices_.size()) != mfmfe::num_vertices(kind)) {
      throw DomainError("RefMap: expected " + std::to_string(mfmfe::num_vertices(kind)) +
                        " vertices, got " + std::to_string(vertices_.size()));
    }
  }

  CellKind kind() const { return kind_; }
  const std::vector<Vec<Dim>>& vertices() const { return vertices_; }
  const Vec<Dim>& vertex(int i) const { return vertices_[i]; }
  bool is_affine() const { return is_simplex(kind_); }

  Vec<Dim> map(const Vec<Dim>& xhat) const {
    check_inside(xhat);
    return map_unchecked(xhat);
  }

  Jacobian jacobian(const Vec<Dim>& xhat) const {
    check_inside(xhat);
    const Mat<Dim> DF = derivative_unchecked(xhat);
    const double det = DF.determinant();
    if (!(det > 0.0)) {
      std::ostringstream os;
      os << "degenerate element: det DF = " << det << " at reference point ("
         << xhat.transpose() << ")";
      throw DegenerateElementError(os.str());
    }
    return {DF, det};
  }

  Vec<Dim> map_unchecked(const Vec<Dim>& xhat) const {
    const auto s = mapping_shape<Dim>(kind_, xhat);
    Vec<Dim> x = Vec<Dim>::Zero();
    for (std::size_t i = 0; i < vertices_.size(); ++i) x += s.value[i] * vertices_[i];
    return x;
  }

  Mat<Dim> derivative_unchecked(const Vec<Dim>& xhat) const {
    const auto s = mapping_shape<Dim>(kind_, xhat);
    Mat<Dim> DF = Mat<Dim>::Zero();
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      DF += vertices_[i] * s.gradient[i].transpose();
    }
    return DF;
  }

private:
  void check_inside(const Vec<Dim>& xhat) const {
    if (!in_reference_cell<Dim>(kind_, xhat)) {
      std::ostringstream os;
      os << "reference point (" << xhat.transpose() << ") lies outside the reference "
         << to_string(kind_);
      throw DomainError(os.str());
    }
  }

  CellKind kind_ = CellKind::Quadrilateral;
  std::vector<Vec<Dim>> vertices_;
};

/// Opposite-edge mismatch |r1 - r2 + r3 - r4| of a quadrilateral (or of a
/// hexahedron face given by its four corners in cyclic order).
template <int Dim>
double h2_parallelogram_defect(const Vec<Dim>& r1, const Vec<Dim>& r2, const Vec<Dim>& r3,
                               const Vec<Dim>& r4) {
  return (r1 - r2 + r3 - r4).norm();
}

template <int Dim>
double h2_parallelogram_defect(const RefMap<Dim>& map) {
  if (map.kind() != CellKind::Quadrilateral) {
    throw DomainError("h2_parallelogram_defect: requires a quadrilateral, got " +
                      std::string(to_string(map.kind())));
  }
  const auto& r = map.vertices();
  return h2_parallelogram_defect<Dim>(r[0], r[1], r[2], r[3]);
}

/// Largest face defect of a hexahedron; zero iff every face is planar and a
/// parallelogram.
inline double h2_parallelepiped_defect(const RefMap<3>& map) {
  if (map.kind() != CellKind::Hexahedron) {
    throw DomainError("h2_parallelepiped_defect: requires a hexahedron");
  }
  const auto& ref = reference_cell<3>(CellKind::Hexahedron);
  const auto& r = map.vertices();
  double worst = 0.0;
  for (const auto& f : ref.faces) {
    worst = std::max(worst, h2_parallelogram_defect<3>(r[f[0]], r[f[1]], r[f[2]], r[f[3]]));
  }
  return worst;
}

} // namespace mfmfe
