#pragma once

#include "mfmfe/refmap.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace mfmfe {

/// coef * x^e0 * y^e1 * z^e2
struct Monomial {
  double coef;
  std::array<int, 3> exp;
};

namespace detail {

inline double ipow(double x, int e) {
  double r = 1.0;
  for (int k = 0; k < e; ++k) r *= x;
  return r;
}

template <int Dim>
double eval_monomial(const Monomial& m, const Vec<Dim>& x) {
  double v = m.coef;
  for (int d = 0; d < Dim; ++d) v *= ipow(x[d], m.exp[d]);
  return v;
}

template <int Dim>
double eval_monomial_derivative(const Monomial& m, const Vec<Dim>& x, int dir) {
  if (m.exp[dir] == 0) return 0.0;
  double v = m.coef * m.exp[dir];
  for (int d = 0; d < Dim; ++d) v *= ipow(x[d], d == dir ? m.exp[d] - 1 : m.exp[d]);
  return v;
}

} // namespace detail

/// Vector-valued polynomial on the reference cell.
template <int Dim>
struct PolyVector {
  std::array<std::vector<Monomial>, Dim> comp;

  Vec<Dim> value(const Vec<Dim>& x) const {
    Vec<Dim> v = Vec<Dim>::Zero();
    for (int d = 0; d < Dim; ++d)
      for (const auto& m : comp[d]) v[d] += detail::eval_monomial<Dim>(m, x);
    return v;
  }

  double divergence(const Vec<Dim>& x) const {
    double s = 0.0;
    for (int d = 0; d < Dim; ++d)
      for (const auto& m : comp[d]) s += detail::eval_monomial_derivative<Dim>(m, x, d);
    return s;
  }
};

namespace detail {

template <int Dim>
PolyVector<Dim> unit_component(int d, std::array<int, 3> exp) {
  PolyVector<Dim> p;
  p.comp[d].push_back({1.0, exp});
  return p;
}

// (P1)^Dim: constant and linear monomials in each component.
template <int Dim>
std::vector<PolyVector<Dim>> linear_vectors() {
  std::vector<PolyVector<Dim>> out;
  for (int d = 0; d < Dim; ++d) {
    out.push_back(unit_component<Dim>(d, {0, 0, 0}));
    for (int k = 0; k < Dim; ++k) {
      std::array<int, 3> e{0, 0, 0};
      e[k] = 1;
      out.push_back(unit_component<Dim>(d, e));
    }
  }
  return out;
}

inline PolyVector<3> vec3(std::vector<Monomial> a, std::vector<Monomial> b,
                          std::vector<Monomial> c) {
  PolyVector<3> p;
  p.comp = {std::move(a), std::move(b), std::move(c)};
  return p;
}

template <int Dim>
std::vector<PolyVector<Dim>> spanning_set(CellKind kind) {
  auto out = linear_vectors<Dim>();
  if constexpr (Dim == 2) {
    if (kind == CellKind::Quadrilateral) {
      // curl(x^2 y) = (x^2, -2xy), curl(x y^2) = (2xy, -y^2)
      PolyVector<2> r, s;
      r.comp = {std::vector<Monomial>{{1.0, {2, 0, 0}}}, std::vector<Monomial>{{-2.0, {1, 1, 0}}}};
      s.comp = {std::vector<Monomial>{{2.0, {1, 1, 0}}}, std::vector<Monomial>{{-1.0, {0, 2, 0}}}};
      out.push_back(r);
      out.push_back(s);
    }
  } else {
    if (kind == CellKind::Hexahedron) {
      // BDDF1 supplements
      out.push_back(vec3({{1, {1, 0, 1}}}, {{-1, {0, 1, 1}}}, {}));  // curl(0,0,xyz)
      out.push_back(vec3({{2, {1, 1, 0}}}, {{-1, {0, 2, 0}}}, {}));  // curl(0,0,xy^2)
      out.push_back(vec3({}, {{1, {1, 1, 0}}}, {{-1, {1, 0, 1}}}));  // curl(xyz,0,0)
      out.push_back(vec3({}, {{2, {0, 1, 1}}}, {{-1, {0, 0, 2}}}));  // curl(yz^2,0,0)
      out.push_back(vec3({{-1, {1, 1, 0}}}, {}, {{1, {0, 1, 1}}}));  // curl(0,xyz,0)
      out.push_back(vec3({{-1, {2, 0, 0}}}, {}, {{2, {1, 0, 1}}}));  // curl(0,x^2 z,0)
      // enhancement
      out.push_back(vec3({}, {{-2, {1, 0, 1}}}, {}));                  // curl(0,0,x^2 z)
      out.push_back(vec3({{1, {2, 0, 1}}}, {{-2, {1, 1, 1}}}, {}));    // curl(0,0,x^2 yz)
      out.push_back(vec3({}, {}, {{-2, {1, 1, 0}}}));                  // curl(xy^2,0,0)
      out.push_back(vec3({}, {{1, {1, 2, 0}}}, {{-2, {1, 1, 1}}}));    // curl(xy^2 z,0,0)
      out.push_back(vec3({{-2, {0, 1, 1}}}, {}, {}));                  // curl(0,yz^2,0)
      out.push_back(vec3({{-2, {1, 1, 1}}}, {}, {{1, {0, 1, 2}}}));    // curl(0,xyz^2,0)
    }
  }
  return out;
}

} // namespace detail

/// Local velocity degree of freedom: the scaled normal component
/// |e| (v . n_e)(r) at reference vertex `vertex` of reference face `face`.
struct DofDescriptor {
  int face;
  int vertex; ///< local vertex id in the cell
};

/// Nodal velocity basis of BDM1 (triangle, square), BDDF1 (tetrahedron) or
/// enhanced BDDF1 (cube). The basis is obtained numerically by inverting the
/// matrix of degree-of-freedom functionals applied to a polynomial spanning
/// set of the space.
template <int Dim>
class BasisSet {
public:
  struct Evaluation {
    std::vector<Vec<Dim>> values;
    std::vector<double> divergences;
  };

  explicit BasisSet(CellKind kind) : kind_(kind), ref_(&reference_cell<Dim>(kind)) {
    span_ = detail::spanning_set<Dim>(kind);
    for (int f = 0; f < ref_->num_faces(); ++f)
      for (int v : ref_->faces[f]) dofs_.push_back({f, v});
    const int n = static_cast<int>(dofs_.size());
    nodal_ = functional_matrix(span_);
    if (nodal_.rows() != n || nodal_.cols() != n) {
      throw Error("BasisSet: spanning set size does not match the number of DOFs");
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(nodal_);
    if (!lu.isInvertible()) throw Error("BasisSet: singular nodal system");
    coeffs_ = lu.inverse();

    vertex_dofs_.assign(ref_->num_vertices(), {});
    for (int j = 0; j < n; ++j) vertex_dofs_[dofs_[j].vertex].push_back(j);
    vertex_values_.resize(ref_->num_vertices());
    for (int i = 0; i < ref_->num_vertices(); ++i) vertex_values_[i] = eval(ref_->vertices[i]).values;
    divergence_ = eval(ref_->centroid).divergences;
  }

  CellKind kind() const { return kind_; }
  const ReferenceCell<Dim>& reference() const { return *ref_; }
  int size() const { return static_cast<int>(dofs_.size()); }
  const std::vector<DofDescriptor>& dofs() const { return dofs_; }

  /// Local dofs whose vertex is reference vertex `v` (Dim of them).
  const std::vector<int>& dofs_at_vertex(int v) const { return vertex_dofs_[v]; }

  Evaluation eval(const Vec<Dim>& x) const {
    const int n = size();
    std::vector<Vec<Dim>> sv(span_.size());
    std::vector<double> sd(span_.size());
    for (std::size_t m = 0; m < span_.size(); ++m) {
      sv[m] = span_[m].value(x);
      sd[m] = span_[m].divergence(x);
    }
    Evaluation e{std::vector<Vec<Dim>>(n, Vec<Dim>::Zero()), std::vector<double>(n, 0.0)};
    for (int j = 0; j < n; ++j)
      for (std::size_t m = 0; m < span_.size(); ++m) {
        e.values[j] += coeffs_(m, j) * sv[m];
        e.divergences[j] += coeffs_(m, j) * sd[m];
      }
    return e;
  }

  /// Basis values at reference vertex i (all local dofs).
  const std::vector<Vec<Dim>>& vertex_values(int i) const { return vertex_values_[i]; }
  /// Reference divergences; constant on the reference cell for these spaces.
  const std::vector<double>& divergence() const { return divergence_; }

  /// Matrix of dof functionals applied to arbitrary polynomial vectors
  /// (row = dof, column = function).
  Eigen::MatrixXd functional_matrix(const std::vector<PolyVector<Dim>>& fns) const {
    Eigen::MatrixXd N(dofs_.size(), fns.size());
    for (std::size_t a = 0; a < dofs_.size(); ++a) {
      const auto& d = dofs_[a];
      const Vec<Dim>& r = ref_->vertices[d.vertex];
      const Vec<Dim>& nrm = ref_->normals[d.face];
      for (std::size_t m = 0; m < fns.size(); ++m)
        N(a, m) = ref_->face_measures[d.face] * fns[m].value(r).dot(nrm);
    }
    return N;
  }

  /// Applies the dof functionals to the nodal basis itself; the identity
  /// matrix up to rounding.
  Eigen::MatrixXd duality_matrix() const {
    const int n = size();
    Eigen::MatrixXd M(n, n);
    for (int a = 0; a < n; ++a) {
      const auto& d = dofs_[a];
      const auto e = eval(ref_->vertices[d.vertex]);
      for (int j = 0; j < n; ++j)
        M(a, j) = ref_->face_measures[d.face] * e.values[j].dot(ref_->normals[d.face]);
    }
    return M;
  }

  const std::vector<PolyVector<Dim>>& spanning_functions() const { return span_; }
  const Eigen::MatrixXd& nodal_matrix() const { return nodal_; }

private:
  CellKind kind_;
  const ReferenceCell<Dim>* ref_;
  std::vector<PolyVector<Dim>> span_;
  std::vector<DofDescriptor> dofs_;
  Eigen::MatrixXd nodal_;
  Eigen::MatrixXd coeffs_; ///< column j = coefficients of basis j in span_
  std::vector<std::vector<int>> vertex_dofs_;
  std::vector<std::vector<Vec<Dim>>> vertex_values_;
  std::vector<double> divergence_;
};

template <int Dim>
const BasisSet<Dim>& reference_basis(CellKind kind) {
  if (cell_dimension(kind) != Dim) throw DomainError("reference_basis: dimension mismatch");
  if constexpr (Dim == 2) {
    static const BasisSet<2> tri(CellKind::Triangle);
    static const BasisSet<2> quad(CellKind::Quadrilateral);
    return kind == CellKind::Triangle ? tri : quad;
  } else {
    static const BasisSet<3> tet(CellKind::Tetrahedron);
    static const BasisSet<3> hex(CellKind::Hexahedron);
    return kind == CellKind::Tetrahedron ? tet : hex;
  }
}

/// Piola-transformed value and divergence of a reference vector field.
template <int Dim>
struct PiolaValue {
  Vec<Dim> value;
  double divergence;
};

template <int Dim>
PiolaValue<Dim> piola_transform(const Mat<Dim>& DF, double J, const Vec<Dim>& vhat,
                                double div_hat) {
  return {DF * vhat / J, div_hat / J};
}

template <int Dim>
PiolaValue<Dim> piola_transform(const RefMap<Dim>& map, const Vec<Dim>& xhat,
                                const Vec<Dim>& vhat, double div_hat) {
  const auto jac = map.jacobian(xhat);
  return piola_transform<Dim>(jac.DF, jac.J, vhat, div_hat);
}

} // namespace mfmfe
