#pragma once

#include "mfmfe/dofmap.hpp"
#include "mfmfe/gauss.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace mfmfe {

template <int Dim>
using VectorFunction = std::function<Vec<Dim>(const Vec<Dim>& x)>;
template <int Dim>
using ScalarFunction = std::function<double(const Vec<Dim>& x)>;

/// Reference-cell velocity of the discrete field U on cell c at x_hat.
template <int Dim>
PiolaValue<Dim> evaluate_velocity(const Mesh<Dim>& mesh, const DofMap<Dim>& dofs,
                                  const Eigen::VectorXd& U, int c, const Vec<Dim>& xhat) {
  const auto& basis = reference_basis<Dim>(mesh.cell(c).kind);
  const auto e = basis.eval(xhat);
  const auto& table = dofs.cell_dofs(c);
  Vec<Dim> vhat = Vec<Dim>::Zero();
  double div_hat = 0.0;
  for (int j = 0; j < basis.size(); ++j) {
    const double coef = table[j].sign * U[table[j].global];
    vhat += coef * e.values[j];
    div_hat += coef * e.divergences[j];
  }
  return piola_transform<Dim>(mesh.ref_map(c), xhat, vhat, div_hat);
}

/// Global interpolant Pi_h u. On every face the pulled-back normal trace
/// v_hat . n_hat is projected in L2 onto P1 (Q1 on quadrilateral faces of
/// hexahedra); its face-vertex values, scaled by |e_hat|, are the dofs. The
/// normal flux of each face is therefore preserved, so the divergence of the
/// interpolant commutes with the L2 projection onto piecewise constants.
/// Dofs on essential (no-flow) faces are set to zero.
template <int Dim>
Eigen::VectorXd interpolate_velocity(const Mesh<Dim>& mesh, const DofMap<Dim>& dofs,
                                     const VectorFunction<Dim>& u, int order = 5) {
  Eigen::VectorXd U = Eigen::VectorXd::Zero(dofs.num_velocity_dofs());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(f);
    const int c = face.cells[0];
    const int lf = face.local_face[0];
    const auto& ref = reference_cell<Dim>(mesh.cell(c).kind);
    const auto map = mesh.ref_map(c);
    const int nfv = static_cast<int>(face.vertices.size());
    const auto rule = face_rule<Dim>(nfv, order);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nfv, nfv);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfv);
    for (const auto& q : rule) {
      const Vec<Dim> xhat = face_point<Dim>(ref, lf, q.point);
      const auto jac = map.jacobian(xhat);
      const Vec<Dim> vhat = jac.J * jac.DF.lu().solve(u(map.map_unchecked(xhat)));
      const double trace = vhat.dot(ref.normals[lf]);
      const auto phi = face_shape<Dim>(nfv, q.point);
      for (int a = 0; a < nfv; ++a) {
        rhs[a] += q.weight * trace * phi[a];
        for (int b = 0; b < nfv; ++b) M(a, b) += q.weight * phi[a] * phi[b];
      }
    }
    const Eigen::VectorXd g = M.ldlt().solve(rhs);
    for (int k = 0; k < nfv; ++k) {
      const int gdof = dofs.face_dof(f, k);
      U[gdof] = dofs.is_essential(gdof) ? 0.0 : ref.face_measures[lf] * g[k];
    }
  }
  return U;
}

/// P_h p: cell averages by 3-point-per-direction Gauss (7-point rule on
/// triangles), weighted by J.
template <int Dim>
Eigen::VectorXd project_pressure(const Mesh<Dim>& mesh, const ScalarFunction<Dim>& p) {
  Eigen::VectorXd P(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto map = mesh.ref_map(c);
    const auto rule = cell_rule<Dim>(mesh.cell(c).kind, 3);
    double acc = 0.0, m = 0.0;
    for (const auto& q : rule) {
      const double w = q.weight * map.jacobian(q.point).J;
      acc += w * p(map.map_unchecked(q.point));
      m += w;
    }
    P[c] = acc / m;
  }
  return P;
}

} // namespace mfmfe
