#pragma once

#include "mfmfe/physics.hpp"
#include "mfmfe/projection.hpp"
#include "mfmfe/quadrature.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

namespace mfmfe {

using SparseMatrix = Eigen::SparseMatrix<double>;
using RowSparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// State-independent parts of the discrete operator on one mesh: unit-density
/// quadrature blocks, the divergence matrix B and element quadrature data.
template <int Dim>
class Discretization {
public:
  Discretization(const Mesh<Dim>& mesh, TensorField<Dim> K, QuadratureVariant variant,
                 Vec<Dim> gravity = Vec<Dim>::Zero())
      : mesh_(&mesh), dofs_(mesh), K_(std::move(K)), variant_(variant), gravity_(gravity) {
    const int nc = mesh.num_cells();
    unit_blocks_.resize(nc);
    std::vector<Eigen::Triplet<double>> bt;
    quad_points_.resize(nc);
    quad_weights_.resize(nc);
    if (!gravity_.isZero()) gravity_local_.resize(nc);
    for (int c = 0; c < nc; ++c) {
      const auto map = mesh.ref_map(c);
      const auto& basis = reference_basis<Dim>(mesh.cell(c).kind);
      const std::vector<double> ones(map.vertices().size(), 1.0);
      unit_blocks_[c] = local_velocity_blocks<Dim>(
          c, map, [&](const Vec<Dim>& x) { return K_(c, x); }, ones, variant);

      // (w_E, div v_j) = |E_hat| div_hat(v_hat_j)
      const auto& table = dofs_.cell_dofs(c);
      const double mref = basis.reference().measure;
      for (int j = 0; j < basis.size(); ++j) {
        const int g = table[j].global;
        if (dofs_.is_essential(g)) continue;
        bt.emplace_back(g, c, -table[j].sign * mref * basis.divergence()[j]);
      }

      const auto rule = cell_rule<Dim>(mesh.cell(c).kind, 2);
      for (const auto& q : rule) {
        const auto jac = map.jacobian(q.point);
        quad_points_[c].push_back(map.map_unchecked(q.point));
        quad_weights_[c].push_back(q.weight * jac.J);
      }
      if (!gravity_.isZero()) {
        Eigen::VectorXd gl = Eigen::VectorXd::Zero(basis.size());
        for (const auto& q : rule) {
          const auto jac = map.jacobian(q.point);
          const auto e = basis.eval(q.point);
          for (int j = 0; j < basis.size(); ++j)
            gl[j] += q.weight * gravity_.dot(jac.DF * e.values[j]) * table[j].sign;
        }
        gravity_local_[c] = gl;
      }
    }
    B_ = std::make_shared<RowSparseMatrix>(dofs_.num_velocity_dofs(), nc);
    B_->setFromTriplets(bt.begin(), bt.end());
    B_->makeCompressed();
  }

  const Mesh<Dim>& mesh() const { return *mesh_; }
  const DofMap<Dim>& dofs() const { return dofs_; }
  QuadratureVariant variant() const { return variant_; }
  const TensorField<Dim>& permeability() const { return K_; }
  const Vec<Dim>& gravity() const { return gravity_; }

  /// B_{jE} = -(w_E, div v_j); rows of essential dofs are empty.
  const RowSparseMatrix& B() const { return *B_; }
  std::shared_ptr<const RowSparseMatrix> B_shared() const { return B_; }

  /// A with density rho_c on cell c; essential dofs get identity rows and
  /// columns.
  VertexBlockMatrix velocity_matrix(std::span<const double> cell_density) const {
    VertexBlockMatrix A(dofs_);
    for (int c = 0; c < mesh_->num_cells(); ++c) {
      if (!(cell_density[c] > 0.0)) {
        throw CoefficientError("non-positive density in cell " + std::to_string(c));
      }
      scatter_blocks<Dim>(A, dofs_, c, unit_blocks_[c], 1.0 / cell_density[c]);
    }
    for (int v = 0; v < A.num_blocks(); ++v) {
      auto& blk = A.block(v);
      for (int a = 0; a < blk.rows(); ++a) {
        if (!dofs_.is_essential(A.offset(v) + a)) continue;
        blk.row(a).setZero();
        blk.col(a).setZero();
        blk(a, a) = 1.0;
      }
    }
    return A;
  }

  /// (rho_c g, v_j) summed over cells.
  Eigen::VectorXd gravity_vector(std::span<const double> cell_density) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dofs_.num_velocity_dofs());
    if (gravity_local_.empty()) return out;
    for (int c = 0; c < mesh_->num_cells(); ++c) {
      const auto& table = dofs_.cell_dofs(c);
      for (std::size_t j = 0; j < table.size(); ++j) {
        if (dofs_.is_essential(table[j].global)) continue;
        out[table[j].global] += cell_density[c] * gravity_local_[c][j];
      }
    }
    return out;
  }

  /// <g_D, v_j . n> over Dirichlet faces.
  Eigen::VectorXd dirichlet_vector(const ScalarFunction<Dim>& gD, int order = 3) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dofs_.num_velocity_dofs());
    for (int f = 0; f < mesh_->num_faces(); ++f) {
      const Face& face = mesh_->face(f);
      if (face.boundary != BoundaryKind::Dirichlet) continue;
      const int c = face.cells[0], lf = face.local_face[0];
      const auto& ref = reference_cell<Dim>(mesh_->cell(c).kind);
      const auto map = mesh_->ref_map(c);
      const int nfv = static_cast<int>(face.vertices.size());
      const auto rule = face_rule<Dim>(nfv, order);
      double param_measure = 0.0;
      for (const auto& q : rule) param_measure += q.weight;
      for (const auto& q : rule) {
        const double g = gD(map.map_unchecked(face_point<Dim>(ref, lf, q.point)));
        const auto phi = face_shape<Dim>(nfv, q.point);
        for (int k = 0; k < nfv; ++k) out[dofs_.face_dof(f, k)] += q.weight * g * phi[k] / param_measure;
      }
    }
    return out;
  }

  /// int_E f(x, t) dx for every cell, by 2-point-per-direction Gauss.
  Eigen::VectorXd source_integrals(const std::function<double(const Vec<Dim>&, double)>& f,
                                   double t) const {
    Eigen::VectorXd out(mesh_->num_cells());
    for (int c = 0; c < mesh_->num_cells(); ++c) {
      double acc = 0.0;
      for (std::size_t q = 0; q < quad_points_[c].size(); ++q)
        acc += quad_weights_[c][q] * f(quad_points_[c][q], t);
      out[c] = acc;
    }
    return out;
  }

  const std::vector<LocalVertexBlock<Dim>>& unit_blocks(int c) const { return unit_blocks_[c]; }

private:
  const Mesh<Dim>* mesh_;
  DofMap<Dim> dofs_;
  TensorField<Dim> K_;
  QuadratureVariant variant_;
  Vec<Dim> gravity_;
  std::vector<std::vector<LocalVertexBlock<Dim>>> unit_blocks_;
  std::shared_ptr<RowSparseMatrix> B_;
  std::vector<std::vector<Vec<Dim>>> quad_points_;
  std::vector<std::vector<double>> quad_weights_;
  std::vector<Eigen::VectorXd> gravity_local_;
};

struct ResidualVector {
  Eigen::VectorXd F; ///< momentum residuals, one per velocity dof
  Eigen::VectorXd G; ///< mass residuals, one per cell

  double norm() const { return std::sqrt(F.squaredNorm() + G.squaredNorm()); }
};

/// Jacobian of the residual with the compressibility terms of dF/dP dropped.
/// C = tau * B^T is not stored separately: it shares B.
struct JacobianBlocks {
  VertexBlockMatrix A;
  std::shared_ptr<const RowSparseMatrix> B;
  Eigen::VectorXd D; ///< diagonal of D
  double tau = 0.0;

  SparseMatrix C() const { return SparseMatrix(tau * B->transpose()); }
  Eigen::VectorXd apply_C(const Eigen::VectorXd& u) const { return tau * (B->transpose() * u); }
};

/// Fully discrete backward-Euler system for one problem.
class FlowSystem {
public:
  explicit FlowSystem(const ProblemSpec& spec)
      : spec_(validated(spec)),
        disc_(spec_.mesh, spec_.permeability.on(spec_.mesh), spec_.variant, spec_.gravity) {
    dirichlet_ = disc_.dirichlet_vector(spec_.boundary_pressure);
  }

  FlowSystem(const FlowSystem&) = delete;
  FlowSystem& operator=(const FlowSystem&) = delete;

  const ProblemSpec& spec() const { return spec_; }
  const Discretization<2>& discretization() const { return disc_; }
  const Mesh<2>& mesh() const { return spec_.mesh; }
  const DofMap<2>& dofs() const { return disc_.dofs(); }
  double tau() const { return spec_.time_step; }

  std::vector<double> cell_density(const Eigen::VectorXd& P) const {
    std::vector<double> rho(P.size());
    for (Eigen::Index c = 0; c < P.size(); ++c) rho[c] = density(spec_.eos, P[c]);
    return rho;
  }

  /// tau * int_E f(t) for every cell.
  Eigen::VectorXd source_term(double t) const {
    return tau() * disc_.source_integrals(spec_.source, t);
  }

  ResidualVector residual(const VertexBlockMatrix& A, const Eigen::VectorXd& U,
                          const Eigen::VectorXd& P, const Eigen::VectorXd& P_prev,
                          const Eigen::VectorXd& tau_source) const {
    check_sizes(U, P);
    if (P_prev.size() != P.size() || tau_source.size() != P.size()) {
      throw StructuralError("residual: previous pressure or source has the wrong size");
    }
    const auto rho = cell_density(P);
    ResidualVector r;
    r.F = A.multiply(U) + disc_.B() * P + dirichlet_ - disc_.gravity_vector(rho);
    for (Eigen::Index g = 0; g < r.F.size(); ++g)
      if (disc_.dofs().is_essential(static_cast<int>(g))) r.F[g] = U[g];
    r.G.resize(P.size());
    const Eigen::VectorXd BtU = disc_.B().transpose() * U;
    const double phi = spec_.porosity;
    for (Eigen::Index c = 0; c < P.size(); ++c) {
      const double m = spec_.mesh.cell_measure(static_cast<int>(c));
      r.G[c] = -phi * rho[c] * m + tau() * BtU[c] + phi * density(spec_.eos, P_prev[c]) * m +
               tau_source[c];
    }
    return r;
  }

  ResidualVector residual(const Eigen::VectorXd& U, const Eigen::VectorXd& P,
                          const Eigen::VectorXd& P_prev, double t_next) const {
    const auto rho = cell_density(P);
    return residual(disc_.velocity_matrix(rho), U, P, P_prev, source_term(t_next));
  }

  JacobianBlocks jacobian(const Eigen::VectorXd& U, const Eigen::VectorXd& P) const {
    check_sizes(U, P);
    return jacobian(disc_.velocity_matrix(cell_density(P)), P);
  }

  JacobianBlocks jacobian(VertexBlockMatrix A, const Eigen::VectorXd& P) const {
    JacobianBlocks J;
    J.A = std::move(A);
    J.B = disc_.B_shared();
    J.tau = tau();
    J.D.resize(P.size());
    for (Eigen::Index c = 0; c < P.size(); ++c) {
      J.D[c] = -spec_.porosity * spec_.eos.c_f * density(spec_.eos, P[c]) *
               spec_.mesh.cell_measure(static_cast<int>(c));
    }
    return J;
  }

private:
  static const ProblemSpec& validated(const ProblemSpec& spec) {
    spec.validate();
    return spec;
  }

  void check_sizes(const Eigen::VectorXd& U, const Eigen::VectorXd& P) const {
    if (U.size() != disc_.dofs().num_velocity_dofs() || P.size() != spec_.mesh.num_cells()) {
      throw StructuralError("state dimensions do not match the dof map");
    }
  }

  ProblemSpec spec_;
  Discretization<2> disc_;
  Eigen::VectorXd dirichlet_;
};

inline ResidualVector assemble_residual(const FlowSystem& sys, const Eigen::VectorXd& U,
                                        const Eigen::VectorXd& P, const Eigen::VectorXd& P_prev,
                                        double t_next) {
  return sys.residual(U, P, P_prev, t_next);
}

inline JacobianBlocks assemble_jacobian(const FlowSystem& sys, const Eigen::VectorXd& U,
                                        const Eigen::VectorXd& P) {
  return sys.jacobian(U, P);
}

} // namespace mfmfe
