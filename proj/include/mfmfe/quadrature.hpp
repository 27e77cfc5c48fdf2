#pragma once

#include "mfmfe/dofmap.hpp"
#include "mfmfe/gauss.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace mfmfe {

enum class QuadratureVariant { Symmetric, NonSymmetric };

inline std::string_view to_string(QuadratureVariant v) {
  return v == QuadratureVariant::Symmetric ? "symmetric" : "nonsymmetric";
}

inline QuadratureVariant parse_variant(std::string_view s) {
  if (s == "symmetric") return QuadratureVariant::Symmetric;
  if (s == "nonsymmetric" || s == "non-symmetric") return QuadratureVariant::NonSymmetric;
  throw ParameterError("unknown quadrature variant '" + std::string(s) + "'");
}

/// Tensor coefficient K evaluated at a physical point of one cell.
template <int Dim>
using CellTensorFunction = std::function<Mat<Dim>(const Vec<Dim>& x)>;

/// The d x d matrix coupling the velocity dofs of one cell that meet at one
/// of its corners.
template <int Dim>
struct LocalVertexBlock {
  int cell;
  int vertex;                    ///< local vertex id
  std::array<int, Dim> local_dofs;
  Mat<Dim> block;                ///< block(a, b) = (K^-1 rho^-1 v_b, v_a) at this corner
};

namespace detail {

template <int Dim>
Mat<Dim> checked_inverse(const Mat<Dim>& K, int cell) {
  const double scale = K.cwiseAbs().maxCoeff();
  if (!K.allFinite() || !(scale > 0.0) ||
      (K - K.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw CoefficientError("permeability is not symmetric in cell " + std::to_string(cell));
  }
  Eigen::LLT<Mat<Dim>> llt(K);
  if (llt.info() != Eigen::Success) {
    throw CoefficientError("permeability is not positive definite in cell " +
                           std::to_string(cell));
  }
  return llt.solve(Mat<Dim>::Identity());
}

} // namespace detail

/// Mean of K over a cell, by 2-point-per-direction Gauss weighted by J.
template <int Dim>
Mat<Dim> mean_tensor(const RefMap<Dim>& map, const CellTensorFunction<Dim>& K) {
  const auto rule = cell_rule<Dim>(map.kind(), 2);
  Mat<Dim> acc = Mat<Dim>::Zero();
  double measure = 0.0;
  for (const auto& q : rule) {
    const double J = map.jacobian(q.point).J;
    acc += q.weight * J * K(map.map_unchecked(q.point));
    measure += q.weight * J;
  }
  return acc / measure;
}

/// Vertex (trapezoidal) quadrature of (K^-1 rho^-1 q, v) on one cell, split
/// into one block per corner. `rho` holds the density sample at each vertex.
template <int Dim>
std::vector<LocalVertexBlock<Dim>> local_velocity_blocks(int cell, const RefMap<Dim>& map,
                                                         const CellTensorFunction<Dim>& K,
                                                         std::span<const double> rho,
                                                         QuadratureVariant variant) {
  const CellKind kind = map.kind();
  const auto& basis = reference_basis<Dim>(kind);
  const auto& ref = basis.reference();
  const int nv = ref.num_vertices();
  if (static_cast<int>(rho.size()) != nv) {
    throw StructuralError("local_velocity_blocks: expected one density per vertex");
  }
  for (double r : rho) {
    if (!(r > 0.0)) throw CoefficientError("non-positive density in cell " + std::to_string(cell));
  }
  if (variant == QuadratureVariant::NonSymmetric && is_simplex(kind)) {
    throw VariantError("the non-symmetric quadrature rule requires quadrilateral or hexahedral "
                       "cells");
  }
  const double w = ref.measure / nv;

  Mat<Dim> mean_part = Mat<Dim>::Zero(); // DF(x_c)^T Kbar^-1 rhobar^-1
  if (variant == QuadratureVariant::NonSymmetric) {
    double rho_bar = 0.0;
    for (double r : rho) rho_bar += r;
    rho_bar /= nv;
    const Mat<Dim> Kbar_inv = detail::checked_inverse<Dim>(mean_tensor<Dim>(map, K), cell);
    mean_part = map.jacobian(ref.centroid).DF.transpose() * Kbar_inv / rho_bar;
  }

  std::vector<LocalVertexBlock<Dim>> out;
  out.reserve(nv);
  for (int i = 0; i < nv; ++i) {
    const auto jac = map.jacobian(ref.vertices[i]);
    Mat<Dim> Kmap; // mapped inverse coefficient at the corner
    if (variant == QuadratureVariant::Symmetric) {
      const Mat<Dim> Kinv = detail::checked_inverse<Dim>(K(map.vertex(i)), cell);
      Kmap = jac.DF.transpose() * Kinv * jac.DF / (jac.J * rho[i]);
    } else {
      Kmap = mean_part * jac.DF / jac.J;
    }
    LocalVertexBlock<Dim> b;
    b.cell = cell;
    b.vertex = i;
    const auto& ids = basis.dofs_at_vertex(i);
    const auto& vals = basis.vertex_values(i);
    for (int a = 0; a < Dim; ++a) b.local_dofs[a] = ids[a];
    for (int a = 0; a < Dim; ++a)
      for (int c = 0; c < Dim; ++c) b.block(a, c) = w * vals[ids[a]].dot(Kmap * vals[ids[c]]);
    out.push_back(b);
  }
  return out;
}

/// Block-diagonal matrix with one dense block per mesh vertex, indexed by
/// the vertex-grouped velocity numbering of a DofMap.
class VertexBlockMatrix {
public:
  VertexBlockMatrix() = default;

  template <int Dim>
  explicit VertexBlockMatrix(const DofMap<Dim>& dofs) {
    offsets_.resize(dofs.num_groups() + 1);
    blocks_.resize(dofs.num_groups());
    for (int v = 0; v < dofs.num_groups(); ++v) {
      offsets_[v] = dofs.group_offset(v);
      blocks_[v] = Eigen::MatrixXd::Zero(dofs.group_size(v), dofs.group_size(v));
    }
    offsets_.back() = dofs.num_velocity_dofs();
    group_of_.resize(dofs.num_velocity_dofs());
    for (int v = 0; v < dofs.num_groups(); ++v)
      for (int g = offsets_[v]; g < offsets_[v + 1]; ++g) group_of_[g] = v;
  }

  int rows() const { return offsets_.empty() ? 0 : offsets_.back(); }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  int offset(int v) const { return offsets_[v]; }
  int block_size(int v) const { return offsets_[v + 1] - offsets_[v]; }
  int group_of(int g) const { return group_of_[g]; }

  Eigen::MatrixXd& block(int v) { return blocks_[v]; }
  const Eigen::MatrixXd& block(int v) const { return blocks_[v]; }

  /// Adds `value` at global position (i, j); both must be in the same group.
  void add(int i, int j, double value) {
    const int v = group_of_[i];
    if (group_of_[j] != v) throw StructuralError("VertexBlockMatrix: entry couples two vertices");
    blocks_[v](i - offsets_[v], j - offsets_[v]) += value;
  }

  double operator()(int i, int j) const {
    const int v = group_of_[i];
    if (group_of_[j] != v) return 0.0;
    return blocks_[v](i - offsets_[v], j - offsets_[v]);
  }

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(rows());
    for (int v = 0; v < num_blocks(); ++v) {
      const int n = block_size(v);
      y.segment(offsets_[v], n) = blocks_[v] * x.segment(offsets_[v], n);
    }
    return y;
  }

  Eigen::SparseMatrix<double> to_sparse() const {
    std::vector<Eigen::Triplet<double>> t;
    for (int v = 0; v < num_blocks(); ++v)
      for (int a = 0; a < block_size(v); ++a)
        for (int b = 0; b < block_size(v); ++b)
          if (blocks_[v](a, b) != 0.0) t.emplace_back(offsets_[v] + a, offsets_[v] + b, blocks_[v](a, b));
    Eigen::SparseMatrix<double> S(rows(), rows());
    S.setFromTriplets(t.begin(), t.end());
    return S;
  }

private:
  std::vector<int> offsets_;
  std::vector<int> group_of_;
  std::vector<Eigen::MatrixXd> blocks_;
};

/// Scatters local corner blocks of cell `c` into the global block matrix,
/// scaled by `scale`.
template <int Dim>
void scatter_blocks(VertexBlockMatrix& A, const DofMap<Dim>& dofs, int c,
                    std::span<const LocalVertexBlock<Dim>> blocks, double scale = 1.0) {
  const auto& table = dofs.cell_dofs(c);
  for (const auto& b : blocks) {
    for (int a = 0; a < Dim; ++a) {
      const LocalDof& ra = table[b.local_dofs[a]];
      for (int e = 0; e < Dim; ++e) {
        const LocalDof& re = table[b.local_dofs[e]];
        A.add(ra.global, re.global, scale * ra.sign * re.sign * b.block(a, e));
      }
    }
  }
}

/// Cell-wise coefficient: K at physical point x of cell c.
template <int Dim>
using TensorField = std::function<Mat<Dim>(int cell, const Vec<Dim>& x)>;

/// Global matrix A of the quadrature form, with density rho(P_E) constant on
/// each cell.
template <int Dim>
VertexBlockMatrix assemble_velocity_matrix(const Mesh<Dim>& mesh, const DofMap<Dim>& dofs,
                                           const TensorField<Dim>& K,
                                           std::span<const double> cell_density,
                                           QuadratureVariant variant) {
  if (static_cast<int>(cell_density.size()) != mesh.num_cells()) {
    throw StructuralError("assemble_velocity_matrix: density field has the wrong size");
  }
  VertexBlockMatrix A(dofs);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto map = mesh.ref_map(c);
    const std::vector<double> rho(map.vertices().size(), cell_density[c]);
    const auto blocks = local_velocity_blocks<Dim>(
        c, map, [&](const Vec<Dim>& x) { return K(c, x); }, rho, variant);
    scatter_blocks<Dim>(A, dofs, c, blocks);
  }
  return A;
}

/// (K^-1 rho^-1 q, v)_Q for velocity coefficient vectors q and v.
template <int Dim>
double quadrature_bilinear_form(const Mesh<Dim>& mesh, const DofMap<Dim>& dofs,
                                const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                                const TensorField<Dim>& K, std::span<const double> cell_density,
                                QuadratureVariant variant) {
  if (q.size() != dofs.num_velocity_dofs() || v.size() != dofs.num_velocity_dofs()) {
    throw StructuralError("quadrature_bilinear_form: field size does not match the dof map");
  }
  const auto A = assemble_velocity_matrix<Dim>(mesh, dofs, K, cell_density, variant);
  return v.dot(A.multiply(q));
}

} // namespace mfmfe
