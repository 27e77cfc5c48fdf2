#include "mfmfe/mesh_generators.hpp"
#include "mfmfe/projection.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mfmfe;

namespace {

template <int Dim>
double duality_defect(CellKind kind) {
  const auto& b = reference_basis<Dim>(kind);
  return (b.duality_matrix() - Eigen::MatrixXd::Identity(b.size(), b.size())).cwiseAbs().maxCoeff();
}

std::array<Vec2, 4> random_convex_quad(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> d(-0.3, 0.3);
  const std::array<Vec2, 4> base = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  for (;;) {
    std::array<Vec2, 4> r;
    for (int i = 0; i < 4; ++i) r[i] = base[i] + Vec2(d(gen), d(gen));
    if (is_convex_quadrilateral(r)) return r;
  }
}

// Uniform grid sheared into a parallelogram mesh.
Mesh<2> parallelogram_mesh(int n) {
  const auto u = generate_mesh({MeshFamily::Uniform, n, {}});
  std::vector<Vec2> v;
  for (const auto& x : u.vertices()) v.emplace_back(x[0] + 0.3 * x[1], 0.8 * x[1] + 0.1 * x[0]);
  return Mesh<2>(v, u.cells());
}

} // namespace

TEST(Basis, Dimensions) {
  EXPECT_EQ(reference_basis<2>(CellKind::Triangle).size(), 6);
  EXPECT_EQ(reference_basis<2>(CellKind::Quadrilateral).size(), 8);
  EXPECT_EQ(reference_basis<3>(CellKind::Tetrahedron).size(), 12);
  EXPECT_EQ(reference_basis<3>(CellKind::Hexahedron).size(), 24);
}

TEST(Basis, NodalDuality) {
  EXPECT_LE(duality_defect<2>(CellKind::Triangle), 1e-12);
  EXPECT_LE(duality_defect<2>(CellKind::Quadrilateral), 1e-12);
  EXPECT_LE(duality_defect<3>(CellKind::Tetrahedron), 1e-12);
  EXPECT_LE(duality_defect<3>(CellKind::Hexahedron), 1e-12);
}

TEST(Basis, TriangleDivergenceIsConstant) {
  const auto& b = reference_basis<2>(CellKind::Triangle);
  const auto e0 = b.eval(Vec2(0.1, 0.1));
  const auto e1 = b.eval(Vec2(0.6, 0.3));
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(e0.divergences[j], e1.divergences[j], 1e-13);
}

TEST(Basis, SquareDivergenceIsConstant) {
  const auto& b = reference_basis<2>(CellKind::Quadrilateral);
  const auto e0 = b.eval(Vec2(0.1, 0.9));
  const auto e1 = b.eval(Vec2(0.7, 0.2));
  for (int j = 0; j < 8; ++j) EXPECT_NEAR(e0.divergences[j], e1.divergences[j], 1e-13);
}

TEST(Basis, SquareNormalTraceIsLinearOnEachEdge) {
  const auto& b = reference_basis<2>(CellKind::Quadrilateral);
  const auto& ref = b.reference();
  for (int f = 0; f < ref.num_faces(); ++f) {
    const Vec2 a = ref.vertices[ref.faces[f][0]], c = ref.vertices[ref.faces[f][1]];
    const auto e0 = b.eval(a), e1 = b.eval(0.7 * a + 0.3 * c), e2 = b.eval(c);
    for (int j = 0; j < 8; ++j) {
      const double t0 = e0.values[j].dot(ref.normals[f]);
      const double t1 = e1.values[j].dot(ref.normals[f]);
      const double t2 = e2.values[j].dot(ref.normals[f]);
      EXPECT_NEAR(t1, 0.7 * t0 + 0.3 * t2, 1e-13);
    }
  }
}

TEST(Basis, ContainsLinearVectorFields) {
  const auto& b = reference_basis<2>(CellKind::Quadrilateral);
  const auto& ref = b.reference();
  // v = (1 + 2x - y, 3 - x + 4y) is recovered from its dofs
  auto v = [](const Vec2& x) { return Vec2(1 + 2 * x[0] - x[1], 3 - x[0] + 4 * x[1]); };
  std::vector<double> coef;
  for (const auto& d : b.dofs())
    coef.push_back(ref.face_measures[d.face] * v(ref.vertices[d.vertex]).dot(ref.normals[d.face]));
  for (const Vec2 x : {Vec2(0.2, 0.4), Vec2(0.9, 0.1)}) {
    const auto e = b.eval(x);
    Vec2 s = Vec2::Zero();
    for (int j = 0; j < 8; ++j) s += coef[j] * e.values[j];
    EXPECT_LE((s - v(x)).norm(), 1e-13);
  }
}

TEST(Basis, HexahedronNodalSystemHasFullRank) {
  const auto& b = reference_basis<3>(CellKind::Hexahedron);
  const Eigen::MatrixXd& N = b.nodal_matrix();
  ASSERT_EQ(N.rows(), 24);
  ASSERT_EQ(N.cols(), 24);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(N);
  EXPECT_EQ(qr.rank(), 24);
}

TEST(Piola, IdentityMap) {
  RefMap<2> m(CellKind::Quadrilateral, {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)});
  const auto p = piola_transform<2>(m, Vec2(0.3, 0.6), Vec2(1.5, -2), 0.7);
  EXPECT_LE((p.value - Vec2(1.5, -2)).norm(), 1e-15);
  EXPECT_NEAR(p.divergence, 0.7, 1e-15);
}

TEST(Piola, ScaledTriangle) {
  const double h = 0.25;
  RefMap<2> m(CellKind::Triangle, {Vec2(0, 0), Vec2(h, 0), Vec2(0, h)});
  const auto p = piola_transform<2>(m, Vec2(0.2, 0.2), Vec2(1, 0), 2.0);
  EXPECT_LE((p.value - Vec2(1 / h, 0)).norm(), 1e-13);
  EXPECT_NEAR(p.divergence, 2.0 / (h * h), 1e-12);
}

TEST(Piola, NormalFluxIsPreservedOnRandomQuadrilaterals) {
  std::mt19937_64 gen(2024);
  const auto& b = reference_basis<2>(CellKind::Quadrilateral);
  const auto& ref = b.reference();
  const auto rule = gauss_legendre(5);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = random_convex_quad(gen);
    RefMap<2> m(CellKind::Quadrilateral, {r[0], r[1], r[2], r[3]});
    for (int f = 0; f < 4; ++f) {
      const Vec2 a = r[ref.faces[f][0]], c = r[ref.faces[f][1]];
      const Vec2 t = c - a;
      const Vec2 n = Vec2(t[1], -t[0]).normalized();
      for (int j = 0; j < 8; ++j) {
        double phys = 0.0, refv = 0.0;
        for (const auto& q : rule) {
          const Vec2 xh = face_point<2>(ref, f, q.point);
          const auto e = b.eval(xh);
          const auto v = piola_transform<2>(m, xh, e.values[j], e.divergences[j]);
          phys += q.weight * t.norm() * v.value.dot(n);
          refv += q.weight * ref.face_measures[f] * e.values[j].dot(ref.normals[f]);
        }
        worst = std::max(worst, std::abs(phys - refv));
      }
    }
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(DofMap, TwoByTwoCounts) {
  const auto mesh = generate_mesh({MeshFamily::Uniform, 2, {}});
  const DofMap<2> dofs(mesh);
  EXPECT_EQ(dofs.num_velocity_dofs(), 24);
  EXPECT_EQ(dofs.num_pressure_dofs(), 4);
  EXPECT_EQ(dofs.group_size(4), 4);
  EXPECT_EQ(dofs.group_size(0), 2);
  EXPECT_EQ(dofs.group_size(1), 3);
  int total = 0;
  for (int v = 0; v < dofs.num_groups(); ++v) total += dofs.group_size(v);
  EXPECT_EQ(total, dofs.num_velocity_dofs());
}

TEST(DofMap, GroupsArePartition) {
  const auto mesh = generate_mesh({MeshFamily::Smooth, 6, {}});
  const DofMap<2> dofs(mesh);
  for (int v = 0; v < dofs.num_groups(); ++v) {
    EXPECT_EQ(dofs.group_size(v), static_cast<int>(mesh.vertex_faces(v).size()));
    for (int g = dofs.group_offset(v); g < dofs.group_offset(v) + dofs.group_size(v); ++g)
      EXPECT_EQ(dofs.dof_vertex(g), v);
  }
}

TEST(DofMap, SharedFacesHaveOppositeSigns) {
  const auto mesh = generate_mesh({MeshFamily::Kershaw, 4, {}});
  const DofMap<2> dofs(mesh);
  std::vector<int> sum(dofs.num_velocity_dofs(), 0), count(dofs.num_velocity_dofs(), 0);
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (const auto& d : dofs.cell_dofs(c)) {
      sum[d.global] += d.sign;
      ++count[d.global];
    }
  for (int g = 0; g < dofs.num_velocity_dofs(); ++g) {
    if (mesh.face(dofs.dof_face(g)).is_boundary()) {
      EXPECT_EQ(count[g], 1);
    } else {
      EXPECT_EQ(count[g], 2);
      EXPECT_EQ(sum[g], 0);
    }
  }
}

TEST(DofMap, NeumannDofsAreEssential) {
  const auto mesh = generate_mesh({MeshFamily::Uniform, 3, {}}).with_boundary([](const Vec2& m) {
    return m[1] < 1e-12 ? BoundaryKind::Neumann : BoundaryKind::Dirichlet;
  });
  const DofMap<2> dofs(mesh);
  int essential = 0;
  for (int g = 0; g < dofs.num_velocity_dofs(); ++g) essential += dofs.is_essential(g);
  EXPECT_EQ(essential, 6);
}

TEST(Interpolant, ReproducesConstantsOnParallelograms) {
  const auto mesh = parallelogram_mesh(3);
  const DofMap<2> dofs(mesh);
  const Vec2 u0(0.7, -1.3);
  const Eigen::VectorXd U = interpolate_velocity<2>(mesh, dofs, [&](const Vec2&) { return u0; });
  double worst = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (const Vec2 xh : {Vec2(0, 0), Vec2(0.5, 0.5), Vec2(1, 0.3), Vec2(0.2, 0.9)})
      worst = std::max(worst, (evaluate_velocity<2>(mesh, dofs, U, c, xh).value - u0).norm());
  EXPECT_LE(worst, 1e-12);
}

TEST(Interpolant, ReproducesLinearFieldsOnSquares) {
  const auto mesh = generate_mesh({MeshFamily::Uniform, 4, {}});
  const DofMap<2> dofs(mesh);
  auto u = [](const Vec2& x) { return Vec2(1 + x[0] - 2 * x[1], 0.5 * x[0] + x[1]); };
  const Eigen::VectorXd U = interpolate_velocity<2>(mesh, dofs, u);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Vec2 xh(0.3, 0.8);
    const Vec2 x = mesh.ref_map(c).map(xh);
    EXPECT_LE((evaluate_velocity<2>(mesh, dofs, U, c, xh).value - u(x)).norm(), 1e-12);
  }
}

TEST(Interpolant, CommutesWithDivergence) {
  const auto mesh = generate_mesh({MeshFamily::Smooth, 4, {}});
  const DofMap<2> dofs(mesh);
  auto u = [](const Vec2& x) { return Vec2(x[0] * x[0], x[0] * x[1]); };
  auto div_u = [](const Vec2& x) { return 3 * x[0]; };
  const Eigen::VectorXd U = interpolate_velocity<2>(mesh, dofs, u);
  const auto rule = tensor_gauss<2>(3);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto map = mesh.ref_map(c);
    double acc = 0.0;
    for (const auto& q : rule) {
      const double J = map.jacobian(q.point).J;
      const auto v = evaluate_velocity<2>(mesh, dofs, U, c, q.point);
      acc += q.weight * J * (v.divergence - div_u(map.map_unchecked(q.point)));
    }
    EXPECT_LE(std::abs(acc), 1e-10) << "cell " << c;
  }
}

TEST(Interpolant, EssentialDofsAreZero) {
  const auto mesh = generate_mesh({MeshFamily::Uniform, 3, {}}).with_boundary(
      [](const Vec2&) { return BoundaryKind::Neumann; });
  const DofMap<2> dofs(mesh);
  const Eigen::VectorXd U =
      interpolate_velocity<2>(mesh, dofs, [](const Vec2& x) { return Vec2(1 + x[1], 2 - x[0]); });
  for (int g = 0; g < dofs.num_velocity_dofs(); ++g)
    if (dofs.is_essential(g)) EXPECT_EQ(U[g], 0.0);
}

TEST(PressureProjection, LinearFunctionOnTwoByTwo) {
  const auto mesh = generate_mesh({MeshFamily::Uniform, 2, {}});
  const Eigen::VectorXd P = project_pressure<2>(mesh, [](const Vec2& x) { return x[0]; });
  ASSERT_EQ(P.size(), 4);
  EXPECT_NEAR(P[0], 0.25, 1e-15);
  EXPECT_NEAR(P[1], 0.75, 1e-15);
  EXPECT_NEAR(P[2], 0.25, 1e-15);
  EXPECT_NEAR(P[3], 0.75, 1e-15);
}

TEST(PressureProjection, OrthogonalToDivergenceOfEveryBasis) {
  const auto mesh = generate_mesh({MeshFamily::Uniform, 2, {}});
  const DofMap<2> dofs(mesh);
  auto p = [](const Vec2& x) { return x[0] * x[0] * x[1]; };
  const Eigen::VectorXd P = project_pressure<2>(mesh, p);
  const auto rule = tensor_gauss<2>(3);
  for (int g = 0; g < dofs.num_velocity_dofs(); ++g) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dofs.num_velocity_dofs());
    e[g] = 1.0;
    double acc = 0.0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto map = mesh.ref_map(c);
      for (const auto& q : rule) {
        const double J = map.jacobian(q.point).J;
        const double dv = evaluate_velocity<2>(mesh, dofs, e, c, q.point).divergence;
        acc += q.weight * J * dv * (P[c] - p(map.map_unchecked(q.point)));
      }
    }
    EXPECT_LE(std::abs(acc), 1e-10) << "dof " << g;
  }
}
