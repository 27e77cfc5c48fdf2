#include "mfmfe/mesh_generators.hpp"
#include "mfmfe/newton.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mfmfe;

namespace {

ProblemSpec manufactured(MeshFamily fam, int n, QuadratureVariant variant = QuadratureVariant::Symmetric,
                         std::optional<std::uint64_t> seed = {}) {
  return manufactured_problem(generate_mesh({fam, n, seed}), variant);
}

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& gen) {
  std::normal_distribution<double> d;
  Eigen::VectorXd x(n);
  for (auto& v : x) v = d(gen);
  return x;
}

// Assembles the full linearised system [A B; C D] as a dense matrix.
Eigen::MatrixXd dense_kkt(const JacobianBlocks& J) {
  const Eigen::MatrixXd A = Eigen::MatrixXd(J.A.to_sparse());
  const Eigen::MatrixXd B = Eigen::MatrixXd(*J.B);
  const Eigen::Index L = A.rows(), N = B.cols();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(L + N, L + N);
  K.topLeftCorner(L, L) = A;
  K.topRightCorner(L, N) = B;
  K.bottomLeftCorner(N, L) = J.tau * B.transpose();
  K.bottomRightCorner(N, N) = J.D.asDiagonal();
  return K;
}

} // namespace

TEST(Schur, SingleCellIsPositiveScalar) {
  auto spec = manufactured_problem(
      Mesh<2>({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}, {Cell{CellKind::Quadrilateral, {0, 1, 2, 3}}}),
      QuadratureVariant::Symmetric);
  spec.eos.c_f = 0.0;
  const FlowSystem sys(spec);
  const Eigen::VectorXd U = Eigen::VectorXd::Zero(8), P = Eigen::VectorXd::Zero(1);
  const auto J = sys.jacobian(U, P);
  const auto r = sys.residual(U, P, P, 0.1);
  const auto s = eliminate_velocity(J, r);
  ASSERT_EQ(s.S.rows(), 1);
  EXPECT_GT(s.S.coeff(0, 0), 0.0);
}

TEST(Schur, NinePointStencil) {
  auto spec = manufactured(MeshFamily::Uniform, 8);
  const FlowSystem sys(spec);
  const Eigen::VectorXd U = Eigen::VectorXd::Zero(sys.dofs().num_velocity_dofs());
  const Eigen::VectorXd P = Eigen::VectorXd::Zero(64);
  const auto s = eliminate_velocity(sys.jacobian(U, P), sys.residual(U, P, P, 0.1));
  const Eigen::SparseMatrix<double, Eigen::RowMajor> S = s.S;
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) {
      const int row = j * 8 + i;
      int nnz = 0;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(S, row); it; ++it)
        nnz += it.value() != 0.0;
      const bool interior = i > 0 && j > 0 && i < 7 && j < 7;
      if (interior) EXPECT_EQ(nnz, 9) << "row " << row;
      else EXPECT_LT(nnz, 9) << "row " << row;
    }
}

TEST(Schur, SymmetricPositiveDefiniteOnSmoothMesh) {
  const FlowSystem sys(manufactured(MeshFamily::Smooth, 16));
  const Eigen::VectorXd U = Eigen::VectorXd::Zero(sys.dofs().num_velocity_dofs());
  const Eigen::VectorXd P = Eigen::VectorXd::Constant(256, 0.3);
  const auto s = eliminate_velocity(sys.jacobian(U, P), sys.residual(U, P, P, 0.1));
  const SparseMatrix St = s.S.transpose();
  const double asym = Eigen::MatrixXd(s.S - St).cwiseAbs().maxCoeff();
  EXPECT_LE(asym, 1e-12);
  Eigen::SimplicialLLT<SparseMatrix> llt(s.S);
  EXPECT_EQ(llt.info(), Eigen::Success);
}

TEST(Schur, BackSubstitutionSatisfiesMomentumRows) {
  const FlowSystem sys(manufactured(MeshFamily::Kershaw, 8));
  std::mt19937_64 gen(12);
  const Eigen::VectorXd U = random_vector(sys.dofs().num_velocity_dofs(), gen);
  const Eigen::VectorXd P = random_vector(64, gen);
  const auto J = sys.jacobian(U, P);
  const auto r = sys.residual(U, P, P, 0.1);
  const auto s = eliminate_velocity(J, r);
  const Eigen::VectorXd dP = random_vector(64, gen);
  const Eigen::VectorXd dU = back_substitute(s, J, dP, r.F);
  const Eigen::VectorXd res = J.A.multiply(dU) + (*J.B) * dP + r.F;
  EXPECT_LE(res.cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, r.F.cwiseAbs().maxCoeff()));
}

TEST(Schur, MatchesDirectSaddlePointSolve) {
  for (auto variant : {QuadratureVariant::Symmetric, QuadratureVariant::NonSymmetric}) {
    const FlowSystem sys(manufactured(MeshFamily::Smooth, 2, variant));
    std::mt19937_64 gen(3);
    const Eigen::VectorXd U = random_vector(sys.dofs().num_velocity_dofs(), gen);
    const Eigen::VectorXd P = random_vector(4, gen);
    const auto J = sys.jacobian(U, P);
    const auto r = sys.residual(U, P, P, 0.1);
    const auto s = eliminate_velocity(J, r, variant);
    const Eigen::VectorXd dP = solve_schur(s.S, s.rhs, sys.spec().solver, variant);
    const Eigen::VectorXd dU = back_substitute(s, J, dP, r.F);

    const Eigen::MatrixXd K = dense_kkt(J);
    Eigen::VectorXd rhs(K.rows());
    rhs << -r.F, -r.G;
    const Eigen::VectorXd x = K.fullPivLu().solve(rhs);
    const Eigen::Index L = dU.size();
    EXPECT_LE((x.head(L) - dU).cwiseAbs().maxCoeff(), 1e-10) << to_string(variant);
    EXPECT_LE((x.tail(4) - dP).cwiseAbs().maxCoeff(), 1e-10) << to_string(variant);
  }
}

TEST(Schur, NonSymmetricEliminationReportsSingularBlock) {
  const FlowSystem sys(manufactured(MeshFamily::Uniform, 2));
  const Eigen::VectorXd U = Eigen::VectorXd::Zero(sys.dofs().num_velocity_dofs());
  const Eigen::VectorXd P = Eigen::VectorXd::Zero(4);
  auto J = sys.jacobian(U, P);
  J.A.block(4).setZero();
  try {
    eliminate_velocity(J, sys.residual(U, P, P, 0.1), QuadratureVariant::NonSymmetric);
    FAIL() << "expected an elimination error";
  } catch (const EliminationError& e) {
    EXPECT_EQ(e.vertex(), 4);
  }
  EXPECT_THROW(eliminate_velocity(J, sys.residual(U, P, P, 0.1)), EliminationError);
}

TEST(LinearSolver, ConjugateGradientOnNinePointMatrix) {
  const FlowSystem sys(manufactured(MeshFamily::Uniform, 16));
  const Eigen::VectorXd U = Eigen::VectorXd::Zero(sys.dofs().num_velocity_dofs());
  const Eigen::VectorXd P = Eigen::VectorXd::Zero(256);
  const auto s = eliminate_velocity(sys.jacobian(U, P), sys.residual(U, P, P, 0.1));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(256);
  rhs[0] = 1.0;
  SolverConfig cfg;
  cfg.linear_solver = SolverConfig::LinearSolver::ConjugateGradient;
  LinearSolveInfo info;
  const Eigen::VectorXd x = solve_schur(s.S, rhs, cfg, QuadratureVariant::Symmetric, &info);
  EXPECT_LE((s.S * x - rhs).norm(), 1e-10 * rhs.norm());
  EXPECT_GT(info.iterations, 0);
}

TEST(LinearSolver, IterationLimitRaises) {
  const FlowSystem sys(manufactured(MeshFamily::Uniform, 16));
  const Eigen::VectorXd U = Eigen::VectorXd::Zero(sys.dofs().num_velocity_dofs());
  const Eigen::VectorXd P = Eigen::VectorXd::Zero(256);
  const auto s = eliminate_velocity(sys.jacobian(U, P), sys.residual(U, P, P, 0.1));
  SolverConfig cfg;
  cfg.linear_solver = SolverConfig::LinearSolver::ConjugateGradient;
  cfg.max_linear_iters = 2;
  EXPECT_THROW(solve_schur(s.S, Eigen::VectorXd::Ones(256), cfg, QuadratureVariant::Symmetric),
               LinearSolverError);
}

TEST(Newton, FirstManufacturedStepConvergesQuickly) {
  auto spec = manufactured(MeshFamily::Smooth, 16);
  spec.solver.newton_tol = 1e-10;
  const FlowSystem sys(spec);
  const auto [U0, P0] = initial_state(sys);
  const auto step = newton_solve_step(sys, U0, P0, P0, 0.1);
  EXPECT_LE(step.stats.iterations, 5);
  const auto& h = step.stats.residual_history;
  EXPECT_LE(h.back(), 1e-10 * h.front() + 1e-12);
}

TEST(Newton, FivespotFirstStepContracts) {
  auto spec = fivespot_problem(generate_mesh({MeshFamily::Uniform, 32, {}}),
                               PermeabilityField<2>::constant(Mat2::Identity() * 4, 2.0));
  const FlowSystem sys(spec);
  const auto [U0, P0] = initial_state(sys);
  const auto step = newton_solve_step(sys, U0, P0, P0, spec.time_step);
  const auto& h = step.stats.residual_history;
  ASSERT_GE(h.size(), 2u);
  for (std::size_t k = 1; k < h.size(); ++k) EXPECT_LE(h[k], 0.1 * h[k - 1]);
}

TEST(Newton, MaxIterationsRaisesWithHistory) {
  auto spec = manufactured(MeshFamily::Smooth, 8);
  spec.solver.max_newton_iters = 1;
  spec.solver.newton_tol = 1e-30;
  spec.solver.newton_abs_tol = 1e-300;
  spec.eos.c_f = 0.5;
  const FlowSystem sys(spec);
  const auto [U0, P0] = initial_state(sys);
  try {
    newton_solve_step(sys, U0, P0, P0, 0.1);
    FAIL() << "expected non-convergence";
  } catch (const NonConvergenceError& e) {
    EXPECT_EQ(e.residual_history().size(), 2u);
  }
}

TEST(TimeMarch, ConstantPressureEquilibrium) {
  auto spec = manufactured(MeshFamily::Kershaw, 8);
  const double c = 2.5;
  spec.source = [](const Vec2&, double) { return 0.0; };
  spec.initial_pressure = [c](const Vec2&) { return c; };
  spec.boundary_pressure = [c](const Vec2&) { return c; };
  const FlowSystem sys(spec);
  double worst_u = 0.0, worst_p = 0.0;
  int levels = 0;
  time_march(sys, [&](int, double, const Eigen::VectorXd& U, const Eigen::VectorXd& P) {
    worst_u = std::max(worst_u, U.cwiseAbs().maxCoeff());
    worst_p = std::max(worst_p, (P.array() - c).abs().maxCoeff());
    ++levels;
  });
  EXPECT_EQ(levels, 20);
  EXPECT_LE(worst_u, 1e-14);
  EXPECT_LE(worst_p, 1e-14);
}

TEST(TimeMarch, PerCellMassBalance) {
  for (auto variant : {QuadratureVariant::Symmetric, QuadratureVariant::NonSymmetric}) {
    auto spec = manufactured(MeshFamily::RandomPerturbed, 16, variant, 7);
    spec.final_time = 0.5;
    const FlowSystem sys(spec);
    const auto [U0, P0] = initial_state(sys);
    Eigen::VectorXd P_prev = P0;
    double worst = 0.0;
    time_march(sys, [&](int, double t, const Eigen::VectorXd& U, const Eigen::VectorXd& P) {
      const auto r = sys.residual(U, P, P_prev, t);
      worst = std::max(worst, r.G.cwiseAbs().maxCoeff());
      P_prev = P;
    });
    EXPECT_LE(worst, 1e-9) << to_string(variant);
  }
}

TEST(TimeMarch, EssentialDofsIgnoreInitialGuess) {
  auto spec = fivespot_problem(generate_mesh({MeshFamily::Uniform, 8, {}}),
                               PermeabilityField<2>::constant(Mat2::Identity() * 4, 2.0));
  spec.solver.newton_tol = 1e-13;
  const FlowSystem sys(spec);
  const auto [U0, P0] = initial_state(sys);
  Eigen::VectorXd U1 = U0;
  int perturbed = 0;
  for (int g = 0; g < sys.dofs().num_velocity_dofs(); ++g)
    if (sys.dofs().is_essential(g)) {
      U1[g] = 10.0 + g;
      ++perturbed;
    }
  ASSERT_GT(perturbed, 0);
  const auto a = newton_solve_step(sys, U0, P0, P0, spec.time_step);
  const auto b = newton_solve_step(sys, U1, P0, P0, spec.time_step);
  EXPECT_LE((a.P - b.P).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((a.U - b.U).cwiseAbs().maxCoeff(), 1e-10);
  for (int g = 0; g < sys.dofs().num_velocity_dofs(); ++g)
    if (sys.dofs().is_essential(g)) EXPECT_LE(std::abs(b.U[g]), 1e-12);
}

TEST(TimeMarch, ManufacturedRunCompletes) {
  const FlowSystem sys(manufactured(MeshFamily::Smooth, 16));
  const auto res = time_march(sys);
  ASSERT_EQ(res.steps.size(), 20u);
  for (const auto& s : res.steps) {
    EXPECT_GE(s.newton_iterations, 1);
    EXPECT_TRUE(std::isfinite(s.final_residual));
  }
  EXPECT_TRUE(res.P.allFinite());
  EXPECT_NEAR(res.steps.back().time, 2.0, 1e-12);
}
