#include "mfmfe/mesh_generators.hpp"
#include "mfmfe/physics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mfmfe;

TEST(Eos, ReferenceDensity) {
  const Eos eos{1.0, 0.0, 4e-5};
  EXPECT_DOUBLE_EQ(density(eos, 0.0), 1.0);
}

TEST(Eos, IncompressibleLimit) {
  const Eos eos{2.5, 1.0, 0.0};
  for (double p : {-10.0, 0.0, 3.0, 1e4}) {
    EXPECT_DOUBLE_EQ(density(eos, p), 2.5);
    EXPECT_DOUBLE_EQ(density_derivative(eos, p), 0.0);
  }
}

TEST(Eos, LogarithmicDerivative) {
  const Eos eos{1.0, 0.0, 4e-5};
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> d(-1e3, 1e3);
  for (int k = 0; k < 100; ++k) {
    const double p = d(gen);
    EXPECT_NEAR(density_derivative(eos, p) / density(eos, p), 4e-5, 1e-14 * 4e-5 * 10);
  }
}

TEST(Eos, Validation) {
  EXPECT_THROW((Eos{0.0, 0.0, 1e-5}.validate()), ParameterError);
  EXPECT_THROW((Eos{1.0, 0.0, -1.0}.validate()), ParameterError);
}

TEST(Manufactured, SourceAtInitialTime) {
  const ManufacturedSolution m;
  const double pi = std::numbers::pi;
  for (const Vec2 x : {Vec2(0.1, 0.3), Vec2(0.45, 0.8), Vec2(0.9, 0.05)}) {
    const double s = std::pow(std::sin(3 * pi * x[0]) * std::sin(3 * pi * x[1]), 2);
    EXPECT_NEAR(m.f(x, 0.0), 0.2 * 4e-5 * s, 1e-18);
  }
}

TEST(Manufactured, DerivativesMatchFiniteDifferences) {
  const ManufacturedSolution m;
  const double d = 1e-5, t = 1.3;
  for (const Vec2 x : {Vec2(0.13, 0.41), Vec2(0.72, 0.27), Vec2(0.5, 0.9)}) {
    for (int k = 0; k < 2; ++k) {
      Vec2 e = Vec2::Zero();
      e[k] = d;
      const double fd = (m.p(x + e, t) - m.p(x - e, t)) / (2 * d);
      EXPECT_NEAR(m.grad_p(x, t)[k], fd, 1e-6 * std::max(1.0, std::abs(fd)));
      const Vec2 fdg = (m.grad_p(x + e, t) - m.grad_p(x - e, t)) / (2 * d);
      EXPECT_LE((m.hess_p(x, t).col(k) - fdg).norm(), 1e-5 * std::max(1.0, fdg.norm()));
    }
  }
}

TEST(Manufactured, SourceMatchesFiniteDifferencePdeOperator) {
  const ManufacturedSolution m;
  const auto& prm = m.params();
  const double d = 1e-5;
  for (const double t : {0.5, 2.0}) {
    for (const Vec2 x : {Vec2(0.13, 0.41), Vec2(0.72, 0.27), Vec2(0.0, 0.3), Vec2(0.6, 1.0)}) {
      double div_u = 0.0;
      for (int k = 0; k < 2; ++k) {
        Vec2 e = Vec2::Zero();
        e[k] = d;
        div_u += (m.u(x + e, t)[k] - m.u(x - e, t)[k]) / (2 * d);
      }
      const double rho_t = (density(prm.eos(), m.p(x, t + d)) - density(prm.eos(), m.p(x, t - d))) / (2 * d);
      const double f_fd = prm.porosity * rho_t + div_u;
      const double scale = std::max(1.0, std::abs(f_fd));
      EXPECT_NEAR(m.f(x, t), f_fd, 1e-6 * scale) << "x=(" << x[0] << "," << x[1] << ") t=" << t;
    }
  }
}

TEST(Manufactured, SourceIsNotSymmetricUnderSwap) {
  const ManufacturedSolution m;
  EXPECT_GT(std::abs(m.f(Vec2(0.2, 0.7), 1.0) - m.f(Vec2(0.7, 0.2), 1.0)), 1e-3);
}

TEST(Manufactured, TensorIsSymmetricPositiveDefinite) {
  for (const Vec2 x : {Vec2(0, 0), Vec2(1, 1), Vec2(0.3, 0.9)}) {
    const Mat2 K = ManufacturedSolution::khat(x);
    EXPECT_EQ(K(0, 1), K(1, 0));
    EXPECT_EQ(Eigen::LLT<Mat2>(K).info(), Eigen::Success);
  }
}

TEST(Fivespot, SourceAtInjector) {
  const double expect = 200.0 * (std::tanh(5.0) - std::tanh(200.0 * (0.025 - std::sqrt(2.0))));
  EXPECT_NEAR(fivespot_source(0.0, 0.0), expect, 1e-12);
  EXPECT_NEAR(fivespot_source(0.0, 0.0), 399.98, 0.01);
}

TEST(Fivespot, SourceAntisymmetry) {
  EXPECT_NEAR(fivespot_source(0.5, 0.5), 0.0, 1e-12);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double x = u(gen), y = u(gen);
    EXPECT_NEAR(fivespot_source(x, y), -fivespot_source(1 - x, 1 - y), 1e-12);
  }
}

TEST(Fivespot, BoundaryClassifier) {
  EXPECT_EQ(fivespot_boundary_classifier(1.0, 0.5), BoundaryKind::Dirichlet);
  EXPECT_EQ(fivespot_boundary_classifier(0.5, 1.0), BoundaryKind::Dirichlet);
  EXPECT_EQ(fivespot_boundary_classifier(0.5, 0.0), BoundaryKind::Neumann);
  EXPECT_EQ(fivespot_boundary_classifier(0.0, 0.5), BoundaryKind::Neumann);
  EXPECT_EQ(fivespot_boundary_classifier(1.0, 0.9), BoundaryKind::Neumann);
  EXPECT_THROW(fivespot_boundary_classifier(0.5, 0.5), DomainError);
  EXPECT_THROW(fivespot_boundary_classifier(1.5, 1.0), DomainError);
}

TEST(Fivespot, InitialPressure) {
  EXPECT_DOUBLE_EQ(fivespot_initial_pressure(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(fivespot_initial_pressure(1, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(fivespot_initial_pressure(0.5, 0.5), 0.25);
}

TEST(Fivespot, ProblemBoundaryPartition) {
  const auto spec = fivespot_problem(generate_mesh({MeshFamily::Uniform, 8, {}}),
                                     PermeabilityField<2>::constant(Mat2::Identity(), 2.0));
  int dirichlet = 0, neumann = 0;
  for (const auto& f : spec.mesh.faces()) {
    dirichlet += f.boundary == BoundaryKind::Dirichlet;
    neumann += f.boundary == BoundaryKind::Neumann;
  }
  EXPECT_EQ(dirichlet, 12);
  EXPECT_EQ(neumann, 20);
}

TEST(Permeability, PiecewiseSelectsByCentroid) {
  const auto mesh = generate_mesh({MeshFamily::Uniform, 4, {}});
  Mat2 a = 16 * Mat2::Identity(), b = 4 * Mat2::Identity();
  const auto field = PermeabilityField<2>::piecewise([](const Vec2& xc) { return xc[0] <= 0.5; }, a, b, 2.0);
  const auto K = field.on(mesh);
  EXPECT_DOUBLE_EQ(K(1, Vec2(0.5, 0.1))(0, 0), 8.0);
  EXPECT_DOUBLE_EQ(K(2, Vec2(0.5, 0.1))(0, 0), 2.0);
}

TEST(Permeability, ScalarGrid) {
  const auto field = PermeabilityField<2>::scalar_grid({1.0, 2.0, 3.0, 4.0}, 2.0);
  EXPECT_DOUBLE_EQ(field(3, Vec2::Zero(), Vec2::Zero())(1, 1), 2.0);
  EXPECT_DOUBLE_EQ(field(3, Vec2::Zero(), Vec2::Zero())(0, 1), 0.0);
  EXPECT_THROW(PermeabilityField<2>::scalar_grid({1.0, -2.0}, 1.0), CoefficientError);
  EXPECT_THROW(PermeabilityField<2>::constant(Mat2::Identity(), 0.0), ParameterError);
}

TEST(ProblemSpec, Validation) {
  auto spec = manufactured_problem(generate_mesh({MeshFamily::Uniform, 4, {}}),
                                   QuadratureVariant::Symmetric);
  EXPECT_NO_THROW(spec.validate());
  EXPECT_EQ(spec.num_steps(), 20);
  spec.time_step = 0.3;
  EXPECT_THROW(spec.validate(), ParameterError);
  spec.time_step = 0.1;
  spec.porosity = 0.0;
  EXPECT_THROW(spec.validate(), ParameterError);
  spec.porosity = 0.2;
  spec.solver.newton_tol = -1;
  EXPECT_THROW(spec.validate(), ParameterError);
}
