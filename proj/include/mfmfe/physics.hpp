#pragma once

#include "mfmfe/mesh.hpp"
#include "mfmfe/quadrature.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace mfmfe {

/// Exponential equation of state rho(p) = rho_ref exp(c_f (p - p_ref)).
struct Eos {
  double rho_ref = 1.0;
  double p_ref = 0.0;
  double c_f = 4e-5;

  void validate() const {
    if (!(rho_ref > 0.0)) throw ParameterError("eos: rho_ref must be positive");
    if (!(c_f >= 0.0)) throw ParameterError("eos: c_f must be non-negative");
  }
};

inline double density(const Eos& eos, double p) {
  return eos.rho_ref * std::exp(eos.c_f * (p - eos.p_ref));
}

inline double density_derivative(const Eos& eos, double p) { return eos.c_f * density(eos, p); }

enum class PermeabilityKind { ConstantTensor, PiecewiseTensor, Manufactured, ScalarGrid, Custom };

/// K = Khat / mu, evaluated per cell so that discontinuities follow cell
/// boundaries. Piecewise and gridded fields are selected by cell (centroid or
/// index), smooth fields by the physical point.
template <int Dim>
class PermeabilityField {
public:
  using Evaluator = std::function<Mat<Dim>(int cell, const Vec<Dim>& centroid, const Vec<Dim>& x)>;

  PermeabilityField(PermeabilityKind kind, double viscosity, Evaluator khat)
      : kind_(kind), mu_(viscosity), khat_(std::move(khat)) {
    if (!(mu_ > 0.0)) throw ParameterError("permeability: viscosity must be positive");
  }

  static PermeabilityField constant(const Mat<Dim>& khat, double mu) {
    return {PermeabilityKind::ConstantTensor, mu,
            [khat](int, const Vec<Dim>&, const Vec<Dim>&) { return khat; }};
  }

  /// `in_a(centroid)` selects tensor_a, otherwise tensor_b.
  static PermeabilityField piecewise(std::function<bool(const Vec<Dim>&)> in_a,
                                     const Mat<Dim>& tensor_a, const Mat<Dim>& tensor_b,
                                     double mu) {
    return {PermeabilityKind::PiecewiseTensor, mu,
            [in_a = std::move(in_a), tensor_a, tensor_b](int, const Vec<Dim>& xc,
                                                         const Vec<Dim>&) {
              return in_a(xc) ? tensor_a : tensor_b;
            }};
  }

  /// Khat = k_cell * I with one scalar per cell.
  static PermeabilityField scalar_grid(std::vector<double> values, double mu) {
    for (double k : values) {
      if (!(k > 0.0)) throw CoefficientError("scalar permeability must be positive");
    }
    return {PermeabilityKind::ScalarGrid, mu,
            [values = std::move(values)](int cell, const Vec<Dim>&, const Vec<Dim>&) {
              return Mat<Dim>(values.at(cell) * Mat<Dim>::Identity());
            }};
  }

  PermeabilityKind kind() const { return kind_; }
  double viscosity() const { return mu_; }

  Mat<Dim> khat(int cell, const Vec<Dim>& centroid, const Vec<Dim>& x) const {
    return khat_(cell, centroid, x);
  }

  Mat<Dim> operator()(int cell, const Vec<Dim>& centroid, const Vec<Dim>& x) const {
    return khat_(cell, centroid, x) / mu_;
  }

  /// K as a TensorField on a given mesh.
  TensorField<Dim> on(const Mesh<Dim>& mesh) const {
    return [field = *this, &mesh](int c, const Vec<Dim>& x) {
      return field(c, mesh.centroid(c), x);
    };
  }

private:
  PermeabilityKind kind_;
  double mu_;
  Evaluator khat_;
};

// ---------------------------------------------------------------------------
// Smooth-solution test problem on the unit square.

struct ManufacturedParams {
  double c_f = 4e-5;
  double mu = 2.0;
  double porosity = 0.2;
  double rho_ref = 1.0;
  double p_ref = 0.0;

  Eos eos() const { return {rho_ref, p_ref, c_f}; }
};

/// Exact solution p = t sin^2(3 pi x) sin^2(3 pi y) with the full tensor
/// Khat = [4 + (x+2)^2 + y^2, 1 + xy; 1 + xy, 2], no gravity. All derivatives
/// are analytic.
class ManufacturedSolution {
public:
  explicit ManufacturedSolution(ManufacturedParams params = {}) : prm_(params) {}

  const ManufacturedParams& params() const { return prm_; }

  static Mat2 khat(const Vec2& x) {
    Mat2 K;
    K << 4 + (x[0] + 2) * (x[0] + 2) + x[1] * x[1], 1 + x[0] * x[1], 1 + x[0] * x[1], 2;
    return K;
  }

  Mat2 K(const Vec2& x) const { return khat(x) / prm_.mu; }

  double p(const Vec2& x, double t) const { return t * shape(x); }

  double p_t(const Vec2& x, double) const { return shape(x); }

  Vec2 grad_p(const Vec2& x, double t) const {
    const double k = 3 * pi;
    const double sx = std::sin(k * x[0]), sy = std::sin(k * x[1]);
    return t * Vec2(k * std::sin(2 * k * x[0]) * sy * sy, k * std::sin(2 * k * x[1]) * sx * sx);
  }

  /// Hessian of p.
  Mat2 hess_p(const Vec2& x, double t) const {
    const double k = 3 * pi;
    const double sx = std::sin(k * x[0]), sy = std::sin(k * x[1]);
    const double pxx = 2 * k * k * std::cos(2 * k * x[0]) * sy * sy;
    const double pyy = 2 * k * k * std::cos(2 * k * x[1]) * sx * sx;
    const double pxy = k * k * std::sin(2 * k * x[0]) * std::sin(2 * k * x[1]);
    Mat2 H;
    H << pxx, pxy, pxy, pyy;
    return t * H;
  }

  /// u = -K rho(p) grad p
  Vec2 u(const Vec2& x, double t) const {
    return -density(prm_.eos(), p(x, t)) * (K(x) * grad_p(x, t));
  }

  /// f = phi rho'(p) p_t + div u
  double f(const Vec2& x, double t) const {
    const Eos eos = prm_.eos();
    const double pv = p(x, t);
    const double rho = density(eos, pv);
    const double drho = density_derivative(eos, pv);
    const Vec2 g = grad_p(x, t);
    const Mat2 H = hess_p(x, t);
    const Mat2 Kx = K(x);
    // column-wise divergence of K: (div K)_j = sum_i d_i K_ij
    const Vec2 divK = Vec2(2 * (x[0] + 2) + x[0], x[1]) / prm_.mu;
    const double div_u = -drho * g.dot(Kx * g) - rho * divK.dot(g) - rho * (Kx.cwiseProduct(H)).sum();
    return prm_.porosity * drho * p_t(x, t) + div_u;
  }

  double p0(const Vec2& x) const { return p(x, 0.0); }

private:
  static constexpr double pi = std::numbers::pi;

  static double shape(const Vec2& x) {
    const double sx = std::sin(3 * pi * x[0]), sy = std::sin(3 * pi * x[1]);
    return sx * sx * sy * sy;
  }

  ManufacturedParams prm_;
};

// ---------------------------------------------------------------------------
// Quarter five-spot.

/// Injection at (0,0), production at (1,1), smeared by tanh profiles.
inline double fivespot_source(double x, double y) {
  const double r0 = std::hypot(x, y);
  const double r1 = std::hypot(x - 1, y - 1);
  return 200.0 * (std::tanh(200.0 * (0.025 - r0)) - std::tanh(200.0 * (0.025 - r1)));
}

/// Dirichlet on {x = 1, y <= 3/4} and {y = 1, x <= 3/4}; Neumann elsewhere.
inline BoundaryKind fivespot_boundary_classifier(double x, double y, double tol = 1e-12) {
  const bool on_boundary = std::abs(x) <= tol || std::abs(y) <= tol || std::abs(x - 1) <= tol ||
                           std::abs(y - 1) <= tol;
  const bool inside = x >= -tol && x <= 1 + tol && y >= -tol && y <= 1 + tol;
  if (!on_boundary || !inside) {
    throw DomainError("fivespot_boundary_classifier: (" + std::to_string(x) + ", " +
                      std::to_string(y) + ") is not on the boundary of the unit square");
  }
  if (std::abs(x - 1) <= tol && y <= 0.75 + tol) return BoundaryKind::Dirichlet;
  if (std::abs(y - 1) <= tol && x <= 0.75 + tol) return BoundaryKind::Dirichlet;
  return BoundaryKind::Neumann;
}

inline double fivespot_initial_pressure(double x, double y) {
  return (1 - 3 * x * x + 2 * x * x * x) * (1 - 3 * y * y + 2 * y * y * y);
}

// ---------------------------------------------------------------------------

/// Solver tolerances and limits.
struct SolverConfig {
  enum class LinearSolver { Direct, ConjugateGradient };

  double newton_tol = 1e-9;
  double newton_abs_tol = 1e-12;
  int max_newton_iters = 20;
  double linear_tol = 1e-11;
  int max_linear_iters = 5000;
  double steady_tol = 1e-8;
  LinearSolver linear_solver = LinearSolver::Direct;

  void validate() const {
    if (!(newton_tol > 0) || !(newton_abs_tol > 0) || !(linear_tol > 0) || !(steady_tol > 0)) {
      throw ParameterError("solver: tolerances must be positive");
    }
    if (max_newton_iters < 1 || max_linear_iters < 1) {
      throw ParameterError("solver: iteration limits must be at least 1");
    }
  }
};

/// Complete description of a slightly compressible flow run in 2D.
struct ProblemSpec {
  Mesh<2> mesh; ///< carries the Dirichlet/Neumann partition of the boundary
  Eos eos;
  double porosity = 0.2;
  PermeabilityField<2> permeability =
      PermeabilityField<2>::constant(Mat2::Identity(), 1.0);
  Vec2 gravity = Vec2::Zero();
  std::function<double(const Vec2&, double)> source = [](const Vec2&, double) { return 0.0; };
  std::function<double(const Vec2&)> initial_pressure = [](const Vec2&) { return 0.0; };
  /// Pressure prescribed on Dirichlet faces.
  std::function<double(const Vec2&)> boundary_pressure = [](const Vec2&) { return 0.0; };
  double final_time = 1.0;
  double time_step = 0.1;
  QuadratureVariant variant = QuadratureVariant::Symmetric;
  SolverConfig solver;

  int num_steps() const { return static_cast<int>(std::llround(final_time / time_step)); }

  void validate() const {
    eos.validate();
    solver.validate();
    if (!(porosity > 0.0)) throw ParameterError("problem: porosity must be positive");
    if (!(time_step > 0.0)) throw ParameterError("problem: time step must be positive");
    if (!(final_time > 0.0)) throw ParameterError("problem: final time must be positive");
    const double n = final_time / time_step;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) {
      throw ParameterError("problem: final time is not an integer multiple of the time step");
    }
    if (mesh.num_cells() == 0) throw ParameterError("problem: empty mesh");
  }
};

/// Smooth-solution problem on a given mesh (all boundary Dirichlet).
inline ProblemSpec manufactured_problem(Mesh<2> mesh, QuadratureVariant variant,
                                        const ManufacturedSolution& exact = ManufacturedSolution{},
                                        double time_step = 0.1, double final_time = 2.0) {
  ProblemSpec spec;
  spec.mesh = mesh.with_boundary([](const Vec2&) { return BoundaryKind::Dirichlet; });
  spec.eos = exact.params().eos();
  spec.porosity = exact.params().porosity;
  spec.permeability = PermeabilityField<2>(
      PermeabilityKind::Manufactured, exact.params().mu,
      [](int, const Vec2&, const Vec2& x) { return ManufacturedSolution::khat(x); });
  spec.source = [exact](const Vec2& x, double t) { return exact.f(x, t); };
  spec.initial_pressure = [exact](const Vec2& x) { return exact.p0(x); };
  spec.final_time = final_time;
  spec.time_step = time_step;
  spec.variant = variant;
  return spec;
}

/// Quarter five-spot setup; parameters as in the smooth test.
inline ProblemSpec fivespot_problem(Mesh<2> mesh, PermeabilityField<2> permeability,
                                   double time_step = 5e-3, double final_time = 1.0,
                                   QuadratureVariant variant = QuadratureVariant::Symmetric) {
  const ManufacturedParams prm;
  ProblemSpec spec;
  spec.mesh = mesh.with_boundary(
      [](const Vec2& m) { return fivespot_boundary_classifier(m[0], m[1], 1e-9); });
  spec.eos = prm.eos();
  spec.porosity = prm.porosity;
  spec.permeability = std::move(permeability);
  spec.source = [](const Vec2& x, double) { return fivespot_source(x[0], x[1]); };
  spec.initial_pressure = [](const Vec2& x) { return fivespot_initial_pressure(x[0], x[1]); };
  spec.final_time = final_time;
  spec.time_step = time_step;
  spec.variant = variant;
  return spec;
}

} // namespace mfmfe
