#pragma once

#include "mfmfe/assembly.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <unsupported/Eigen/IterativeSolvers>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mfmfe {

/// Cell-centred pressure system after eliminating the velocity increments.
struct SchurSystem {
  SparseMatrix S;                       ///< tau B^T A^-1 B - D
  Eigen::VectorXd rhs;                  ///< G - tau B^T A^-1 F
  std::vector<Eigen::MatrixXd> A_inv;   ///< inverse of each vertex block
};

/// Forms the Schur complement vertex by vertex: each block A_i is inverted
/// and tau B_i^T A_i^-1 B_i is accumulated into S.
inline SchurSystem eliminate_velocity(const JacobianBlocks& J, const ResidualVector& r,
                                      QuadratureVariant variant = QuadratureVariant::Symmetric) {
  const auto& A = J.A;
  const auto& B = *J.B;
  const int ncell = static_cast<int>(B.cols());
  if (r.F.size() != A.rows() || r.G.size() != ncell || J.D.size() != ncell) {
    throw StructuralError("eliminate_velocity: block and residual sizes do not match");
  }
  SchurSystem out;
  out.A_inv.resize(A.num_blocks());
  out.rhs = r.G;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(A.num_blocks()) * 16 + ncell);
  std::vector<int> cells;
  for (int v = 0; v < A.num_blocks(); ++v) {
    const int n = A.block_size(v), off = A.offset(v);
    if (n == 0) continue;
    const Eigen::MatrixXd& Av = A.block(v);
    Eigen::MatrixXd inv;
    if (variant == QuadratureVariant::Symmetric) {
      Eigen::LLT<Eigen::MatrixXd> llt(Av);
      if (llt.info() != Eigen::Success) {
        throw EliminationError("velocity block at vertex " + std::to_string(v) +
                                   " is not positive definite",
                               v);
      }
      inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    } else {
      Eigen::FullPivLU<Eigen::MatrixXd> lu(Av);
      if (!lu.isInvertible()) {
        throw EliminationError("velocity block at vertex " + std::to_string(v) + " is singular", v);
      }
      inv = lu.inverse();
    }
    cells.clear();
    for (int a = 0; a < n; ++a)
      for (RowSparseMatrix::InnerIterator it(B, off + a); it; ++it)
        if (std::find(cells.begin(), cells.end(), it.col()) == cells.end()) cells.push_back(it.col());
    const int m = static_cast<int>(cells.size());
    if (m > 0) {
      Eigen::MatrixXd Bv = Eigen::MatrixXd::Zero(n, m);
      for (int a = 0; a < n; ++a)
        for (RowSparseMatrix::InnerIterator it(B, off + a); it; ++it) {
          const int k = static_cast<int>(std::find(cells.begin(), cells.end(), it.col()) - cells.begin());
          Bv(a, k) = it.value();
        }
      const Eigen::MatrixXd AinvB = inv * Bv;
      const Eigen::MatrixXd Sv = J.tau * Bv.transpose() * AinvB;
      const Eigen::VectorXd rv = J.tau * Bv.transpose() * (inv * r.F.segment(off, n));
      for (int a = 0; a < m; ++a) {
        out.rhs[cells[a]] -= rv[a];
        for (int b = 0; b < m; ++b) trip.emplace_back(cells[a], cells[b], Sv(a, b));
      }
    }
    out.A_inv[v] = std::move(inv);
  }
  for (int c = 0; c < ncell; ++c) trip.emplace_back(c, c, -J.D[c]);
  out.S.resize(ncell, ncell);
  out.S.setFromTriplets(trip.begin(), trip.end());
  out.S.makeCompressed();
  return out;
}

/// dU = -A^-1 (B dP + F)
inline Eigen::VectorXd back_substitute(const SchurSystem& schur, const JacobianBlocks& J,
                                       const Eigen::VectorXd& dP, const Eigen::VectorXd& F) {
  const Eigen::VectorXd w = (*J.B) * dP + F;
  Eigen::VectorXd dU(w.size());
  for (int v = 0; v < J.A.num_blocks(); ++v) {
    const int n = J.A.block_size(v), off = J.A.offset(v);
    if (n == 0) continue;
    dU.segment(off, n) = -schur.A_inv[v] * w.segment(off, n);
  }
  return dU;
}

struct LinearSolveInfo {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solver for the pressure Schur system. For the symmetric variant the
/// sparse Cholesky symbolic analysis is reused while the pattern is unchanged.
class SchurSolver {
public:
  SchurSolver(SolverConfig config, QuadratureVariant variant) : cfg_(config), variant_(variant) {}

  Eigen::VectorXd solve(const SparseMatrix& S, const Eigen::VectorXd& rhs, LinearSolveInfo* info = nullptr) {
    LinearSolveInfo li;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
    const double bnorm = rhs.norm();
    if (bnorm == 0.0) {
      if (info) *info = li;
      return x;
    }
    if (variant_ == QuadratureVariant::Symmetric) {
      if (cfg_.linear_solver == SolverConfig::LinearSolver::Direct) {
        if (S.rows() != pattern_rows_ || S.nonZeros() != pattern_nnz_) {
          llt_.analyzePattern(S);
          pattern_rows_ = S.rows();
          pattern_nnz_ = S.nonZeros();
        }
        llt_.factorize(S);
        if (llt_.info() != Eigen::Success) {
          throw LinearSolverError("Schur complement is not positive definite", 0);
        }
        x = llt_.solve(rhs);
        li.iterations = 1;
        for (int refine = 0; refine < 2 && (rhs - S * x).norm() > cfg_.linear_tol * bnorm; ++refine) {
          x += llt_.solve(rhs - S * x);
          ++li.iterations;
        }
      } else {
        Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
        cg.setTolerance(cfg_.linear_tol);
        cg.setMaxIterations(cfg_.max_linear_iters);
        cg.compute(S);
        x = cg.solve(rhs);
        li.iterations = static_cast<int>(cg.iterations());
      }
    } else {
      Eigen::GMRES<SparseMatrix, Eigen::IncompleteLUT<double>> gmres;
      gmres.preconditioner().setDroptol(1e-6);
      gmres.preconditioner().setFillfactor(20);
      gmres.set_restart(100);
      gmres.setTolerance(0.1 * cfg_.linear_tol);
      gmres.setMaxIterations(cfg_.max_linear_iters);
      gmres.compute(S);
      if (gmres.info() != Eigen::Success) {
        throw LinearSolverError("incomplete LU preconditioner failed", 0);
      }
      x = gmres.solve(rhs);
      li.iterations = static_cast<int>(gmres.iterations());
      // the stopping test is on the preconditioned residual; restart until
      // the true residual meets the contract
      for (int restart = 0; restart < 5 && (rhs - S * x).norm() > cfg_.linear_tol * bnorm &&
                            li.iterations < cfg_.max_linear_iters;
           ++restart) {
        x = gmres.solveWithGuess(rhs, x);
        li.iterations += static_cast<int>(gmres.iterations());
      }
    }
    li.relative_residual = (rhs - S * x).norm() / bnorm;
    if (!std::isfinite(li.relative_residual) || li.relative_residual > cfg_.linear_tol) {
      throw LinearSolverError("Schur solve did not reach the tolerance (relative residual " +
                                  std::to_string(li.relative_residual) + " after " +
                                  std::to_string(li.iterations) + " iterations)",
                              li.iterations);
    }
    if (info) *info = li;
    return x;
  }

private:
  SolverConfig cfg_;
  QuadratureVariant variant_;
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
  Eigen::Index pattern_rows_ = -1;
  Eigen::Index pattern_nnz_ = -1;
};

inline Eigen::VectorXd solve_schur(const SparseMatrix& S, const Eigen::VectorXd& rhs,
                                   const SolverConfig& config, QuadratureVariant variant,
                                   LinearSolveInfo* info = nullptr) {
  SchurSolver solver(config, variant);
  return solver.solve(S, rhs, info);
}

struct NewtonStats {
  int iterations = 0;
  std::vector<double> residual_history; ///< ||(F, G)|| before each update and at exit
  std::vector<int> linear_iterations;
};

struct StepResult {
  Eigen::VectorXd U;
  Eigen::VectorXd P;
  NewtonStats stats;
};

/// One backward-Euler step: inexact Newton from (U0, P0) with P_prev the
/// pressure at the previous time level.
inline StepResult newton_solve_step(const FlowSystem& sys, const Eigen::VectorXd& U0,
                                    const Eigen::VectorXd& P0, const Eigen::VectorXd& P_prev,
                                    double t_next, SchurSolver& solver, int step = -1) {
  const auto& cfg = sys.spec().solver;
  const auto variant = sys.spec().variant;
  StepResult out{U0, P0, {}};
  const Eigen::VectorXd tau_source = sys.source_term(t_next);
  double r0 = 0.0;
  for (int k = 0;; ++k) {
    const auto rho = sys.cell_density(out.P);
    auto A = sys.discretization().velocity_matrix(rho);
    const ResidualVector r = sys.residual(A, out.U, out.P, P_prev, tau_source);
    const double rn = r.norm();
    if (!std::isfinite(rn)) {
      throw NonConvergenceError("Newton residual is not finite", out.stats.residual_history, step);
    }
    out.stats.residual_history.push_back(rn);
    if (k == 0) r0 = rn;
    if (rn <= cfg.newton_tol * r0 + cfg.newton_abs_tol) {
      out.stats.iterations = k;
      return out;
    }
    if (k == cfg.max_newton_iters) {
      throw NonConvergenceError("Newton iteration did not converge in " +
                                    std::to_string(cfg.max_newton_iters) + " iterations",
                                out.stats.residual_history, step);
    }
    const JacobianBlocks J = sys.jacobian(std::move(A), out.P);
    const SchurSystem schur = eliminate_velocity(J, r, variant);
    LinearSolveInfo li;
    const Eigen::VectorXd dP = solver.solve(schur.S, schur.rhs, &li);
    out.stats.linear_iterations.push_back(li.iterations);
    out.U += back_substitute(schur, J, dP, r.F);
    out.P += dP;
  }
}

inline StepResult newton_solve_step(const FlowSystem& sys, const Eigen::VectorXd& U0,
                                    const Eigen::VectorXd& P0, const Eigen::VectorXd& P_prev,
                                    double t_next) {
  SchurSolver solver(sys.spec().solver, sys.spec().variant);
  return newton_solve_step(sys, U0, P0, P_prev, t_next, solver);
}

struct StepRecord {
  int step = 0;   ///< 1-based time level
  double time = 0.0;
  int newton_iterations = 0;
  double final_residual = 0.0;
  int linear_iterations = 0;
  double pressure_change = 0.0; ///< ||P^{n+1} - P^n|| / (tau ||P^{n+1}||)
};

struct MarchResult {
  Eigen::VectorXd U;
  Eigen::VectorXd P;
  std::vector<StepRecord> steps;
  bool steady = false; ///< stopped by the steady-state criterion
};

/// Called after every accepted step with (level n+1, t_{n+1}, U, P).
using StepObserver =
    std::function<void(int, double, const Eigen::VectorXd&, const Eigen::VectorXd&)>;

/// Initial state: P^0 = cell averages of p0, U^0 = 0.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> initial_state(const FlowSystem& sys) {
  Eigen::VectorXd U = Eigen::VectorXd::Zero(sys.dofs().num_velocity_dofs());
  Eigen::VectorXd P = project_pressure<2>(sys.mesh(), sys.spec().initial_pressure);
  return {U, P};
}

/// Backward Euler over t_1..t_N. In steady mode the march stops once the
/// relative pressure change rate drops below steady_tol.
inline MarchResult time_march(const FlowSystem& sys, const StepObserver& observer = {},
                              bool steady = false) {
  const auto& spec = sys.spec();
  SchurSolver solver(spec.solver, spec.variant);
  auto [U, P] = initial_state(sys);
  MarchResult out;
  const int N = spec.num_steps();
  for (int n = 0; n < N; ++n) {
    const double t = (n + 1) * spec.time_step;
    StepResult r = newton_solve_step(sys, U, P, P, t, solver, n + 1);
    StepRecord rec;
    rec.step = n + 1;
    rec.time = t;
    rec.newton_iterations = r.stats.iterations;
    rec.final_residual = r.stats.residual_history.back();
    for (int li : r.stats.linear_iterations) rec.linear_iterations += li;
    const double pn = r.P.norm();
    rec.pressure_change = pn > 0.0 ? (r.P - P).norm() / (spec.time_step * pn) : (r.P - P).norm() / spec.time_step;
    out.steps.push_back(rec);
    U = std::move(r.U);
    P = std::move(r.P);
    if (observer) observer(n + 1, t, U, P);
    if (steady && rec.pressure_change < spec.solver.steady_tol) {
      out.steady = true;
      break;
    }
  }
  out.U = std::move(U);
  out.P = std::move(P);
  return out;
}

} // namespace mfmfe
