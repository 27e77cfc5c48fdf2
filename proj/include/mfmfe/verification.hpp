#pragma once

#include "mfmfe/mesh_generators.hpp"
#include "mfmfe/newton.hpp"
#include "mfmfe/random_field.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace mfmfe {

/// Spatial errors at one time level.
struct SpatialErrors {
  double pressure_l2 = 0.0;      ///< ||p - p_h||, 3x3 Gauss
  double pressure_centers = 0.0; ///< ||r_h p - P||, at F_E(x_hat_c), weighted by |E|
  double velocity_l2 = 0.0;      ///< ||Pi_h u - u_h||, vertex (trapezoidal) rule
  double velocity_faces = 0.0;   ///< ||u - u_h||_F, 5-point Gauss per edge
};

/// Discrete error norms on a 2D mesh.
class ErrorEvaluator {
public:
  ErrorEvaluator(const Mesh<2>& mesh, const DofMap<2>& dofs) : mesh_(&mesh), dofs_(&dofs) {}

  double pressure_l2(const Eigen::VectorXd& P, const ScalarFunction<2>& p) const {
    double acc = 0.0;
    for (int c = 0; c < mesh_->num_cells(); ++c) {
      const auto map = mesh_->ref_map(c);
      for (const auto& q : cell_rule<2>(mesh_->cell(c).kind, 3)) {
        const double e = p(map.map_unchecked(q.point)) - P[c];
        acc += q.weight * map.jacobian(q.point).J * e * e;
      }
    }
    return std::sqrt(acc);
  }

  double pressure_centers(const Eigen::VectorXd& P, const ScalarFunction<2>& p) const {
    double acc = 0.0;
    for (int c = 0; c < mesh_->num_cells(); ++c) {
      const double e = p(mesh_->center(c)) - P[c];
      acc += mesh_->cell_measure(c) * e * e;
    }
    return std::sqrt(acc);
  }

  /// Vertex-rule L2 norm of the discrete field with coefficients E.
  double velocity_l2(const Eigen::VectorXd& E) const {
    double acc = 0.0;
    for (int c = 0; c < mesh_->num_cells(); ++c) {
      const auto& basis = reference_basis<2>(mesh_->cell(c).kind);
      const auto& ref = basis.reference();
      const auto map = mesh_->ref_map(c);
      const auto& table = dofs_->cell_dofs(c);
      const double w = ref.measure / ref.num_vertices();
      for (int i = 0; i < ref.num_vertices(); ++i) {
        Vec2 vhat = Vec2::Zero();
        for (int j : basis.dofs_at_vertex(i))
          vhat += table[j].sign * E[table[j].global] * basis.vertex_values(i)[j];
        const auto jac = map.jacobian(ref.vertices[i]);
        acc += w * (jac.DF * vhat).squaredNorm() / jac.J;
      }
    }
    return std::sqrt(acc);
  }

  /// sum_E sum_{e in dE} |E|/|e| ||(u - u_h) . n_e||_e^2
  double velocity_faces(const Eigen::VectorXd& U, const VectorFunction<2>& u) const {
    const auto rule = gauss_legendre(5);
    double acc = 0.0;
    for (int f = 0; f < mesh_->num_faces(); ++f) {
      const Face& face = mesh_->face(f);
      const Vec2& a = mesh_->vertex(face.vertices[0]);
      const Vec2& b = mesh_->vertex(face.vertices[1]);
      const double len = (b - a).norm();
      const Vec2 n = Vec2(b[1] - a[1], a[0] - b[0]) / len;
      double weight = mesh_->cell_measure(face.cells[0]) / len;
      if (face.cells[1] >= 0) weight += mesh_->cell_measure(face.cells[1]) / len;
      const double U0 = U[dofs_->face_dof(f, 0)], U1 = U[dofs_->face_dof(f, 1)];
      double e2 = 0.0;
      for (const auto& q : rule) {
        const double s = q.point[0];
        const double uh = ((1 - s) * U0 + s * U1) / len;
        const double d = u((1 - s) * a + s * b).dot(n) - uh;
        e2 += q.weight * d * d;
      }
      acc += weight * len * e2;
    }
    return std::sqrt(acc);
  }

  SpatialErrors all(const Eigen::VectorXd& U, const Eigen::VectorXd& P, const ScalarFunction<2>& p,
                    const VectorFunction<2>& u) const {
    SpatialErrors e;
    e.pressure_l2 = pressure_l2(P, p);
    e.pressure_centers = pressure_centers(P, p);
    e.velocity_l2 = velocity_l2(interpolate_velocity<2>(*mesh_, *dofs_, u) - U);
    e.velocity_faces = velocity_faces(U, u);
    return e;
  }

private:
  const Mesh<2>* mesh_;
  const DofMap<2>* dofs_;
};

/// Maximum over time levels of the four spatial errors.
struct ErrorReport {
  SpatialErrors max;
  int levels = 0;

  void update(const SpatialErrors& e) {
    max.pressure_l2 = std::max(max.pressure_l2, e.pressure_l2);
    max.pressure_centers = std::max(max.pressure_centers, e.pressure_centers);
    max.velocity_l2 = std::max(max.velocity_l2, e.velocity_l2);
    max.velocity_faces = std::max(max.velocity_faces, e.velocity_faces);
    ++levels;
  }
};

inline SpatialErrors spatial_errors(const FlowSystem& sys, const Eigen::VectorXd& U,
                                    const Eigen::VectorXd& P, const ManufacturedSolution& exact,
                                    double t) {
  ErrorEvaluator ev(sys.mesh(), sys.dofs());
  return ev.all(
      U, P, [&](const Vec2& x) { return exact.p(x, t); },
      [&](const Vec2& x) { return exact.u(x, t); });
}

/// Observed order log2(E(h) / E(h/2)).
inline double convergence_rate(double coarse, double fine) { return std::log2(coarse / fine); }

struct StudySpec {
  MeshFamily family = MeshFamily::Smooth;
  int levels = 5;
  int n0 = 16;                          ///< cells per direction on the coarsest level
  QuadratureVariant variant = QuadratureVariant::Symmetric;
  double time_step = 0.1;
  double final_time = 2.0;
  std::optional<std::uint64_t> seed{};  ///< random family only
  SolverConfig solver;

  void validate() const {
    if (levels < 1) throw ParameterError("study: at least one level is required");
    if (n0 < 2) throw ParameterError("study: n0 must be at least 2");
    MeshFamilyParams{family, n0, seed}.validate();
    solver.validate();
  }
};

struct StudyRow {
  int n = 0;
  double h = 0.0;
  SpatialErrors errors;
  std::optional<SpatialErrors> rates; ///< empty on the coarsest level
  int newton_iterations = 0;          ///< summed over steps
};

using StudyProgress = std::function<void(const StudyRow&)>;

/// Runs the smooth-solution problem on each level and returns errors and
/// observed orders.
inline std::vector<StudyRow> convergence_study(const StudySpec& study,
                                               const StudyProgress& progress = {}) {
  study.validate();
  const ManufacturedSolution exact;
  std::vector<StudyRow> rows;
  for (int l = 0; l < study.levels; ++l) {
    const int n = study.n0 << l;
    const Mesh<2> mesh = generate_mesh({study.family, n, study.seed});
    ProblemSpec spec = manufactured_problem(mesh, study.variant, exact, study.time_step, study.final_time);
    spec.solver = study.solver;
    const FlowSystem sys(spec);
    ErrorReport report;
    StudyRow row;
    row.n = n;
    row.h = 1.0 / n;
    const auto res = time_march(sys, [&](int, double t, const Eigen::VectorXd& U, const Eigen::VectorXd& P) {
      report.update(spatial_errors(sys, U, P, exact, t));
    });
    for (const auto& s : res.steps) row.newton_iterations += s.newton_iterations;
    row.errors = report.max;
    if (!rows.empty()) {
      const auto& c = rows.back().errors;
      row.rates = SpatialErrors{convergence_rate(c.pressure_l2, row.errors.pressure_l2),
                                convergence_rate(c.pressure_centers, row.errors.pressure_centers),
                                convergence_rate(c.velocity_l2, row.errors.velocity_l2),
                                convergence_rate(c.velocity_faces, row.errors.velocity_faces)};
    }
    rows.push_back(row);
    if (progress) progress(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Quarter five-spot.

enum class FivespotCase { ConstantFull, PiecewiseFull, Random };

inline std::string_view to_string(FivespotCase c) {
  switch (c) {
  case FivespotCase::ConstantFull: return "constant-full";
  case FivespotCase::PiecewiseFull: return "piecewise-full";
  case FivespotCase::Random: return "random";
  }
  return "?";
}

inline FivespotCase parse_fivespot_case(std::string_view s) {
  if (s == "constant-full" || s == "constant") return FivespotCase::ConstantFull;
  if (s == "piecewise-full" || s == "piecewise") return FivespotCase::PiecewiseFull;
  if (s == "random") return FivespotCase::Random;
  throw ParameterError("unknown permeability case '" + std::string(s) + "'");
}

struct FivespotConfig {
  FivespotCase permeability = FivespotCase::ConstantFull;
  int n = 128;
  double time_step = 5e-3;
  double max_time = 1.0; ///< march stops here if the steady criterion is not met
  MaternParams matern{};
  std::uint64_t seed = 1;
  QuadratureVariant variant = QuadratureVariant::Symmetric;
  SolverConfig solver;
};

struct FivespotResult {
  Mesh<2> mesh;
  Eigen::VectorXd U;
  Eigen::VectorXd P;
  std::vector<double> speed;          ///< |u_h| at cell centres
  std::vector<double> log_speed;
  std::vector<double> log_permeability;
  std::vector<StepRecord> steps;
  bool steady = false;
};

inline PermeabilityField<2> fivespot_permeability(const FivespotConfig& cfg,
                                                  std::vector<double>* log_k = nullptr) {
  const double mu = ManufacturedParams{}.mu;
  Mat2 k4, k16;
  k4 << 4, 0.5, 0.5, 4;
  k16 << 16, 0.5, 0.5, 16;
  switch (cfg.permeability) {
  case FivespotCase::ConstantFull:
    if (log_k) log_k->assign(static_cast<std::size_t>(cfg.n) * cfg.n, std::log(4.0));
    return PermeabilityField<2>::constant(k4, mu);
  case FivespotCase::PiecewiseFull:
    if (log_k) {
      log_k->resize(static_cast<std::size_t>(cfg.n) * cfg.n);
      for (int j = 0; j < cfg.n; ++j)
        for (int i = 0; i < cfg.n; ++i) (*log_k)[j * cfg.n + i] = std::log((i + 0.5) / cfg.n <= 0.5 ? 16.0 : 4.0);
    }
    return PermeabilityField<2>::piecewise([](const Vec2& xc) { return xc[0] <= 0.5; }, k16, k4, mu);
  case FivespotCase::Random: {
    const FieldSample s = sample_log_normal_field(cfg.n, cfg.n, cfg.matern, cfg.seed);
    if (log_k) *log_k = s.values;
    return PermeabilityField<2>::scalar_grid(s.permeability(), mu);
  }
  }
  throw ParameterError("unknown permeability case");
}

inline FivespotResult fivespot_run(const FivespotConfig& cfg) {
  FivespotResult out;
  out.mesh = generate_mesh({MeshFamily::Uniform, cfg.n, {}});
  ProblemSpec spec = fivespot_problem(out.mesh, fivespot_permeability(cfg, &out.log_permeability),
                                      cfg.time_step, cfg.max_time, cfg.variant);
  spec.solver = cfg.solver;
  const FlowSystem sys(spec);
  auto res = time_march(sys, {}, true);
  out.mesh = sys.mesh();
  out.U = std::move(res.U);
  out.P = std::move(res.P);
  out.steps = std::move(res.steps);
  out.steady = res.steady;
  const int nc = out.mesh.num_cells();
  out.speed.resize(nc);
  out.log_speed.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const Vec2 xc = reference_cell<2>(out.mesh.cell(c).kind).centroid;
    out.speed[c] = evaluate_velocity<2>(out.mesh, sys.dofs(), out.U, c, xc).value.norm();
    out.log_speed[c] = std::log(std::max(out.speed[c], 1e-300));
  }
  return out;
}

/// max |P(i,j) - P(j,i)| on an n x n logically rectangular grid.
inline double diagonal_asymmetry(const Eigen::VectorXd& P, int n) {
  if (P.size() != static_cast<Eigen::Index>(n) * n) {
    throw StructuralError("diagonal_asymmetry: field size is not n*n");
  }
  double m = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < j; ++i) m = std::max(m, std::abs(P[j * n + i] - P[i * n + j]));
  return m;
}

} // namespace mfmfe
