#pragma once

#include "mfmfe/io.hpp"
#include "mfmfe/verification.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace mfmfe {

enum ExitCode : int { ExitOk = 0, ExitOther = 1, ExitConfig = 2, ExitSolver = 3, ExitIo = 4 };

namespace cli {

/// Flat key=value configuration; '#' starts a comment. Each entry becomes
/// "--key value" so that later command-line flags override it.
inline std::vector<std::string> read_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config") {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": invalid key '" + key + "'");
    }
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

struct Common {
  std::string out = ".";
  std::string config;
};

struct ConvergenceArgs {
  std::string family = "smooth";
  int levels = 5;
  int n0 = 16;
  std::string variant = "symmetric";
  double tau = 0.1;
  double final_time = 2.0;
  std::optional<std::uint64_t> seed;
};

struct FivespotArgs {
  std::string perm = "constant-full";
  int n = 128;
  double tau = 5e-3;
  double max_time = 1.0;
  double nu = 0.5;
  double range = 0.3;
  double var = 1.0;
  std::uint64_t seed = 1;
  std::string variant = "symmetric";
};

struct RandfieldArgs {
  double nu = 0.5;
  double range = 0.3;
  double var = 1.0;
  int n = 128;
  std::uint64_t seed = 1;
};

struct MeshArgs {
  std::string family = "uniform";
  int n = 16;
  std::optional<std::uint64_t> seed;
};

struct SolverArgs {
  SolverConfig cfg;
  std::string linear = "direct";
};

inline void add_solver_options(CLI::App* app, SolverArgs& s) {
  app->add_option("--newton-tol", s.cfg.newton_tol, "Relative Newton tolerance");
  app->add_option("--newton-abs-tol", s.cfg.newton_abs_tol, "Absolute Newton tolerance");
  app->add_option("--max-newton-iters", s.cfg.max_newton_iters, "Newton iteration limit");
  app->add_option("--linear-tol", s.cfg.linear_tol, "Relative tolerance of the pressure solve");
  app->add_option("--max-linear-iters", s.cfg.max_linear_iters, "Krylov iteration limit");
  app->add_option("--steady-tol", s.cfg.steady_tol, "Steady-state tolerance on ||dP||/(tau ||P||)");
  app->add_option("--linear-solver", s.linear, "Symmetric pressure solver: direct or cg")
      ->check(CLI::IsMember({"direct", "cg"}));
}

inline SolverConfig resolve(const SolverArgs& s) {
  SolverConfig c = s.cfg;
  c.linear_solver = s.linear == "cg" ? SolverConfig::LinearSolver::ConjugateGradient
                                     : SolverConfig::LinearSolver::Direct;
  c.validate();
  return c;
}

inline std::vector<std::pair<std::string, std::string>> manifest_entries(const CLI::App* sub) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("version", version_string);
  out.emplace_back("command", sub->get_name());
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    const auto& res = opt->results();
    out.emplace_back(name, opt->count() > 0 && !res.empty() ? res.back() : opt->get_default_str());
  }
  return out;
}

inline std::string table_name(MeshFamily f, QuadratureVariant v) {
  const bool sym = v == QuadratureVariant::Symmetric;
  if (f == MeshFamily::Smooth && sym) return "table1.csv";
  if (f == MeshFamily::Kershaw && sym) return "table2.csv";
  if (f == MeshFamily::RandomPerturbed && sym) return "table3.csv";
  if (f == MeshFamily::RandomPerturbed && !sym) return "table4.csv";
  return "table_" + std::string(to_string(f)) + "_" + std::string(to_string(v)) + ".csv";
}

inline CsvTable study_table(const std::vector<StudyRow>& rows) {
  CsvTable t;
  t.header = {"level", "h",   "E_p",  "rate_E_p",  "E_p_centers", "rate_E_p_centers",
              "E_u",   "rate_E_u", "E_u_faces", "rate_E_u_faces"};
  const double nan = std::nan("");
  for (std::size_t l = 0; l < rows.size(); ++l) {
    const auto& r = rows[l];
    const SpatialErrors rt = r.rates.value_or(SpatialErrors{nan, nan, nan, nan});
    t.rows.push_back({static_cast<double>(l), r.h, r.errors.pressure_l2, rt.pressure_l2,
                      r.errors.pressure_centers, rt.pressure_centers, r.errors.velocity_l2,
                      rt.velocity_l2, r.errors.velocity_faces, rt.velocity_faces});
  }
  return t;
}

inline std::filesystem::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

inline void run_convergence(const ConvergenceArgs& a, const SolverArgs& s, const Common& c,
                            const CLI::App* sub, std::ostream& out) {
  StudySpec study;
  study.family = parse_mesh_family(a.family);
  study.levels = a.levels;
  study.n0 = a.n0;
  study.variant = parse_variant(a.variant);
  study.time_step = a.tau;
  study.final_time = a.final_time;
  study.seed = a.seed;
  study.solver = resolve(s);
  study.validate();
  const auto dir = prepare_dir(c.out);
  char line[256];
  const auto rows = convergence_study(study, [&](const StudyRow& r) {
    std::snprintf(line, sizeof line, "n=%-4d E_p=%.3e E_p_centers=%.3e E_u=%.3e E_u_faces=%.3e\n",
                  r.n, r.errors.pressure_l2, r.errors.pressure_centers, r.errors.velocity_l2,
                  r.errors.velocity_faces);
    out << line << std::flush;
  });
  const auto name = table_name(study.family, study.variant);
  write_csv(study_table(rows), dir / name);
  write_manifest(manifest_entries(sub), dir / (name.substr(0, name.size() - 4) + "_manifest.txt"));
  out << "wrote " << (dir / name).string() << '\n';
}

inline void run_fivespot(const FivespotArgs& a, const SolverArgs& s, const Common& c,
                         const CLI::App* sub, std::ostream& out) {
  FivespotConfig cfg;
  cfg.permeability = parse_fivespot_case(a.perm);
  cfg.n = a.n;
  cfg.time_step = a.tau;
  cfg.max_time = a.max_time;
  cfg.matern = {a.nu, a.range, a.var};
  cfg.seed = a.seed;
  cfg.variant = parse_variant(a.variant);
  cfg.solver = resolve(s);
  if (cfg.n < 2) throw ParameterError("fivespot: n must be at least 2");
  if (cfg.permeability == FivespotCase::Random) cfg.matern.validate();
  const auto dir = prepare_dir(c.out);
  const auto res = fivespot_run(cfg);
  const std::string stem = "fivespot_" + std::string(to_string(cfg.permeability));
  std::vector<double> p(res.P.data(), res.P.data() + res.P.size());
  write_vtk<2>(res.mesh,
               {{"pressure", p},
                {"velocity_magnitude", res.speed},
                {"log_velocity_magnitude", res.log_speed},
                {"log_permeability", res.log_permeability}},
               dir / (stem + ".vtk"));
  write_csv(step_stats_table(res.steps), dir / (stem + "_stats.csv"));
  write_manifest(manifest_entries(sub), dir / (stem + "_manifest.txt"));
  out << "steps=" << res.steps.size() << " steady=" << (res.steady ? "yes" : "no")
      << " diagonal_asymmetry=" << format_double(diagonal_asymmetry(res.P, cfg.n)) << '\n';
  out << "wrote " << (dir / (stem + ".vtk")).string() << '\n';
}

inline void run_randfield(const RandfieldArgs& a, const Common& c, const CLI::App* sub,
                          std::ostream& out) {
  const MaternParams prm{a.nu, a.range, a.var};
  prm.validate();
  if (a.n < 1) throw ParameterError("randfield: n must be positive");
  const auto dir = prepare_dir(c.out);
  const FieldSample s = sample_log_normal_field(a.n, a.n, prm, a.seed);
  CsvTable t;
  t.header = {"i", "j", "x", "y", "log_k"};
  for (int j = 0; j < a.n; ++j)
    for (int i = 0; i < a.n; ++i)
      t.rows.push_back({double(i), double(j), (i + 0.5) / a.n, (j + 0.5) / a.n, s.at(i, j)});
  write_csv(t, dir / "randfield.csv");
  const Mesh<2> mesh = generate_mesh({MeshFamily::Uniform, std::max(a.n, 2), {}});
  if (a.n >= 2) write_vtk<2>(mesh, {{"log_permeability", s.values}}, dir / "randfield.vtk");
  write_manifest(manifest_entries(sub), dir / "randfield_manifest.txt");
  out << "wrote " << (dir / "randfield.csv").string() << '\n';
}

inline void run_mesh(const MeshArgs& a, const Common& c, const CLI::App* sub, std::ostream& out) {
  const Mesh<2> mesh = generate_mesh({parse_mesh_family(a.family), a.n, a.seed});
  const auto dir = prepare_dir(c.out);
  std::vector<double> measure(mesh.num_cells());
  for (int k = 0; k < mesh.num_cells(); ++k) measure[k] = mesh.cell_measure(k);
  const std::string stem = "mesh_" + a.family + "_" + std::to_string(a.n);
  write_vtk<2>(mesh, {{"measure", measure}}, dir / (stem + ".vtk"));
  write_manifest(manifest_entries(sub), dir / (stem + "_manifest.txt"));
  out << "wrote " << (dir / (stem + ".vtk")).string() << '\n';
}

} // namespace cli

/// Command-line entry point; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Mixed finite element solver for slightly compressible Darcy flow", "mfmfe"};
  app.set_version_flag("--version", std::string(version_string));
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  cli::Common common;
  cli::SolverArgs solver;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "Output directory");
    sub->add_option("--config", common.config, "key=value file; command-line flags take precedence");
  };

  cli::ConvergenceArgs conv;
  auto* c_conv = app.add_subcommand("convergence", "Spatial convergence study of the smooth test problem");
  c_conv->add_option("--family", conv.family, "uniform, smooth, kershaw or random")
      ->check(CLI::IsMember({"uniform", "smooth", "kershaw", "random"}));
  c_conv->add_option("--levels", conv.levels, "Number of refinement levels");
  c_conv->add_option("--n0", conv.n0, "Cells per direction on the coarsest level");
  c_conv->add_option("--variant", conv.variant, "symmetric or nonsymmetric")
      ->check(CLI::IsMember({"symmetric", "nonsymmetric"}));
  c_conv->add_option("--tau", conv.tau, "Time step");
  c_conv->add_option("--final-time", conv.final_time, "Final time");
  c_conv->add_option("--seed", conv.seed, "Seed of the random mesh family");
  add_common(c_conv);
  cli::add_solver_options(c_conv, solver);

  cli::FivespotArgs five;
  auto* c_five = app.add_subcommand("fivespot", "Quarter five-spot run to steady state");
  c_five->add_option("--perm", five.perm, "constant-full, piecewise-full or random")
      ->check(CLI::IsMember({"constant-full", "piecewise-full", "random"}));
  c_five->add_option("--n", five.n, "Cells per direction");
  c_five->add_option("--tau", five.tau, "Time step");
  c_five->add_option("--max-time", five.max_time, "Stop time if no steady state is reached");
  c_five->add_option("--nu", five.nu, "Matern smoothness (random case)");
  c_five->add_option("--range", five.range, "Matern range (random case)");
  c_five->add_option("--var", five.var, "Matern variance (random case)");
  c_five->add_option("--seed", five.seed, "Random field seed");
  c_five->add_option("--variant", five.variant, "symmetric or nonsymmetric")
      ->check(CLI::IsMember({"symmetric", "nonsymmetric"}));
  add_common(c_five);
  cli::add_solver_options(c_five, solver);

  cli::RandfieldArgs rf;
  auto* c_rf = app.add_subcommand("randfield", "Sample a log-normal permeability field");
  c_rf->add_option("--nu", rf.nu, "Matern smoothness (0.5 or 1.5)");
  c_rf->add_option("--range", rf.range, "Matern range");
  c_rf->add_option("--var", rf.var, "Matern variance");
  c_rf->add_option("--n", rf.n, "Cells per direction");
  c_rf->add_option("--seed", rf.seed, "Seed");
  add_common(c_rf);

  cli::MeshArgs me;
  auto* c_mesh = app.add_subcommand("mesh", "Generate a mesh and write it as VTK");
  c_mesh->add_option("--family", me.family, "uniform, smooth, kershaw or random")
      ->check(CLI::IsMember({"uniform", "smooth", "kershaw", "random"}));
  c_mesh->add_option("--n", me.n, "Cells per direction");
  c_mesh->add_option("--seed", me.seed, "Seed of the random family");
  add_common(c_mesh);

  try {
    std::vector<std::string> forward(argv + 1, argv + argc);
    // Config entries go right after the subcommand name so explicit flags win.
    for (std::size_t k = 0; k + 1 < forward.size(); ++k) {
      if (forward[k] == "--config") {
        const auto extra = cli::read_config(forward[k + 1]);
        forward.insert(forward.begin() + 1, extra.begin(), extra.end());
        break;
      }
    }
    std::vector<std::string> args(forward.rbegin(), forward.rend());
    app.parse(args);

    if (c_conv->parsed()) cli::run_convergence(conv, solver, common, c_conv, out);
    else if (c_five->parsed()) cli::run_fivespot(five, solver, common, c_five, out);
    else if (c_rf->parsed()) cli::run_randfield(rf, common, c_rf, out);
    else if (c_mesh->parsed()) cli::run_mesh(me, common, c_mesh, out);
    return ExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return ExitOk;
    }
    app.exit(e, out, err);
    return ExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return ExitConfig;
  } catch (const ParameterError& e) {
    err << "config error: " << e.what() << '\n';
    return ExitConfig;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return ExitSolver;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return ExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return ExitOther;
  }
}

} // namespace mfmfe
