#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "avem/experiment.hpp"
#include "avem/mesh_io.hpp"
#include "avem/problems.hpp"

namespace {

avem::ProblemSpec make_problem(const std::string& name, double h) {
  if (name == "lshape") return avem::build_lshape_problem(h);
  if (name == "square") return avem::build_square_problem();
  throw std::invalid_argument("unknown problem: " + name);
}

int cmd_run(const std::string& problem, double h, const avem::AvemConfig& config,
            const std::string& out_dir, bool snapshots) {
  const auto spec = make_problem(problem, h);
  const auto summary = avem::run_experiment(spec, config, out_dir, snapshots);
  std::printf("passes %d (final eps %.6g)\n", summary.result.passes,
              config.eps0 / (1 << std::max(summary.result.passes - 1, 0)));
  std::printf("data mesh: %d vertices, %d elements, global index %d\n",
              summary.result.data_mesh.num_nodes(), summary.result.data_mesh.num_alive(),
              summary.max_lambda_data);
  std::printf("final mesh: %d vertices, %d elements, global index %d\n",
              summary.result.mesh.num_nodes(), summary.result.mesh.num_alive(),
              summary.max_lambda_final);
  std::printf("H1-error slope over the final decade: %.4f\n", summary.fitted_slope);
  std::printf("artifacts written to %s\n", out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive virtual element solver for 2D elliptic problems"};
  app.require_subcommand(1);

  // run ----------------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Run the adaptive solver on a benchmark problem");
  std::string problem = "lshape";
  std::string out_dir = "out";
  double h = 0.125;
  bool snapshots = false;
  avem::AvemConfig config;
  run->add_option("--problem", problem, "Problem name: lshape | square");
  run->add_option("--mesh-h", h, "Initial structured mesh size");
  run->add_option("--gamma", config.gamma, "Stabilization parameter");
  run->add_option("--lambda", config.lambda, "Admissibility bound on the global index");
  run->add_option("--theta", config.theta_dorfler, "Dorfler marking parameter");
  run->add_option("--theta-pg", config.theta_pgreedy, "Max-strategy marking parameter for the load");
  run->add_option("--omega", config.omega, "Data tolerance safety factor");
  run->add_option("--eps0", config.eps0, "Initial tolerance");
  run->add_option("--tol", config.tol, "Target tolerance");
  run->add_option("--solver-tol", config.solver.rel_tol, "Linear solver relative tolerance");
  run->add_option("--out", out_dir, "Output directory");
  run->add_flag("--snapshots", snapshots, "Write per-pass mesh snapshots");

  // greedy -------------------------------------------------------------------
  auto* greedy = app.add_subcommand("greedy", "Greedy data-approximation rate experiment");
  std::string target = "lshape-a";
  double t_weight = 0.0;
  std::string q_norm = "inf";
  double delta0 = 0.5;
  int steps = 6;
  double factor = 0.5;
  double theta_pg = std::sqrt(0.75);
  bool pseudo = false;
  int lambda_bound = 10;
  std::string csv = "";
  greedy->add_option("--target", target, "Target field: lshape-a | lshape-c | lshape-f | linear | bump | constant");
  greedy->add_option("--t", t_weight, "Mesh-size weight exponent");
  greedy->add_option("--q", q_norm, "Local norm: 2 | inf");
  greedy->add_option("--delta-start", delta0, "First tolerance of the sweep");
  greedy->add_option("--delta-steps", steps, "Number of sweep points");
  greedy->add_option("--delta-factor", factor, "Geometric factor between tolerances");
  greedy->add_option("--theta", theta_pg, "Max-strategy parameter (pseudo-greedy only)");
  greedy->add_flag("--pseudo", pseudo, "Use the max-strategy loop on the global estimator");
  greedy->add_option("--lambda", lambda_bound, "Admissibility bound");
  greedy->add_option("--out", csv, "CSV output path (optional)");

  // mesh ---------------------------------------------------------------------
  auto* mesh_cmd = app.add_subcommand("mesh", "Mesh utilities");
  auto* mesh_export = mesh_cmd->add_subcommand("export", "Export a mesh as text or SVG");
  std::string fmt = "svg";
  std::string in_path;
  std::string mesh_problem;
  double mesh_h = 0.125;
  int uniform = 0;
  std::string out_path = "mesh.svg";
  mesh_export->add_option("--fmt", fmt, "Output format: svg | txt");
  mesh_export->add_option("--in", in_path, "Input mesh file (text format)");
  mesh_export->add_option("--problem", mesh_problem, "Generate the initial mesh of a problem instead");
  mesh_export->add_option("--mesh-h", mesh_h, "Mesh size for --problem lshape");
  mesh_export->add_option("--uniform-refine", uniform, "Uniform refinement rounds before export");
  mesh_export->add_option("--out", out_path, "Output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(problem, h, config, out_dir, snapshots);

    if (*greedy) {
      avem::LqNorm q = avem::LqNorm::infinity;
      if (q_norm == "2") q = avem::LqNorm::two;
      else if (q_norm != "inf") throw std::invalid_argument("--q must be 2 or inf");
      const auto tgt = avem::build_greedy_target(target);
      const auto sweep =
          avem::run_greedy_sweep(tgt, t_weight, q, delta0, steps, factor, theta_pg, pseudo,
                                 lambda_bound, csv);
      std::printf("delta,n_elements,zeta\n");
      for (const auto& r : sweep.rows) {
        std::printf("%.6g,%d,%.6g\n", r.delta, r.n_elements, r.zeta);
      }
      if (std::isnan(sweep.fitted_slope)) {
        std::printf("fitted slope: undefined (fewer than two points in the final decade)\n");
      } else {
        std::printf("fitted slope over the final decade: %.4f\n", sweep.fitted_slope);
      }
      return 0;
    }

    if (*mesh_export) {
      avem::MeshForest mesh = [&] {
        if (!in_path.empty()) return avem::load_mesh_text_file(in_path);
        if (mesh_problem.empty()) throw std::invalid_argument("mesh export: need --in or --problem");
        return make_problem(mesh_problem, mesh_h).mesh;
      }();
      for (int i = 0; i < uniform; ++i) mesh.refine(mesh.alive_elements(), avem::kLambdaUnbounded);
      if (fmt == "txt") {
        avem::save_mesh_text_file(mesh, out_path);
      } else if (fmt == "svg") {
        avem::SvgOptions opt;
        opt.highlight_polygons = true;
        avem::save_mesh_svg_file(mesh, out_path, opt);
      } else {
        throw std::invalid_argument("--fmt must be svg or txt");
      }
      std::printf("wrote %s\n", out_path.c_str());
      return 0;
    }
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 0;
}
