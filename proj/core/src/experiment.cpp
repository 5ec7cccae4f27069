#include "avem/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include "avem/mesh_io.hpp"

namespace avem {

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_loglog_slope: size mismatch");
  double xmax = 0.0;
  for (const double v : x) xmax = std::max(xmax, v);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= xmax / 10.0 && x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log10(x[i]));
      ly.push_back(std::log10(y[i]));
    }
  }
  if (lx.size() < 2) return std::nan("");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double n = static_cast<double>(lx.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return std::nan("");
  return (n * sxy - sx * sy) / denom;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct PolygonCounts {
  int total = 0, quads = 0, pentagons = 0, hexagons_plus = 0;
};

PolygonCounts count_polygons(const MeshForest& mesh) {
  PolygonCounts pc;
  for (const ElementId e : mesh.alive_elements()) {
    const auto n = mesh.element_boundary_nodes(e).size();
    if (n <= 3) continue;
    ++pc.total;
    if (n == 4) ++pc.quads;
    else if (n == 5) ++pc.pentagons;
    else ++pc.hexagons_plus;
  }
  return pc;
}

}  // namespace

ExperimentSummary run_experiment(const ProblemSpec& spec, const AvemConfig& config,
                                 const std::string& out_dir, bool snapshots) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto path = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

  PassObserver observer;
  if (snapshots) {
    observer = [&](const AvemPass& pass, const MeshForest& after_data, const MeshForest& after_gal) {
      save_mesh_text_file(after_data, path("mesh_data_k" + std::to_string(pass.k) + ".txt"));
      save_mesh_text_file(after_gal, path("mesh_k" + std::to_string(pass.k) + ".txt"));
    };
  }
  ExperimentSummary summary{avem(spec.mesh, spec.data, config, observer)};
  const AvemResult& res = summary.result;

  {
    std::ofstream os(path("trace.csv"));
    os << "k,eps,data_iterations,galerkin_iterations,n_vertices_data,n_elements_data,"
          "n_vertices,n_elements,marked,eta,zeta_data,stab,h1_error\n";
    for (const auto& p : res.trace) {
      os << p.k << ',' << num(p.eps) << ',' << p.data_iterations << ',' << p.galerkin_iterations
         << ',' << p.n_vertices_data << ',' << p.n_elements_data << ',' << p.n_vertices << ','
         << p.n_elements << ',' << p.marked << ',' << num(p.eta) << ',' << num(p.zeta_data) << ','
         << num(p.stab) << ',' << num(p.h1_error) << '\n';
    }
  }
  {
    std::ofstream os(path("convergence.csv"));
    os << "k,j,n_vertices,n_elements,eta,eta2,stab,h1_error\n";
    for (const auto& p : res.trace) {
      for (std::size_t j = 0; j < p.galerkin_history.size(); ++j) {
        const auto& it = p.galerkin_history[j];
        os << p.k << ',' << j << ',' << it.n_vertices << ',' << it.n_elements << ','
           << num(std::sqrt(it.eta2)) << ',' << num(it.eta2) << ',' << num(it.stab) << ','
           << num(it.h1_error) << '\n';
      }
    }
  }
  {
    std::ofstream os(path("data_estimators.csv"));
    os << "k,iter,n_elements,zeta_A,zeta_c,zeta_f,zeta_D\n";
    for (const auto& p : res.trace) {
      for (std::size_t j = 0; j < p.data_history.size(); ++j) {
        const auto& it = p.data_history[j];
        os << p.k << ',' << j << ',' << it.n_elements << ',' << num(it.zeta_A) << ','
           << num(it.zeta_c) << ',' << num(it.zeta_f) << ',' << num(it.zeta_data) << '\n';
      }
    }
  }

  save_mesh_text_file(res.data_mesh, path("mesh_data.txt"));
  save_mesh_text_file(res.mesh, path("mesh_final.txt"));
  {
    SvgOptions opt;
    opt.highlight_polygons = true;
    save_mesh_svg_file(res.data_mesh, path("mesh_data.svg"), opt);
    save_mesh_svg_file(res.mesh, path("mesh_final.svg"), opt);
  }
  {
    // Bisections needed to create each final element starting from the data
    // mesh of the last pass; both partitions live in one forest, so the count
    // is a level difference along the parent chain.
    std::map<ElementId, int> buckets;
    for (const ElementId e : res.mesh.alive_elements()) {
      ElementId anc = e;
      while (anc != kNoElement &&
             !(anc < res.data_mesh.num_elements() && res.data_mesh.is_alive(anc))) {
        anc = res.mesh.element(anc).parent;
      }
      const int count =
          anc == kNoElement ? 0 : res.mesh.element(e).level - res.mesh.element(anc).level;
      buckets[e] = count;
    }
    SvgOptions opt;
    opt.bucket_values = &buckets;
    save_mesh_svg_file(res.mesh, path("bisection_heatmap.svg"), opt);
  }
  std::vector<double> nT, h1;
  for (const auto& p : res.trace) {
    for (const auto& it : p.galerkin_history) {
      if (!std::isnan(it.h1_error)) {
        nT.push_back(it.n_elements);
        h1.push_back(it.h1_error);
      }
    }
  }
  summary.fitted_slope = fit_loglog_slope(nT, h1);
  summary.max_lambda_data = res.data_mesh.global_index();
  summary.max_lambda_final = res.mesh.global_index();

  // Uncalibrated data-perturbation diagnostic on the last data mesh, with the
  // solution seminorm estimated from the projected discrete solution.
  double pert = std::nan("");
  {
    const auto proj = project_solution(res.mesh, res.dofs);
    double u_h1_2 = 0.0;
    for (const ElementId e : proj.elems) {
      const Point g = proj.at(e).grad;
      u_h1_2 += dot(g, g) * res.mesh.element_area(e);
    }
    pert = perturbation_bound(res.data_mesh, spec.data, res.data_averages, std::sqrt(u_h1_2));
  }

  {
    const auto pc_data = count_polygons(res.data_mesh);
    const auto pc_final = count_polygons(res.mesh);
    std::ofstream os(path("mesh_stats.txt"));
    os << "problem " << spec.name << "\n";
    os << "passes " << res.passes << "\n";
    os << "data_mesh vertices " << res.data_mesh.num_nodes() << " elements "
       << res.data_mesh.num_alive() << " polygons " << pc_data.total << " (quads " << pc_data.quads
       << ", pentagons " << pc_data.pentagons << ", hexagons+ " << pc_data.hexagons_plus
       << ") max_global_index " << summary.max_lambda_data << "\n";
    os << "final_mesh vertices " << res.mesh.num_nodes() << " elements " << res.mesh.num_alive()
       << " polygons " << pc_final.total << " (quads " << pc_final.quads << ", pentagons "
       << pc_final.pentagons << ", hexagons+ " << pc_final.hexagons_plus
       << ") max_global_index " << summary.max_lambda_final << "\n";
    os << "h1_slope_final_decade " << num(summary.fitted_slope) << "\n";
    os << "perturbation_bound " << num(pert) << "\n";
    for (const auto& p : res.trace) {
      os << "data_refinements_at_k" << p.k << " " << p.data_iterations << "\n";
    }
  }
  return summary;
}

GreedySweepResult run_greedy_sweep(const GreedyTarget& target, double t, LqNorm q, double delta0,
                                   int steps, double factor, double theta, bool pseudo,
                                   int lambda_bound, const std::string& csv_path) {
  if (steps < 1) throw std::invalid_argument("run_greedy_sweep: steps must be >= 1");
  if (factor <= 0.0 || factor >= 1.0) throw std::invalid_argument("run_greedy_sweep: factor in (0,1)");

  GreedySweepResult out;
  double delta = delta0;
  for (int s = 0; s < steps; ++s, delta *= factor) {
    MeshForest mesh = target.mesh;
    const GreedyResult r = pseudo ? p_greedy(mesh, target.g, delta, theta, lambda_bound, 10000)
                                  : greedy(mesh, target.g, delta, t, q, lambda_bound, 10000);
    out.rows.push_back({delta, mesh.num_alive(), r.zeta});
  }

  std::vector<double> x, y;
  for (const auto& r : out.rows) {
    x.push_back(r.n_elements);
    y.push_back(r.zeta);
  }
  out.fitted_slope = fit_loglog_slope(x, y);

  if (!csv_path.empty()) {
    std::ofstream os(csv_path);
    os << "delta,n_elements,zeta\n";
    for (const auto& r : out.rows) {
      os << num(r.delta) << ',' << r.n_elements << ',' << num(r.zeta) << '\n';
    }
    os << "# fitted_slope_final_decade " << num(out.fitted_slope) << '\n';
  }
  return out;
}

}  // namespace avem
