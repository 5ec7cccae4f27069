#include "avem/adaptive_driver.hpp"

#include <stdexcept>

#include "avem/vem_assembly.hpp"

namespace avem {

void AvemConfig::validate() const {
  if (gamma <= 0.0) throw std::invalid_argument("config: gamma must be positive");
  if (lambda < 1) throw std::invalid_argument("config: lambda must be at least 1");
  if (theta_dorfler <= 0.0 || theta_dorfler >= 1.0) throw std::invalid_argument("config: theta_dorfler in (0,1)");
  if (theta_pgreedy <= 0.0 || theta_pgreedy >= 1.0) throw std::invalid_argument("config: theta_pgreedy in (0,1)");
  if (omega <= 0.0 || omega > 1.0) throw std::invalid_argument("config: omega in (0,1]");
  if (tol <= 0.0 || eps0 < tol) throw std::invalid_argument("config: need eps0 >= tol > 0");
  if (galerkin_cap < 1 || data_cap < 1) throw std::invalid_argument("config: caps must be >= 1");
}

GalerkinResult galerkin(MeshForest& mesh, PiecewiseConstantData& data, const ProblemData& problem,
                        double eps, const AvemConfig& config) {
  if (eps <= 0.0) throw std::invalid_argument("galerkin: eps must be positive");
  GalerkinResult result;
  for (int j = 0;; ++j) {
    data.extend_to_descendants(mesh);
    const auto system = assemble(mesh, data, config.gamma, problem.dirichlet);
    auto dofs = solve_system(system, config.solver);
    const auto proj = project_solution(mesh, dofs);
    const auto field = estimate(mesh, data, proj);

    GalerkinIterate it;
    it.n_elements = mesh.num_alive();
    it.n_vertices = mesh.num_nodes();
    it.eta2 = field.total;
    it.stab = stab_term(mesh, dofs);
    if (problem.has_exact()) {
      it.h1_error2_abs = h1_seminorm_error2(mesh, proj, problem.exact_grad);
      it.h1_error = std::sqrt(it.h1_error2_abs / h1_seminorm2(mesh, problem.exact_grad));
    }
    result.history.push_back(it);

    if (std::sqrt(field.total) <= eps) {
      result.dofs = std::move(dofs);
      result.sub_iterations = j;
      result.eta = std::sqrt(field.total);
      return result;
    }
    if (j >= config.galerkin_cap) throw std::runtime_error("galerkin: sub-iteration cap exceeded");

    const auto marked = dorfler_mark(field, config.theta_dorfler);
    result.marked_total += static_cast<int>(marked.size());
    mesh.refine(marked, config.lambda);
  }
}

AvemResult avem(const MeshForest& initial_mesh, const ProblemData& problem,
                const AvemConfig& config, const PassObserver& on_pass) {
  config.validate();
  AvemResult result{initial_mesh, {}, initial_mesh, {}, {}, 0};

  double eps = config.eps0;
  int k = 0;
  while (eps > 0.5 * config.tol) {
    auto data_result = data_loop(result.mesh, problem, config.omega * eps, config.theta_pgreedy,
                                 config.lambda, config.data_cap);
    result.data_mesh = result.mesh;
    result.data_averages = data_result.averages;

    AvemPass pass;
    pass.k = k;
    pass.eps = eps;
    pass.data_iterations = data_result.iterations;
    pass.data_history = std::move(data_result.history);
    pass.n_elements_data = result.mesh.num_alive();
    pass.n_vertices_data = result.mesh.num_nodes();
    pass.zeta_data = data_result.estimators.global();

    auto averages = std::move(data_result.averages);
    auto gal = galerkin(result.mesh, averages, problem, eps, config);
    pass.galerkin_iterations = gal.sub_iterations;
    pass.marked = gal.marked_total;
    pass.n_elements = result.mesh.num_alive();
    pass.n_vertices = result.mesh.num_nodes();
    pass.eta = gal.eta;
    pass.stab = gal.history.back().stab;
    pass.h1_error = gal.history.back().h1_error;
    pass.galerkin_history = std::move(gal.history);
    result.dofs = std::move(gal.dofs);
    result.trace.push_back(std::move(pass));
    if (on_pass) on_pass(result.trace.back(), result.data_mesh, result.mesh);

    eps *= 0.5;
    ++k;
  }
  result.passes = k;
  return result;
}

}  // namespace avem
