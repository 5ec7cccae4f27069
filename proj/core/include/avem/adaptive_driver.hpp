#ifndef AVEM_ADAPTIVE_DRIVER_HPP
#define AVEM_ADAPTIVE_DRIVER_HPP

#include <cmath>
#include <vector>

#include "avem/data.hpp"
#include "avem/data_approximation.hpp"
#include "avem/error_estimator.hpp"
#include "avem/linear_solver.hpp"
#include "avem/mesh_forest.hpp"

namespace avem {

struct AvemConfig {
  double gamma = 1.0;
  int lambda = 10;
  double theta_dorfler = 0.5;
  double theta_pgreedy = std::sqrt(0.75);
  double omega = 1.0;       // relative resolution handed to the data loop
  double eps0 = 1.0;
  double tol = 0.125;
  int galerkin_cap = 60;
  int data_cap = 100;
  SolverConfig solver{};

  void validate() const;
};

struct GalerkinIterate {
  int n_elements = 0;
  int n_vertices = 0;
  double eta2 = 0.0;
  double stab = 0.0;
  double h1_error = std::nan("");       // relative, NaN without an exact solution
  double h1_error2_abs = std::nan("");  // squared seminorm error, unnormalized
};

struct GalerkinResult {
  std::vector<double> dofs;
  int sub_iterations = 0;  // refinement rounds until the estimator met the tolerance
  double eta = 0.0;
  int marked_total = 0;
  std::vector<GalerkinIterate> history;  // one entry per solve
};

/// SOLVE -> ESTIMATE -> MARK -> REFINE until eta <= eps. The averaged data is
/// carried to refined meshes by inheritance (children copy their parent's
/// constants); re-projection only ever happens inside the data loop.
GalerkinResult galerkin(MeshForest& mesh, PiecewiseConstantData& data, const ProblemData& problem,
                        double eps, const AvemConfig& config);

struct AvemPass {
  int k = 0;
  double eps = 0.0;
  int data_iterations = 0;
  int galerkin_iterations = 0;
  int n_elements_data = 0;  // after the data loop
  int n_vertices_data = 0;
  int n_elements = 0;       // after the Galerkin loop
  int n_vertices = 0;
  int marked = 0;
  double eta = 0.0;
  double zeta_data = 0.0;
  double stab = 0.0;
  double h1_error = std::nan("");
  std::vector<GalerkinIterate> galerkin_history;
  std::vector<DataIterate> data_history;
};

struct AvemResult {
  MeshForest mesh;            // final Galerkin mesh
  std::vector<double> dofs;
  MeshForest data_mesh;       // mesh after the last data loop
  PiecewiseConstantData data_averages;
  std::vector<AvemPass> trace;
  int passes = 0;             // executed passes; tolerances run eps0, eps0/2, ...
};

/// Called after each pass with the pass record, the mesh the data loop
/// produced and the mesh the Galerkin loop produced.
using PassObserver =
    std::function<void(const AvemPass&, const MeshForest&, const MeshForest&)>;

/// Two-step loop: approximate the data to omega*eps, then drive the residual
/// estimator below eps, halving eps until it passes tol/2.
AvemResult avem(const MeshForest& initial_mesh, const ProblemData& problem, const AvemConfig& config,
                const PassObserver& on_pass = {});

}  // namespace avem

#endif
