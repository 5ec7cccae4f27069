#ifndef AVEM_DATA_APPROXIMATION_HPP
#define AVEM_DATA_APPROXIMATION_HPP

#include <functional>
#include <vector>

#include "avem/data.hpp"
#include "avem/mesh_forest.hpp"

namespace avem {

/// Element-by-element averages of the data, by the degree-4 rule on the fan
/// sub-triangulation. Throws if an averaged diffusion tensor fails to be SPD
/// or an averaged reaction coefficient is negative.
PiecewiseConstantData project_data(const MeshForest& mesh, const ProblemData& data);

/// Local data error estimators
///   zeta(E;A) = ||A - Ahat||_inf(E),  zeta(E;c) = h_E ||c - chat||_inf(E),
///   zeta(E;f) = h_E ||f - fhat||_L2(E),
/// with L-infinity norms sampled at the quadrature points, the sub-triangle
/// centroids and the polygon nodes. Globals: max for A and c, l2 for f.
struct DataEstimatorField {
  std::vector<ElementId> elems;  // ascending
  std::vector<double> zeta_A, zeta_c, zeta_f;
  double global_A = 0.0;
  double global_c = 0.0;
  double global_f = 0.0;

  double global() const { return global_A + global_c + global_f; }
};

DataEstimatorField estimate_data(const MeshForest& mesh, const ProblemData& data,
                                 const PiecewiseConstantData& averages);

/// Greedy thresholds eps/3 for A and c; pseudo-greedy max-strategy for f,
/// active only while its global estimator still exceeds eps/3.
std::vector<ElementId> mark_data(const DataEstimatorField& field, double theta, double eps);

struct DataIterate {
  int n_elements = 0;
  double zeta_A = 0.0, zeta_c = 0.0, zeta_f = 0.0, zeta_data = 0.0;
};

struct DataLoopResult {
  PiecewiseConstantData averages;
  DataEstimatorField estimators;
  int iterations = 0;  // refinement rounds performed
  std::vector<DataIterate> history;
};

/// PROJECT -> ESTIMATE -> MARK -> REFINE until zeta(D) <= eps. Throws when the
/// iteration cap is hit.
DataLoopResult data_loop(MeshForest& mesh, const ProblemData& data, double eps, double theta,
                         int lambda_bound, int cap = 100);

enum class LqNorm { two, infinity };

struct GreedyResult {
  int iterations = 0;
  double zeta = 0.0;  // global estimator of the output mesh
};

/// Refine every element with h_E^t ||g - mean||_Lq(E) above delta until none
/// is left. On output all local estimators are at most delta.
GreedyResult greedy(MeshForest& mesh, const std::function<double(Point)>& g, double delta,
                    double t, LqNorm q, int lambda_bound, int cap = 1000);

/// Max-strategy loop driving the global (l2-accumulated) estimator of f below
/// delta; marks elements within a factor theta of the current maximum.
GreedyResult p_greedy(MeshForest& mesh, const std::function<double(Point)>& f, double delta,
                      double theta, int lambda_bound, int cap = 1000);

/// Perturbation diagnostic (1/alpha) |u|_1 (zeta(A) + zeta(c)) + zeta(f), with
/// alpha the smallest eigenvalue of the averaged diffusion tensor over the
/// mesh and |u|_1 an externally supplied seminorm estimate.
double perturbation_bound(const MeshForest& mesh, const ProblemData& data,
                          const PiecewiseConstantData& averages, double u_h1_seminorm);

}  // namespace avem

#endif
