#ifndef AVEM_EXPERIMENT_HPP
#define AVEM_EXPERIMENT_HPP

#include <span>
#include <string>
#include <vector>

#include "avem/adaptive_driver.hpp"
#include "avem/data_approximation.hpp"
#include "avem/problems.hpp"

namespace avem {

/// Least-squares slope of log10(y) against log10(x), restricted to the final
/// decade of x (x >= max/10). NaN when fewer than two points qualify.
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

struct ExperimentSummary {
  AvemResult result;
  double fitted_slope = 0.0;       // H1 error vs #T over the final decade
  int max_lambda_data = 0;         // global index of the data mesh
  int max_lambda_final = 0;        // global index of the final mesh
};

/// Run the adaptive solver and write the artifact set into out_dir:
/// trace.csv, convergence.csv, data_estimators.csv, mesh_data.{txt,svg},
/// mesh_final.{txt,svg}, bisection_heatmap.svg and mesh_stats.txt. Outputs
/// are deterministic for a fixed configuration.
ExperimentSummary run_experiment(const ProblemSpec& spec, const AvemConfig& config,
                                 const std::string& out_dir, bool snapshots = false);

struct GreedySweepRow {
  double delta = 0.0;
  int n_elements = 0;
  double zeta = 0.0;
};

struct GreedySweepResult {
  std::vector<GreedySweepRow> rows;
  double fitted_slope = 0.0;  // NaN when undefined
};

/// Run greedy (or the max-strategy variant) over a geometric delta sweep,
/// restarting from the target's root mesh each time.
GreedySweepResult run_greedy_sweep(const GreedyTarget& target, double t, LqNorm q, double delta0,
                                   int steps, double factor, double theta, bool pseudo,
                                   int lambda_bound, const std::string& csv_path = "");

}  // namespace avem

#endif
