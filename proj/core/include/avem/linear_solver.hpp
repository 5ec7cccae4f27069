#ifndef AVEM_LINEAR_SOLVER_HPP
#define AVEM_LINEAR_SOLVER_HPP

#include <functional>
#include <span>
#include <vector>

namespace avem {

/// Compressed sparse row matrix (full symmetric pattern stored).
struct SparseMatrix {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  /// Build from (row, col, value) triplets; duplicates are summed.
  static SparseMatrix from_triplets(int n, std::vector<std::array<int, 2>> indices,
                                    std::vector<double> values);

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> diagonal() const;
  bool equals_transpose() const;
  double coeff(int r, int c) const;
};

struct SolverConfig {
  double rel_tol = 1e-10;     // on ||Ax-b|| / ||b||
  int max_iterations = 50000;
  enum class Preconditioner { diagonal, none } preconditioner = Preconditioner::diagonal;
};

struct SolveStats {
  int iterations = 0;
  double final_residual = 0.0;  // relative
};

/// Preconditioned conjugate gradients for SPD systems. Deterministic; throws
/// on detected indefiniteness or when the iteration cap is hit. The optional
/// callback sees every iterate (used by tests to check energy monotonicity).
std::vector<double> solve_spd(const SparseMatrix& A, std::span<const double> b,
                              const SolverConfig& config = {}, SolveStats* stats = nullptr,
                              const std::function<void(std::span<const double>)>& on_iterate = {});

}  // namespace avem

#endif
