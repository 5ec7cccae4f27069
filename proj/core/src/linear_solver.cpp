#include "avem/linear_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace avem {

SparseMatrix SparseMatrix::from_triplets(int n, std::vector<std::array<int, 2>> indices,
                                         std::vector<double> values) {
  if (indices.size() != values.size()) throw std::invalid_argument("triplet size mismatch");
  std::vector<std::size_t> order(indices.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return indices[a] < indices[b];
  });

  SparseMatrix m;
  m.n = n;
  m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t oi = 0; oi < order.size();) {
    const auto rc = indices[order[oi]];
    double sum = 0.0;
    while (oi < order.size() && indices[order[oi]] == rc) sum += values[order[oi++]];
    m.col.push_back(rc[1]);
    m.val.push_back(sum);
    m.row_ptr[static_cast<std::size_t>(rc[0]) + 1] += 1;
  }
  for (int r = 0; r < n; ++r) m.row_ptr[static_cast<std::size_t>(r) + 1] += m.row_ptr[static_cast<std::size_t>(r)];
  return m;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (int r = 0; r < n; ++r) {
    double sum = 0.0;
    for (int k = row_ptr[static_cast<std::size_t>(r)]; k < row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
      sum += val[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(col[static_cast<std::size_t>(k)])];
    }
    y[static_cast<std::size_t>(r)] = sum;
  }
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(static_cast<std::size_t>(n), 0.0);
  for (int r = 0; r < n; ++r) {
    for (int k = row_ptr[static_cast<std::size_t>(r)]; k < row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
      if (col[static_cast<std::size_t>(k)] == r) d[static_cast<std::size_t>(r)] = val[static_cast<std::size_t>(k)];
    }
  }
  return d;
}

double SparseMatrix::coeff(int r, int c) const {
  for (int k = row_ptr[static_cast<std::size_t>(r)]; k < row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
    if (col[static_cast<std::size_t>(k)] == c) return val[static_cast<std::size_t>(k)];
  }
  return 0.0;
}

bool SparseMatrix::equals_transpose() const {
  for (int r = 0; r < n; ++r) {
    for (int k = row_ptr[static_cast<std::size_t>(r)]; k < row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
      if (coeff(col[static_cast<std::size_t>(k)], r) != val[static_cast<std::size_t>(k)]) return false;
    }
  }
  return true;
}

std::vector<double> solve_spd(const SparseMatrix& A, std::span<const double> b,
                              const SolverConfig& config, SolveStats* stats,
                              const std::function<void(std::span<const double>)>& on_iterate) {
  if (config.rel_tol <= 0.0 || config.rel_tol >= 1.0) throw std::invalid_argument("rel_tol must be in (0,1)");
  if (config.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  const auto n = static_cast<std::size_t>(A.n);
  if (b.size() != n) throw std::invalid_argument("rhs size mismatch");

  std::vector<double> x(n, 0.0);
  const double bnorm = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
  if (stats) *stats = {};
  if (bnorm == 0.0 || n == 0) return x;

  std::vector<double> inv_diag(n, 1.0);
  if (config.preconditioner == SolverConfig::Preconditioner::diagonal) {
    const auto d = A.diagonal();
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i] <= 0.0) throw std::runtime_error("solve_spd: non-positive diagonal entry");
      inv_diag[i] = 1.0 / d[i];
    }
  }

  std::vector<double> r(b.begin(), b.end());
  std::vector<double> z(n), p(n), Ap(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);

  for (int it = 1; it <= config.max_iterations; ++it) {
    A.multiply(p, Ap);
    const double pAp = std::inner_product(p.begin(), p.end(), Ap.begin(), 0.0);
    if (pAp <= 0.0) throw std::runtime_error("solve_spd: matrix is not positive definite");
    const double alpha = rz / pAp;
    for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * Ap[i];
    if (on_iterate) on_iterate(x);
    const double rnorm = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
    if (rnorm / bnorm <= config.rel_tol) {
      if (stats) *stats = {it, rnorm / bnorm};
      return x;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_next = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw std::runtime_error("solve_spd: no convergence within max_iterations");
}

}  // namespace avem
