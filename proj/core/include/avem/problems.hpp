#ifndef AVEM_PROBLEMS_HPP
#define AVEM_PROBLEMS_HPP

#include <functional>
#include <string>

#include "avem/data.hpp"
#include "avem/mesh_forest.hpp"

namespace avem {

/// Structured right-triangle mesh over [x0,x1] x [y0,y1]: nx*ny squares, each
/// split along the SW-NE diagonal; squares whose center fails `keep` are
/// dropped. Coordinates must come out dyadic.
MeshForest make_structured_mesh(double x0, double y0, double x1, double y1, int nx, int ny,
                                const std::function<bool(Point)>& keep = {});

/// Uniform mesh of the L-shaped domain (-1,1)^2 minus the closed quadrant
/// [0,1] x [-1,0], with square side h (a power of two).
MeshForest make_lshape_mesh(double h = 0.125);

/// Uniform mesh of the unit square with n x n squares.
MeshForest make_square_mesh(int n = 4);

struct ProblemSpec {
  std::string name;
  MeshForest mesh;
  ProblemData data;
};

/// The L-shaped benchmark: A = a(x,y) I with two Gaussian bumps, a Gaussian
/// reaction profile, and the load manufactured in closed form from
///   u = r^{2/3} sin(2 alpha / 3) + exp(-1000((x-0.5)^2 + (y-0.5)^2)),
/// polar coordinates taken around the reentrant corner. Derivatives of the
/// corner term are evaluated in polar form; the corner itself is never a
/// quadrature node.
ProblemSpec build_lshape_problem(double h = 0.125);

/// Unit-square smoke problem with the affine solution u = x (A = I, c = 0,
/// f = 0, boundary data matching).
ProblemSpec build_square_problem(int n = 4);

/// Scalar fields used by the greedy approximation experiments.
struct GreedyTarget {
  std::string name;
  MeshForest mesh;
  std::function<double(Point)> g;
};

/// Known names: lshape-a, lshape-c, lshape-f, linear, bump, constant.
GreedyTarget build_greedy_target(const std::string& name);

}  // namespace avem

#endif
