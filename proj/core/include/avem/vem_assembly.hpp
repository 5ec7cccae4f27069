#ifndef AVEM_VEM_ASSEMBLY_HPP
#define AVEM_VEM_ASSEMBLY_HPP

#include <functional>
#include <span>
#include <vector>

#include "avem/data.hpp"
#include "avem/geometry.hpp"
#include "avem/linear_solver.hpp"
#include "avem/mesh_forest.hpp"

namespace avem {

/// Boundary geometry of one element in the polygon view: all nodes on the
/// boundary (counterclockwise, hanging nodes included) plus the positions of
/// the three triangle corners within that list.
struct ElementGeometry {
  std::vector<Point> nodes;
  std::array<int, 3> corner_pos{0, 0, 0};
  double area = 0.0;
  Point centroid;  // of the triangle
};

ElementGeometry element_geometry(const MeshForest& mesh, ElementId e);

/// An affine function on an element, stored as value at the centroid plus a
/// constant gradient.
struct ElementAffine {
  Point grad;
  double value = 0.0;  // at centroid
  Point centroid;

  double operator()(Point p) const { return value + dot(grad, p - centroid); }
};

/// Elliptic projection onto affine polynomials, one column per boundary node.
/// The gradient row is the boundary flux of the piecewise-linear trace scaled
/// by 1/|E| (a trapezoid sum, exact for linear traces); the constant row is
/// fixed by matching boundary means.
struct LocalProjection {
  std::vector<double> gx, gy;   // gradient of the projection of each basis function
  std::vector<double> value;    // its value at the element centroid
  double area = 0.0;
  Point centroid;

  ElementAffine apply(std::span<const double> nodal) const;
};

LocalProjection local_pinabla(const ElementGeometry& geom);

/// Local stiffness a_E, mass m_E and stabilization S_E, each N x N over the
/// boundary nodes. The stabilization pairs nodal residuals against the corner
/// interpolant, so it vanishes identically on proper triangles.
struct LocalForms {
  std::vector<std::vector<double>> stiffness;
  std::vector<std::vector<double>> mass;
  std::vector<std::vector<double>> stabilization;
};

LocalForms local_forms(const ElementGeometry& geom, const LocalProjection& proj, const Mat2& A,
                       double c);

/// Assembled Galerkin system over free (interior) nodes with boundary values
/// eliminated into the right-hand side. Every mesh node, hanging or not, is a
/// degree of freedom; dofs are ordered by node id.
struct SparseSystem {
  int n_nodes = 0;
  std::vector<int> free_index;        // node id -> free dof index or -1
  std::vector<NodeId> free_nodes;     // inverse map
  SparseMatrix matrix;                // free x free
  std::vector<double> rhs;            // free
  std::vector<double> boundary_values;  // full length, zero at free nodes
};

SparseSystem assemble(const MeshForest& mesh, const PiecewiseConstantData& data, double gamma,
                      const std::function<double(Point)>& dirichlet);

/// Solve the assembled system and return the full nodal vector (boundary
/// values included).
std::vector<double> solve_system(const SparseSystem& system, const SolverConfig& config = {},
                                 SolveStats* stats = nullptr);

/// Element-wise elliptic projection of a discrete solution.
struct ProjectedField {
  std::vector<ElementId> elems;          // alive elements, ascending
  std::vector<ElementAffine> by_element; // indexed by element id

  const ElementAffine& at(ElementId e) const { return by_element[static_cast<std::size_t>(e)]; }
};

ProjectedField project_solution(const MeshForest& mesh, std::span<const double> dofs);

/// Squared broken H1 distance between an exact gradient and the projected
/// discrete field, integrated with the degree-4 rule on the fan
/// sub-triangulation.
double h1_seminorm_error2(const MeshForest& mesh, const ProjectedField& proj,
                          const std::function<Point(Point)>& grad_u);
double h1_seminorm2(const MeshForest& mesh, const std::function<Point(Point)>& grad_u);

/// Relative H1-like error  |u - P u_T|_{1,T} / |u|_{1,Omega}.
double h1_like_error(const MeshForest& mesh, std::span<const double> dofs,
                     const std::function<Point(Point)>& grad_u);

/// Fan sub-triangulation from the first corner (degenerate slivers dropped).
struct SubTriangle {
  Point a, b, c;
};
std::vector<SubTriangle> fan_subtriangulation(const ElementGeometry& geom);

/// Integrate a function over an element through the fan, with the given rule.
double integrate_element(const ElementGeometry& geom, const TriangleRule& rule,
                         const std::function<double(Point)>& f);

}  // namespace avem

#endif
