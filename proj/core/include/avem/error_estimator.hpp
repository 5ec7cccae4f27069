#ifndef AVEM_ERROR_ESTIMATOR_HPP
#define AVEM_ERROR_ESTIMATOR_HPP

#include <span>
#include <vector>

#include "avem/data.hpp"
#include "avem/vem_assembly.hpp"

namespace avem {

/// Per-element squared residual estimators and their sum.
struct EstimatorField {
  std::vector<ElementId> elems;  // ascending
  std::vector<double> eta2;
  double total = 0.0;
};

/// Internal residual r = f_E - c_E * (P u) on one element, an affine field.
ElementAffine internal_residual(const PiecewiseConstantData::Entry& data, const ElementAffine& proj_u);

/// Exact squared L2 norm of an affine field over an element.
double affine_l2_norm2(const ElementGeometry& geom, const ElementAffine& v);

/// Local estimators  h_E^2 ||r||^2 + 1/2 sum_e h_E ||j||^2  with h_E = |E|^{1/2}.
/// Interior jumps count once per incident element with that element's own
/// weight; boundary edges contribute zero.
EstimatorField estimate(const MeshForest& mesh, const PiecewiseConstantData& data,
                        const ProjectedField& proj);

/// Global stabilization value S_T(v, v) of a dof vector.
double stab_term(const MeshForest& mesh, std::span<const double> dofs);

/// Minimum-cardinality Dorfler set: eta^2(M) >= theta * eta^2(T), ties broken
/// by ascending element id; returned ascending.
std::vector<ElementId> dorfler_mark(const EstimatorField& field, double theta);

/// Energy-norm diagnostics against a known solution (projection-based, since
/// discrete functions are only known through their projections).
double energy_error2(const MeshForest& mesh, const PiecewiseConstantData& data,
                     const ProjectedField& proj, const std::function<double(Point)>& u,
                     const std::function<Point(Point)>& grad_u);

/// Broken H1 gap |P u_T - I_T u_T|^2 between the projection and the corner
/// interpolant; zero on conforming meshes.
double interpolant_gap2(const MeshForest& mesh, std::span<const double> dofs,
                        const ProjectedField& proj);

/// Total error quantity: energy error squared plus the interpolant gap.
double total_error_quantity2(const MeshForest& mesh, const PiecewiseConstantData& data,
                             std::span<const double> dofs, const std::function<double(Point)>& u,
                             const std::function<Point(Point)>& grad_u);

}  // namespace avem

#endif
