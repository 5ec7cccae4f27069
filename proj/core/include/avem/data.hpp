#ifndef AVEM_DATA_HPP
#define AVEM_DATA_HPP

#include <functional>
#include <optional>
#include <vector>

#include "avem/geometry.hpp"
#include "avem/mesh_forest.hpp"

namespace avem {

/// Coefficients and load of  -div(A grad u) + c u = f,  u = g on the boundary.
struct ProblemData {
  std::function<Mat2(Point)> A;
  std::function<double(Point)> c;
  std::function<double(Point)> f;
  std::function<double(Point)> dirichlet;                 // g, nodal values on the boundary
  std::function<double(Point)> exact;                     // optional diagnostics
  std::function<Point(Point)> exact_grad;

  bool has_exact() const { return static_cast<bool>(exact_grad); }
};

/// Per-element constant data (A_E, c_E, f_E) tied to the forest by element id.
/// Children created after the projection inherit their ancestor's constants
/// through extend_to_descendants.
struct PiecewiseConstantData {
  struct Entry {
    Mat2 A = Mat2::identity();
    double c = 0.0;
    double f = 0.0;
  };
  std::vector<Entry> values;  // indexed by element id
  std::vector<char> valid;

  bool has(ElementId e) const {
    return e >= 0 && static_cast<std::size_t>(e) < valid.size() && valid[static_cast<std::size_t>(e)];
  }
  const Entry& at(ElementId e) const { return values[static_cast<std::size_t>(e)]; }
  void set(ElementId e, const Entry& entry);

  /// Copy constants from the nearest data-carrying ancestor onto every alive
  /// element that has none yet.
  void extend_to_descendants(const MeshForest& mesh);
};

}  // namespace avem

#endif
