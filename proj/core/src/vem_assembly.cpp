#include "avem/vem_assembly.hpp"

#include <cmath>
#include <stdexcept>

namespace avem {

void PiecewiseConstantData::set(ElementId e, const Entry& entry) {
  const auto idx = static_cast<std::size_t>(e);
  if (values.size() <= idx) {
    values.resize(idx + 1);
    valid.resize(idx + 1, 0);
  }
  values[idx] = entry;
  valid[idx] = 1;
}

void PiecewiseConstantData::extend_to_descendants(const MeshForest& mesh) {
  values.resize(static_cast<std::size_t>(mesh.num_elements()));
  valid.resize(static_cast<std::size_t>(mesh.num_elements()), 0);
  for (const ElementId e : mesh.alive_elements()) {
    if (valid[static_cast<std::size_t>(e)]) continue;
    ElementId anc = mesh.element(e).parent;
    while (anc != kNoElement && !valid[static_cast<std::size_t>(anc)]) {
      anc = mesh.element(anc).parent;
    }
    if (anc == kNoElement) throw std::invalid_argument("piecewise data: no ancestor carries values");
    values[static_cast<std::size_t>(e)] = values[static_cast<std::size_t>(anc)];
    valid[static_cast<std::size_t>(e)] = 1;
  }
}

ElementGeometry element_geometry(const MeshForest& mesh, ElementId e) {
  const auto ids = mesh.element_boundary_nodes(e);
  ElementGeometry geom;
  geom.nodes.reserve(ids.size());
  for (const NodeId n : ids) geom.nodes.push_back(mesh.node_xy(n));
  const auto& corners = mesh.element(e).corners;
  int found = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      if (ids[i] == corners[c]) {
        geom.corner_pos[c] = static_cast<int>(i);
        ++found;
      }
    }
  }
  if (found != 3) throw std::logic_error("element_geometry: corners not on boundary walk");
  geom.area = mesh.element_area(e);
  geom.centroid = mesh.element_centroid(e);
  return geom;
}

std::vector<SubTriangle> fan_subtriangulation(const ElementGeometry& geom) {
  std::vector<SubTriangle> tris;
  const Point apex = geom.nodes[static_cast<std::size_t>(geom.corner_pos[0])];
  const std::size_t n = geom.nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = geom.nodes[i];
    const Point b = geom.nodes[(i + 1) % n];
    const double area = triangle_area(apex, a, b);
    if (area != 0.0) tris.push_back({apex, a, b});
  }
  return tris;
}

double integrate_element(const ElementGeometry& geom, const TriangleRule& rule,
                         const std::function<double(Point)>& f) {
  double sum = 0.0;
  for (const auto& t : fan_subtriangulation(geom)) {
    sum += integrate_triangle(t.a, t.b, t.c, rule, f);
  }
  return sum;
}

ElementAffine LocalProjection::apply(std::span<const double> nodal) const {
  ElementAffine out;
  out.centroid = centroid;
  for (std::size_t i = 0; i < nodal.size(); ++i) {
    out.grad.x += nodal[i] * gx[i];
    out.grad.y += nodal[i] * gy[i];
    out.value += nodal[i] * value[i];
  }
  return out;
}

LocalProjection local_pinabla(const ElementGeometry& geom) {
  const std::size_t n = geom.nodes.size();
  if (geom.area <= 0.0) throw std::invalid_argument("local_pinabla: degenerate element");

  LocalProjection proj;
  proj.area = geom.area;
  proj.centroid = geom.centroid;
  proj.gx.assign(n, 0.0);
  proj.gy.assign(n, 0.0);
  proj.value.assign(n, 0.0);

  // Gradient row: (1/|E|) * boundary flux of the hat trace, edge by edge.
  double perimeter = 0.0;
  Point boundary_centroid{0.0, 0.0};
  std::vector<double> boundary_mean(n, 0.0);  // mean over dE of each hat trace
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const Point a = geom.nodes[i];
    const Point b = geom.nodes[j];
    const Point normal_len{b.y - a.y, a.x - b.x};  // outward normal times edge length
    const double len = norm(b - a);
    proj.gx[i] += 0.5 * normal_len.x;
    proj.gx[j] += 0.5 * normal_len.x;
    proj.gy[i] += 0.5 * normal_len.y;
    proj.gy[j] += 0.5 * normal_len.y;
    boundary_mean[i] += 0.5 * len;
    boundary_mean[j] += 0.5 * len;
    perimeter += len;
    boundary_centroid = boundary_centroid + len * midpoint(a, b);
  }
  boundary_centroid = (1.0 / perimeter) * boundary_centroid;
  for (std::size_t i = 0; i < n; ++i) {
    proj.gx[i] /= geom.area;
    proj.gy[i] /= geom.area;
    boundary_mean[i] /= perimeter;
  }
  // Constant row: the projection and the trace share the boundary mean.
  const Point shift = boundary_centroid - geom.centroid;
  for (std::size_t i = 0; i < n; ++i) {
    proj.value[i] = boundary_mean[i] - (proj.gx[i] * shift.x + proj.gy[i] * shift.y);
  }
  return proj;
}

namespace {

std::array<double, 3> barycentric(const ElementGeometry& geom, Point p) {
  const Point a = geom.nodes[static_cast<std::size_t>(geom.corner_pos[0])];
  const Point b = geom.nodes[static_cast<std::size_t>(geom.corner_pos[1])];
  const Point c = geom.nodes[static_cast<std::size_t>(geom.corner_pos[2])];
  const double full = cross(b - a, c - a);
  return {cross(b - p, c - p) / full, cross(c - p, a - p) / full, cross(a - p, b - p) / full};
}

}  // namespace

LocalForms local_forms(const ElementGeometry& geom, const LocalProjection& proj, const Mat2& A,
                       double c) {
  if (A.min_eigenvalue() <= 0.0) throw std::invalid_argument("local_forms: diffusion tensor not SPD");
  const std::size_t n = geom.nodes.size();
  LocalForms out;
  out.stiffness.assign(n, std::vector<double>(n, 0.0));
  out.mass.assign(n, std::vector<double>(n, 0.0));
  out.stabilization.assign(n, std::vector<double>(n, 0.0));

  for (std::size_t i = 0; i < n; ++i) {
    const Point Agi = A.apply({proj.gx[i], proj.gy[i]});
    for (std::size_t j = 0; j < n; ++j) {
      out.stiffness[i][j] = geom.area * (Agi.x * proj.gx[j] + Agi.y * proj.gy[j]);
    }
  }

  if (c != 0.0) {
    // c * int_E (P phi_i)(P phi_j): affine times affine, exact with the
    // degree-2 rule on the fan.
    const auto& rule = triangle_rule_degree2();
    const auto tris = fan_subtriangulation(geom);
    for (std::size_t i = 0; i < n; ++i) {
      const ElementAffine pi{{proj.gx[i], proj.gy[i]}, proj.value[i], proj.centroid};
      for (std::size_t j = i; j < n; ++j) {
        const ElementAffine pj{{proj.gx[j], proj.gy[j]}, proj.value[j], proj.centroid};
        double v = 0.0;
        for (const auto& t : tris) {
          v += integrate_triangle(t.a, t.b, t.c, rule, [&](Point p) { return pi(p) * pj(p); });
        }
        out.mass[i][j] = out.mass[j][i] = c * v;
      }
    }
  }

  // dofi-dofi stabilization of the residual against the corner interpolant:
  // S = D^T D with D = I - (barycentric interpolation at the corners).
  std::vector<std::vector<double>> D(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    D[i][i] = 1.0;
    const auto bary = barycentric(geom, geom.nodes[i]);
    for (int corner = 0; corner < 3; ++corner) {
      D[i][static_cast<std::size_t>(geom.corner_pos[corner])] -= bary[static_cast<std::size_t>(corner)];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < n; ++k) v += D[k][i] * D[k][j];
      out.stabilization[i][j] = v;
    }
  }
  return out;
}

SparseSystem assemble(const MeshForest& mesh, const PiecewiseConstantData& data, double gamma,
                      const std::function<double(Point)>& dirichlet) {
  if (gamma <= 0.0) throw std::invalid_argument("assemble: gamma must be positive");

  SparseSystem sys;
  sys.n_nodes = mesh.num_nodes();
  sys.free_index.assign(static_cast<std::size_t>(sys.n_nodes), -1);
  sys.boundary_values.assign(static_cast<std::size_t>(sys.n_nodes), 0.0);
  for (NodeId nid = 0; nid < sys.n_nodes; ++nid) {
    if (mesh.node_on_boundary(nid)) {
      sys.boundary_values[static_cast<std::size_t>(nid)] =
          dirichlet ? dirichlet(mesh.node_xy(nid)) : 0.0;
    } else {
      sys.free_index[static_cast<std::size_t>(nid)] = static_cast<int>(sys.free_nodes.size());
      sys.free_nodes.push_back(nid);
    }
  }

  const int n_free = static_cast<int>(sys.free_nodes.size());
  sys.rhs.assign(static_cast<std::size_t>(n_free), 0.0);
  std::vector<std::array<int, 2>> indices;
  std::vector<double> values;

  for (const ElementId e : mesh.alive_elements()) {
    if (!data.has(e)) throw std::invalid_argument("assemble: data does not cover the mesh");
    const auto& d = data.at(e);
    const auto ids = mesh.element_boundary_nodes(e);
    const auto geom = element_geometry(mesh, e);
    const auto proj = local_pinabla(geom);
    const auto forms = local_forms(geom, proj, d.A, d.c);
    const std::size_t n = ids.size();

    for (std::size_t i = 0; i < n; ++i) {
      const int fi = sys.free_index[static_cast<std::size_t>(ids[i])];
      if (fi < 0) continue;
      // int_E (P phi_i) = |E| * value at centroid
      sys.rhs[static_cast<std::size_t>(fi)] += d.f * geom.area * proj.value[i];
      for (std::size_t j = 0; j < n; ++j) {
        const double k_ij =
            forms.stiffness[i][j] + forms.mass[i][j] + gamma * forms.stabilization[i][j];
        const int fj = sys.free_index[static_cast<std::size_t>(ids[j])];
        if (fj >= 0) {
          indices.push_back({fi, fj});
          values.push_back(k_ij);
        } else {
          sys.rhs[static_cast<std::size_t>(fi)] -=
              k_ij * sys.boundary_values[static_cast<std::size_t>(ids[j])];
        }
      }
    }
  }
  sys.matrix = SparseMatrix::from_triplets(n_free, std::move(indices), std::move(values));
  return sys;
}

std::vector<double> solve_system(const SparseSystem& system, const SolverConfig& config,
                                 SolveStats* stats) {
  std::vector<double> full = system.boundary_values;
  if (!system.free_nodes.empty()) {
    const auto x = solve_spd(system.matrix, system.rhs, config, stats);
    for (std::size_t i = 0; i < system.free_nodes.size(); ++i) {
      full[static_cast<std::size_t>(system.free_nodes[i])] = x[i];
    }
  } else if (stats) {
    *stats = {};
  }
  return full;
}

ProjectedField project_solution(const MeshForest& mesh, std::span<const double> dofs) {
  ProjectedField field;
  field.elems = mesh.alive_elements();
  field.by_element.resize(static_cast<std::size_t>(mesh.num_elements()));
  std::vector<double> local;
  for (const ElementId e : field.elems) {
    const auto ids = mesh.element_boundary_nodes(e);
    const auto geom = element_geometry(mesh, e);
    const auto proj = local_pinabla(geom);
    local.clear();
    for (const NodeId n : ids) local.push_back(dofs[static_cast<std::size_t>(n)]);
    field.by_element[static_cast<std::size_t>(e)] = proj.apply(local);
  }
  return field;
}

double h1_seminorm_error2(const MeshForest& mesh, const ProjectedField& proj,
                          const std::function<Point(Point)>& grad_u) {
  const auto& rule = triangle_rule_degree4();
  double sum = 0.0;
  for (const ElementId e : proj.elems) {
    const auto geom = element_geometry(mesh, e);
    const Point g = proj.at(e).grad;
    sum += integrate_element(geom, rule, [&](Point p) {
      const Point d = grad_u(p) - g;
      return dot(d, d);
    });
  }
  return sum;
}

double h1_seminorm2(const MeshForest& mesh, const std::function<Point(Point)>& grad_u) {
  const auto& rule = triangle_rule_degree4();
  double sum = 0.0;
  for (const ElementId e : mesh.alive_elements()) {
    const auto geom = element_geometry(mesh, e);
    sum += integrate_element(geom, rule, [&](Point p) {
      const Point d = grad_u(p);
      return dot(d, d);
    });
  }
  return sum;
}

double h1_like_error(const MeshForest& mesh, std::span<const double> dofs,
                     const std::function<Point(Point)>& grad_u) {
  const auto proj = project_solution(mesh, dofs);
  const double den2 = h1_seminorm2(mesh, grad_u);
  if (den2 <= 0.0) throw std::invalid_argument("h1_like_error: exact solution has zero seminorm");
  return std::sqrt(h1_seminorm_error2(mesh, proj, grad_u) / den2);
}

}  // namespace avem
