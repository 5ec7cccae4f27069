#include "avem/error_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace avem {

ElementAffine internal_residual(const PiecewiseConstantData::Entry& data, const ElementAffine& proj_u) {
  ElementAffine r;
  r.centroid = proj_u.centroid;
  r.grad = {-data.c * proj_u.grad.x, -data.c * proj_u.grad.y};
  r.value = data.f - data.c * proj_u.value;
  return r;
}

double affine_l2_norm2(const ElementGeometry& geom, const ElementAffine& v) {
  const auto& rule = triangle_rule_degree2();
  double sum = 0.0;
  for (const auto& t : fan_subtriangulation(geom)) {
    sum += integrate_triangle(t.a, t.b, t.c, rule, [&](Point p) {
      const double x = v(p);
      return x * x;
    });
  }
  return sum;
}

EstimatorField estimate(const MeshForest& mesh, const PiecewiseConstantData& data,
                        const ProjectedField& proj) {
  // First pass: squared jumps per skeleton edge, keyed by the node pair.
  struct EdgeFlux {
    Point flux;       // A_E grad(P u) of the first incident element
    Point normal;     // its outward normal (unit)
    bool second = false;
    double j = 0.0;
  };
  std::unordered_map<std::uint64_t, EdgeFlux> edges;
  const auto key = [](NodeId a, NodeId b) {
    const auto lo = static_cast<std::uint32_t>(std::min(a, b));
    const auto hi = static_cast<std::uint32_t>(std::max(a, b));
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
  };

  for (const ElementId e : proj.elems) {
    if (!data.has(e)) throw std::invalid_argument("estimate: data does not cover the mesh");
    const auto ids = mesh.element_boundary_nodes(e);
    const Point flux = data.at(e).A.apply(proj.at(e).grad);
    const std::size_t n = ids.size();
    for (std::size_t i = 0; i < n; ++i) {
      const NodeId a = ids[i];
      const NodeId b = ids[(i + 1) % n];
      const Point pa = mesh.node_xy(a);
      const Point pb = mesh.node_xy(b);
      const double len = norm(pb - pa);
      const Point normal{(pb.y - pa.y) / len, (pa.x - pb.x) / len};
      auto [it, fresh] = edges.try_emplace(key(a, b));
      if (fresh) {
        it->second.flux = flux;
        it->second.normal = normal;
      } else {
        it->second.second = true;
        it->second.j = dot(it->second.flux - flux, it->second.normal);
      }
    }
  }

  EstimatorField field;
  field.elems = proj.elems;
  field.eta2.reserve(field.elems.size());
  for (const ElementId e : field.elems) {
    const auto ids = mesh.element_boundary_nodes(e);
    const auto geom = element_geometry(mesh, e);
    const double hE = std::sqrt(geom.area);
    const auto r = internal_residual(data.at(e), proj.at(e));
    double eta2 = hE * hE * affine_l2_norm2(geom, r);

    const std::size_t n = ids.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& rec = edges.at(key(ids[i], ids[(i + 1) % n]));
      if (!rec.second) continue;  // boundary edge: jump set to zero
      const double len = norm(mesh.node_xy(ids[(i + 1) % n]) - mesh.node_xy(ids[i]));
      eta2 += 0.5 * hE * rec.j * rec.j * len;
    }
    field.eta2.push_back(eta2);
    field.total += eta2;
  }
  return field;
}

namespace {

std::array<double, 3> corner_values(const MeshForest& mesh, ElementId e,
                                    std::span<const double> dofs) {
  const auto& c = mesh.element(e).corners;
  return {dofs[static_cast<std::size_t>(c[0])], dofs[static_cast<std::size_t>(c[1])],
          dofs[static_cast<std::size_t>(c[2])]};
}

// Gradient of the P1 interpolant at the triangle corners.
Point p1_gradient(const MeshForest& mesh, ElementId e, const std::array<double, 3>& v) {
  const auto& c = mesh.element(e).corners;
  const Point a = mesh.node_xy(c[0]), b = mesh.node_xy(c[1]), d = mesh.node_xy(c[2]);
  const double twoA = cross(b - a, d - a);
  const Point ga{(b.y - d.y) / twoA, (d.x - b.x) / twoA};
  const Point gb{(d.y - a.y) / twoA, (a.x - d.x) / twoA};
  const Point gc{(a.y - b.y) / twoA, (b.x - a.x) / twoA};
  return {v[0] * ga.x + v[1] * gb.x + v[2] * gc.x, v[0] * ga.y + v[1] * gb.y + v[2] * gc.y};
}

double p1_value(const MeshForest& mesh, ElementId e, const std::array<double, 3>& v, Point p) {
  const auto& c = mesh.element(e).corners;
  const Point a = mesh.node_xy(c[0]), b = mesh.node_xy(c[1]), d = mesh.node_xy(c[2]);
  const double full = cross(b - a, d - a);
  const double la = cross(b - p, d - p) / full;
  const double lb = cross(d - p, a - p) / full;
  const double lc = cross(a - p, b - p) / full;
  return la * v[0] + lb * v[1] + lc * v[2];
}

}  // namespace

double stab_term(const MeshForest& mesh, std::span<const double> dofs) {
  double total = 0.0;
  for (const ElementId e : mesh.alive_elements()) {
    const auto ids = mesh.element_boundary_nodes(e);
    if (ids.size() == 3) continue;  // proper triangle: interpolant is exact at all nodes
    const auto cv = corner_values(mesh, e, dofs);
    for (const NodeId n : ids) {
      const double d = dofs[static_cast<std::size_t>(n)] - p1_value(mesh, e, cv, mesh.node_xy(n));
      total += d * d;
    }
  }
  return total;
}

std::vector<ElementId> dorfler_mark(const EstimatorField& field, double theta) {
  if (field.elems.empty()) throw std::invalid_argument("dorfler_mark: empty estimator field");
  if (theta <= 0.0 || theta >= 1.0) throw std::invalid_argument("dorfler_mark: theta must be in (0,1)");

  std::vector<std::size_t> order(field.elems.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (field.eta2[a] != field.eta2[b]) return field.eta2[a] > field.eta2[b];
    return field.elems[a] < field.elems[b];
  });

  const double target = theta * field.total;
  std::vector<ElementId> marked;
  double acc = 0.0;
  for (const std::size_t i : order) {
    marked.push_back(field.elems[i]);
    acc += field.eta2[i];
    if (acc >= target) break;
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

double energy_error2(const MeshForest& mesh, const PiecewiseConstantData& data,
                     const ProjectedField& proj, const std::function<double(Point)>& u,
                     const std::function<Point(Point)>& grad_u) {
  const auto& rule = triangle_rule_degree4();
  double sum = 0.0;
  for (const ElementId e : proj.elems) {
    const auto geom = element_geometry(mesh, e);
    const auto& d = data.at(e);
    const auto& pu = proj.at(e);
    sum += integrate_element(geom, rule, [&](Point p) {
      const Point dg = grad_u(p) - pu.grad;
      const double dv = u(p) - pu(p);
      return dot(d.A.apply(dg), dg) + d.c * dv * dv;
    });
  }
  return sum;
}

double interpolant_gap2(const MeshForest& mesh, std::span<const double> dofs,
                        const ProjectedField& proj) {
  double sum = 0.0;
  for (const ElementId e : proj.elems) {
    const Point gi = p1_gradient(mesh, e, corner_values(mesh, e, dofs));
    const Point d = proj.at(e).grad - gi;
    sum += dot(d, d) * mesh.element_area(e);
  }
  return sum;
}

double total_error_quantity2(const MeshForest& mesh, const PiecewiseConstantData& data,
                             std::span<const double> dofs, const std::function<double(Point)>& u,
                             const std::function<Point(Point)>& grad_u) {
  const auto proj = project_solution(mesh, dofs);
  return energy_error2(mesh, data, proj, u, grad_u) + interpolant_gap2(mesh, dofs, proj);
}

}  // namespace avem
