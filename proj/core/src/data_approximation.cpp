#include "avem/data_approximation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "avem/vem_assembly.hpp"

namespace avem {

namespace {

void for_each_sample(const ElementGeometry& geom, const std::function<void(Point)>& visit) {
  const auto& rule = triangle_rule_degree4();
  for (const auto& t : fan_subtriangulation(geom)) {
    for (const auto& l : rule.bary) {
      visit({l[0] * t.a.x + l[1] * t.b.x + l[2] * t.c.x,
             l[0] * t.a.y + l[1] * t.b.y + l[2] * t.c.y});
    }
    visit({(t.a.x + t.b.x + t.c.x) / 3.0, (t.a.y + t.b.y + t.c.y) / 3.0});
  }
  for (const Point& p : geom.nodes) visit(p);
}

PiecewiseConstantData::Entry average_on(const ElementGeometry& geom, const ProblemData& data) {
  const auto& rule = triangle_rule_degree4();
  PiecewiseConstantData::Entry entry;
  double a11 = 0.0, a12 = 0.0, a22 = 0.0, c = 0.0, f = 0.0;
  for (const auto& t : fan_subtriangulation(geom)) {
    a11 += integrate_triangle(t.a, t.b, t.c, rule, [&](Point p) { return data.A(p).a11; });
    a12 += integrate_triangle(t.a, t.b, t.c, rule, [&](Point p) { return data.A(p).a12; });
    a22 += integrate_triangle(t.a, t.b, t.c, rule, [&](Point p) { return data.A(p).a22; });
    c += integrate_triangle(t.a, t.b, t.c, rule, [&](Point p) { return data.c(p); });
    f += integrate_triangle(t.a, t.b, t.c, rule, [&](Point p) { return data.f(p); });
  }
  entry.A = {a11 / geom.area, a12 / geom.area, a22 / geom.area};
  entry.c = c / geom.area;
  entry.f = f / geom.area;
  if (entry.A.min_eigenvalue() <= 0.0) {
    throw std::runtime_error("project_data: averaged diffusion tensor is not SPD");
  }
  if (entry.c < 0.0) throw std::runtime_error("project_data: averaged reaction coefficient is negative");
  return entry;
}

struct LocalZeta {
  double zA = 0.0, zc = 0.0, zf = 0.0;
};

LocalZeta local_zeta(const ElementGeometry& geom, const ProblemData& data,
                     const PiecewiseConstantData::Entry& avg) {
  LocalZeta z;
  const double hE = std::sqrt(geom.area);
  for_each_sample(geom, [&](Point p) {
    z.zA = std::max(z.zA, (data.A(p) - avg.A).spectral_norm());
    z.zc = std::max(z.zc, std::abs(data.c(p) - avg.c));
  });
  z.zc *= hE;
  double f2 = 0.0;
  const auto& rule = triangle_rule_degree4();
  for (const auto& t : fan_subtriangulation(geom)) {
    f2 += integrate_triangle(t.a, t.b, t.c, rule, [&](Point p) {
      const double d = data.f(p) - avg.f;
      return d * d;
    });
  }
  z.zf = hE * std::sqrt(std::max(f2, 0.0));
  return z;
}

}  // namespace

PiecewiseConstantData project_data(const MeshForest& mesh, const ProblemData& data) {
  PiecewiseConstantData out;
  for (const ElementId e : mesh.alive_elements()) {
    out.set(e, average_on(element_geometry(mesh, e), data));
  }
  return out;
}

DataEstimatorField estimate_data(const MeshForest& mesh, const ProblemData& data,
                                 const PiecewiseConstantData& averages) {
  DataEstimatorField field;
  field.elems = mesh.alive_elements();
  double f2 = 0.0;
  for (const ElementId e : field.elems) {
    if (!averages.has(e)) throw std::invalid_argument("estimate_data: averages do not cover the mesh");
    const auto z = local_zeta(element_geometry(mesh, e), data, averages.at(e));
    field.zeta_A.push_back(z.zA);
    field.zeta_c.push_back(z.zc);
    field.zeta_f.push_back(z.zf);
    field.global_A = std::max(field.global_A, z.zA);
    field.global_c = std::max(field.global_c, z.zc);
    f2 += z.zf * z.zf;
  }
  field.global_f = std::sqrt(f2);
  return field;
}

std::vector<ElementId> mark_data(const DataEstimatorField& field, double theta, double eps) {
  if (theta <= 0.0 || theta >= 1.0) throw std::invalid_argument("mark_data: theta must be in (0,1)");
  if (eps <= 0.0) throw std::invalid_argument("mark_data: eps must be positive");
  const double third = eps / 3.0;
  std::vector<ElementId> marked;
  double max_f = 0.0;
  for (const double z : field.zeta_f) max_f = std::max(max_f, z);
  const bool mark_f = field.global_f >= third;
  for (std::size_t i = 0; i < field.elems.size(); ++i) {
    const bool hit = field.zeta_A[i] >= third || field.zeta_c[i] >= third ||
                     (mark_f && field.zeta_f[i] >= theta * max_f);
    if (hit) marked.push_back(field.elems[i]);
  }
  return marked;
}

namespace {

// Per-element caches keyed by element id. Data are fixed while a loop runs and
// elements are append-only, so cached values never go stale.
struct ZetaCache {
  std::vector<char> valid;
  std::vector<PiecewiseConstantData::Entry> avg;
  std::vector<LocalZeta> zeta;

  void ensure(const MeshForest& mesh, const ProblemData& data, ElementId e) {
    const auto idx = static_cast<std::size_t>(e);
    if (valid.size() <= idx) {
      valid.resize(idx + 1, 0);
      avg.resize(idx + 1);
      zeta.resize(idx + 1);
    }
    if (valid[idx]) return;
    const auto geom = element_geometry(mesh, e);
    avg[idx] = average_on(geom, data);
    zeta[idx] = local_zeta(geom, data, avg[idx]);
    valid[idx] = 1;
  }
};

}  // namespace

DataLoopResult data_loop(MeshForest& mesh, const ProblemData& data, double eps, double theta,
                         int lambda_bound, int cap) {
  if (eps <= 0.0) throw std::invalid_argument("data_loop: eps must be positive");
  ZetaCache cache;
  DataLoopResult result;
  for (int iter = 0;; ++iter) {
    const auto alive = mesh.alive_elements();
    DataEstimatorField field;
    field.elems = alive;
    double f2 = 0.0;
    for (const ElementId e : alive) {
      cache.ensure(mesh, data, e);
      const auto& z = cache.zeta[static_cast<std::size_t>(e)];
      field.zeta_A.push_back(z.zA);
      field.zeta_c.push_back(z.zc);
      field.zeta_f.push_back(z.zf);
      field.global_A = std::max(field.global_A, z.zA);
      field.global_c = std::max(field.global_c, z.zc);
      f2 += z.zf * z.zf;
    }
    field.global_f = std::sqrt(f2);
    result.history.push_back(
        {mesh.num_alive(), field.global_A, field.global_c, field.global_f, field.global()});

    if (field.global() <= eps) {
      result.iterations = iter;
      result.estimators = std::move(field);
      PiecewiseConstantData averages;
      for (const ElementId e : alive) averages.set(e, cache.avg[static_cast<std::size_t>(e)]);
      result.averages = std::move(averages);
      return result;
    }
    if (iter >= cap) throw std::runtime_error("data_loop: iteration cap exceeded");
    const auto marked = mark_data(field, theta, eps);
    mesh.refine(marked, lambda_bound);
  }
}

namespace {

double greedy_local(const MeshForest& mesh, ElementId e, const std::function<double(Point)>& g,
                    double t, LqNorm q) {
  const auto geom = element_geometry(mesh, e);
  const auto& rule = triangle_rule_degree4();
  double mean = 0.0;
  for (const auto& tri : fan_subtriangulation(geom)) {
    mean += integrate_triangle(tri.a, tri.b, tri.c, rule, g);
  }
  mean /= geom.area;
  double val = 0.0;
  if (q == LqNorm::infinity) {
    for_each_sample(geom, [&](Point p) { val = std::max(val, std::abs(g(p) - mean)); });
  } else {
    double s = 0.0;
    for (const auto& tri : fan_subtriangulation(geom)) {
      s += integrate_triangle(tri.a, tri.b, tri.c, rule, [&](Point p) {
        const double d = g(p) - mean;
        return d * d;
      });
    }
    val = std::sqrt(std::max(s, 0.0));
  }
  return std::pow(std::sqrt(geom.area), t) * val;
}

}  // namespace

GreedyResult greedy(MeshForest& mesh, const std::function<double(Point)>& g, double delta,
                    double t, LqNorm q, int lambda_bound, int cap) {
  if (delta <= 0.0) throw std::invalid_argument("greedy: delta must be positive");
  std::vector<double> cache;
  std::vector<char> valid;
  GreedyResult result;
  for (int iter = 0;; ++iter) {
    std::vector<ElementId> marked;
    double global_max = 0.0;
    double global_l2 = 0.0;
    for (const ElementId e : mesh.alive_elements()) {
      const auto idx = static_cast<std::size_t>(e);
      if (valid.size() <= idx) {
        valid.resize(idx + 1, 0);
        cache.resize(idx + 1, 0.0);
      }
      if (!valid[idx]) {
        cache[idx] = greedy_local(mesh, e, g, t, q);
        valid[idx] = 1;
      }
      global_max = std::max(global_max, cache[idx]);
      global_l2 += cache[idx] * cache[idx];
      if (cache[idx] > delta) marked.push_back(e);
    }
    if (marked.empty()) {
      result.iterations = iter;
      result.zeta = q == LqNorm::infinity ? global_max : std::sqrt(global_l2);
      return result;
    }
    if (iter >= cap) throw std::runtime_error("greedy: iteration cap exceeded");
    mesh.refine(marked, lambda_bound);
  }
}

GreedyResult p_greedy(MeshForest& mesh, const std::function<double(Point)>& f, double delta,
                      double theta, int lambda_bound, int cap) {
  if (delta <= 0.0) throw std::invalid_argument("p_greedy: delta must be positive");
  if (theta <= 0.0 || theta >= 1.0) throw std::invalid_argument("p_greedy: theta must be in (0,1)");
  std::vector<double> cache;
  std::vector<char> valid;
  GreedyResult result;
  for (int iter = 0;; ++iter) {
    double global2 = 0.0;
    double max_local = 0.0;
    const auto alive = mesh.alive_elements();
    for (const ElementId e : alive) {
      const auto idx = static_cast<std::size_t>(e);
      if (valid.size() <= idx) {
        valid.resize(idx + 1, 0);
        cache.resize(idx + 1, 0.0);
      }
      if (!valid[idx]) {
        cache[idx] = greedy_local(mesh, e, f, 1.0, LqNorm::two);
        valid[idx] = 1;
      }
      global2 += cache[idx] * cache[idx];
      max_local = std::max(max_local, cache[idx]);
    }
    if (std::sqrt(global2) <= delta) {
      result.iterations = iter;
      result.zeta = std::sqrt(global2);
      return result;
    }
    if (iter >= cap) throw std::runtime_error("p_greedy: iteration cap exceeded");
    std::vector<ElementId> marked;
    for (const ElementId e : alive) {
      if (cache[static_cast<std::size_t>(e)] >= theta * max_local) marked.push_back(e);
    }
    mesh.refine(marked, lambda_bound);
  }
}

double perturbation_bound(const MeshForest& mesh, const ProblemData& data,
                          const PiecewiseConstantData& averages, double u_h1_seminorm) {
  const auto field = estimate_data(mesh, data, averages);
  double alpha = std::numeric_limits<double>::max();
  for (const ElementId e : field.elems) {
    alpha = std::min(alpha, averages.at(e).A.min_eigenvalue());
  }
  return (1.0 / alpha) * u_h1_seminorm * (field.global_A + field.global_c) + field.global_f;
}

}  // namespace avem
