#include "avem/problems.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace avem {

MeshForest make_structured_mesh(double x0, double y0, double x1, double y1, int nx, int ny,
                                const std::function<bool(Point)>& keep) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("make_structured_mesh: need nx, ny >= 1");
  const double hx = (x1 - x0) / nx;
  const double hy = (y1 - y0) / ny;

  std::map<std::pair<int, int>, int> node_of;
  std::vector<Point> points;
  std::vector<std::array<int, 3>> triangles;
  const auto grid_point = [&](int i, int j) { return Point{x0 + i * hx, y0 + j * hy}; };
  const auto node = [&](int i, int j) {
    const auto [it, fresh] = node_of.try_emplace({i, j}, static_cast<int>(points.size()));
    if (fresh) points.push_back(grid_point(i, j));
    return it->second;
  };

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Point center{x0 + (i + 0.5) * hx, y0 + (j + 0.5) * hy};
      if (keep && !keep(center)) continue;
      const int sw = node(i, j), se = node(i + 1, j), ne = node(i + 1, j + 1), nw = node(i, j + 1);
      triangles.push_back({sw, se, ne});
      triangles.push_back({sw, ne, nw});
    }
  }
  return MeshForest::from_triangulation(points, triangles);
}

MeshForest make_lshape_mesh(double h) {
  const double n_real = 2.0 / h;
  const int n = static_cast<int>(std::lround(n_real));
  if (n < 2 || std::abs(n_real - n) > 1e-12 || !is_dyadic(h, 32)) {
    throw std::invalid_argument("make_lshape_mesh: h must be a dyadic divisor of 2");
  }
  return make_structured_mesh(-1.0, -1.0, 1.0, 1.0, n, n,
                              [](Point c) { return !(c.x > 0.0 && c.y < 0.0); });
}

MeshForest make_square_mesh(int n) {
  return make_structured_mesh(0.0, 0.0, 1.0, 1.0, n, n);
}

namespace {

double gauss(Point p, Point center, double beta) {
  const double dx = p.x - center.x;
  const double dy = p.y - center.y;
  return std::exp(-beta * (dx * dx + dy * dy));
}

Point gauss_grad(Point p, Point center, double beta) {
  const double g = gauss(p, center, beta);
  return {-2.0 * beta * (p.x - center.x) * g, -2.0 * beta * (p.y - center.y) * g};
}

double gauss_laplacian(Point p, Point center, double beta) {
  const double dx = p.x - center.x;
  const double dy = p.y - center.y;
  const double rho2 = dx * dx + dy * dy;
  return (-4.0 * beta + 4.0 * beta * beta * rho2) * gauss(p, center, beta);
}

// Angle around the reentrant corner, mapped to [0, 3*pi/2] on the L-shape.
double corner_angle(Point p) {
  double alpha = std::atan2(p.y, p.x);
  if (alpha < 0.0) alpha += 2.0 * M_PI;
  return alpha;
}

double corner_term(Point p) {
  const double r = std::hypot(p.x, p.y);
  if (r == 0.0) return 0.0;
  return std::cbrt(r * r) * std::sin(2.0 * corner_angle(p) / 3.0);
}

// Gradient of r^{2/3} sin(2a/3) in polar form; harmonic away from the corner.
Point corner_term_grad(Point p) {
  const double r = std::hypot(p.x, p.y);
  const double alpha = corner_angle(p);
  const double scale = (2.0 / 3.0) / std::cbrt(r);
  return {-scale * std::sin(alpha / 3.0), scale * std::cos(alpha / 3.0)};
}

constexpr Point kA1{-0.5, -0.5};
constexpr Point kA2{-0.5, 0.5};
constexpr Point kC1{-0.5, 0.0};
constexpr Point kC2{0.0, 0.5};
constexpr Point kU{0.5, 0.5};

double lshape_a(Point p) { return 1.0 + gauss(p, kA1, 50.0) + gauss(p, kA2, 50.0); }
double lshape_c(Point p) { return 1.0 + gauss(p, kC1, 50.0) + gauss(p, kC2, 50.0); }
double lshape_u(Point p) { return corner_term(p) + gauss(p, kU, 1000.0); }

Point lshape_grad_u(Point p) {
  const Point gs = corner_term_grad(p);
  const Point gg = gauss_grad(p, kU, 1000.0);
  return {gs.x + gg.x, gs.y + gg.y};
}

double lshape_f(Point p) {
  const Point grad_a = {gauss_grad(p, kA1, 50.0).x + gauss_grad(p, kA2, 50.0).x,
                        gauss_grad(p, kA1, 50.0).y + gauss_grad(p, kA2, 50.0).y};
  const Point grad_u = lshape_grad_u(p);
  const double lap_u = gauss_laplacian(p, kU, 1000.0);  // the corner term is harmonic
  return -dot(grad_a, grad_u) - lshape_a(p) * lap_u + lshape_c(p) * lshape_u(p);
}

}  // namespace

ProblemSpec build_lshape_problem(double h) {
  ProblemSpec spec;
  spec.name = "lshape";
  spec.mesh = make_lshape_mesh(h);
  spec.data.A = [](Point p) { return Mat2::scaled_identity(lshape_a(p)); };
  spec.data.c = lshape_c;
  spec.data.f = lshape_f;
  spec.data.dirichlet = lshape_u;
  spec.data.exact = lshape_u;
  spec.data.exact_grad = lshape_grad_u;
  return spec;
}

ProblemSpec build_square_problem(int n) {
  ProblemSpec spec;
  spec.name = "square";
  spec.mesh = make_square_mesh(n);
  spec.data.A = [](Point) { return Mat2::identity(); };
  spec.data.c = [](Point) { return 0.0; };
  spec.data.f = [](Point) { return 0.0; };
  spec.data.dirichlet = [](Point p) { return p.x; };
  spec.data.exact = [](Point p) { return p.x; };
  spec.data.exact_grad = [](Point) { return Point{1.0, 0.0}; };
  return spec;
}

GreedyTarget build_greedy_target(const std::string& name) {
  if (name == "lshape-a") return {name, make_lshape_mesh(), lshape_a};
  if (name == "lshape-c") return {name, make_lshape_mesh(), lshape_c};
  if (name == "lshape-f") return {name, make_lshape_mesh(), lshape_f};
  if (name == "linear") return {name, make_square_mesh(), [](Point p) { return p.x; }};
  if (name == "bump") return {name, make_square_mesh(), [](Point p) { return gauss(p, kU, 1000.0); }};
  if (name == "constant") return {name, make_square_mesh(), [](Point) { return 1.0; }};
  throw std::invalid_argument("unknown greedy target: " + name);
}

}  // namespace avem
