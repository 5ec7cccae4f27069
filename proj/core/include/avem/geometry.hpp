#ifndef AVEM_GEOMETRY_HPP
#define AVEM_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace avem {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::sqrt(dot(a, a)); }
inline Point midpoint(Point a, Point b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }

/// Symmetric 2x2 tensor.
struct Mat2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 1.0}; }
  static Mat2 scaled_identity(double s) { return {s, 0.0, s}; }

  Point apply(Point v) const { return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y}; }

  double min_eigenvalue() const {
    const double tr = a11 + a22;
    const double disc = std::sqrt((a11 - a22) * (a11 - a22) + 4.0 * a12 * a12);
    return 0.5 * (tr - disc);
  }
  double max_eigenvalue() const {
    const double tr = a11 + a22;
    const double disc = std::sqrt((a11 - a22) * (a11 - a22) + 4.0 * a12 * a12);
    return 0.5 * (tr + disc);
  }
  /// Spectral norm (largest absolute eigenvalue).
  double spectral_norm() const {
    return std::max(std::abs(min_eigenvalue()), std::abs(max_eigenvalue()));
  }
};

inline Mat2 operator-(Mat2 a, Mat2 b) { return {a.a11 - b.a11, a.a12 - b.a12, a.a22 - b.a22}; }
inline Mat2 operator+(Mat2 a, Mat2 b) { return {a.a11 + b.a11, a.a12 + b.a12, a.a22 + b.a22}; }
inline Mat2 operator*(double s, Mat2 a) { return {s * a.a11, s * a.a12, s * a.a22}; }

inline double triangle_area(Point a, Point b, Point c) {
  return 0.5 * cross(b - a, c - a);
}

/// True if x is a dyadic rational representable with at most `bits` fractional bits.
bool is_dyadic(double x, int bits);

/// Error-free addition check: sets sum = a + b and reports whether the result
/// is exact in double precision.
bool exact_sum(double a, double b, double& sum);

/// Exact collinearity test for dyadic coordinates. All inputs must be dyadic
/// rationals (as produced by repeated halving of a dyadic root mesh); the test
/// is then free of rounding.
bool collinear(Point a, Point b, Point p);

/// Sign of the orientation of (a, b, p), exact on dyadic inputs.
int orientation_sign(Point a, Point b, Point p);

/// Quadrature rule on the reference triangle, given in barycentric coordinates.
struct TriangleRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weights;  // sum to 1, scale by |T|
};

/// 3-point rule, exact for polynomials of degree 2.
const TriangleRule& triangle_rule_degree2();
/// 6-point rule, exact for polynomials of degree 4.
const TriangleRule& triangle_rule_degree4();

/// Integrate f over the triangle (a,b,c) with the given rule.
template <class F>
double integrate_triangle(Point a, Point b, Point c, const TriangleRule& rule, F&& f) {
  const double area = std::abs(triangle_area(a, b, c));
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.weights.size(); ++i) {
    const auto& l = rule.bary[i];
    const Point p{l[0] * a.x + l[1] * b.x + l[2] * c.x,
                  l[0] * a.y + l[1] * b.y + l[2] * c.y};
    sum += rule.weights[i] * f(p);
  }
  return area * sum;
}

}  // namespace avem

#endif
