#include "avem/geometry.hpp"

#include <cstdint>
#include <stdexcept>

namespace avem {

bool is_dyadic(double x, int bits) {
  const double scaled = std::ldexp(x, bits);
  return scaled == std::nearbyint(scaled) && std::abs(scaled) < 9.0e15;
}

bool exact_sum(double a, double b, double& sum) {
  sum = a + b;
  const double t = sum - a;
  return (b - t) == 0.0 && std::isfinite(sum);
}

namespace {

// Scale the four coordinate differences to integers. Coordinates produced by
// halving a dyadic root mesh stay dyadic, so a common scale <= 62 bits exists
// as long as the refinement stays within double-precision exactness.
bool scale_to_int(const double d[4], std::int64_t out[4]) {
  for (int s = 0; s <= 62; ++s) {
    bool ok = true;
    for (int i = 0; i < 4 && ok; ++i) {
      const double v = std::ldexp(d[i], s);
      if (v != std::nearbyint(v) || std::abs(v) > 4.0e18) ok = false;
    }
    if (ok) {
      for (int i = 0; i < 4; ++i) out[i] = static_cast<std::int64_t>(std::ldexp(d[i], s));
      return true;
    }
  }
  return false;
}

}  // namespace

int orientation_sign(Point a, Point b, Point p) {
  // The differences must themselves be exact for the integer test to mean
  // anything; the error-free transform detects any rounding.
  double d[4];
  if (!exact_sum(b.x, -a.x, d[0]) || !exact_sum(b.y, -a.y, d[1]) ||
      !exact_sum(p.x, -a.x, d[2]) || !exact_sum(p.y, -a.y, d[3])) {
    throw std::logic_error("orientation_sign: coordinate differences exceed exact dyadic range");
  }
  std::int64_t i[4];
  if (!scale_to_int(d, i)) {
    throw std::logic_error("orientation_sign: coordinates are not dyadic within 62 bits");
  }
  const __int128 c = static_cast<__int128>(i[0]) * i[3] - static_cast<__int128>(i[1]) * i[2];
  return c > 0 ? 1 : (c < 0 ? -1 : 0);
}

bool collinear(Point a, Point b, Point p) { return orientation_sign(a, b, p) == 0; }

const TriangleRule& triangle_rule_degree2() {
  static const TriangleRule rule{
      {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
       {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
       {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}},
      {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
  return rule;
}

const TriangleRule& triangle_rule_degree4() {
  const double a1 = 0.445948490915965;
  const double b1 = 1.0 - 2.0 * a1;
  const double w1 = 0.223381589678011;
  const double a2 = 0.091576213509771;
  const double b2 = 1.0 - 2.0 * a2;
  const double w2 = 0.109951743655322;
  static const TriangleRule rule{
      {{a1, a1, b1}, {a1, b1, a1}, {b1, a1, a1},
       {a2, a2, b2}, {a2, b2, a2}, {b2, a2, a2}},
      {w1, w1, w1, w2, w2, w2}};
  return rule;
}

}  // namespace avem
