#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <map>
#include <random>

#include "avem/mesh_forest.hpp"
#include "avem/problems.hpp"
#include "oracles.hpp"

using namespace avem;

namespace {

// Unit square split along the SW-NE diagonal: two right triangles whose
// newest vertices sit opposite the shared hypotenuse.
MeshForest two_triangle_square() { return make_square_mesh(1); }

void check_against_oracle(const MeshForest& mesh) {
  const auto ref = oracle::classify_nodes(mesh);
  for (NodeId n = 0; n < mesh.num_nodes(); ++n) {
    CAPTURE(n);
    CHECK(mesh.node(n).status == ref.status[static_cast<std::size_t>(n)]);
    CHECK(mesh.node(n).lambda == ref.lambda[static_cast<std::size_t>(n)]);
  }
}

NodeId node_at(const MeshForest& mesh, Point p) {
  for (NodeId n = 0; n < mesh.num_nodes(); ++n) {
    const Point q = mesh.node_xy(n);
    if (q.x == p.x && q.y == p.y) return n;
  }
  return kNoNode;
}

}  // namespace

TEST_SUITE("mesh_forest") {

TEST_CASE("roots get the newest vertex opposite the longest edge") {
  const auto mesh = two_triangle_square();
  REQUIRE(mesh.num_roots() == 2);
  for (ElementId e = 0; e < 2; ++e) {
    const auto oe = mesh.opposite_edge(e);
    const double len = norm(mesh.node_xy(oe[0]) - mesh.node_xy(oe[1]));
    CHECK(len == doctest::Approx(std::sqrt(2.0)));  // the diagonal
  }
  CHECK(mesh.global_index() == 0);
  CHECK(mesh.total_area() == doctest::Approx(1.0));
}

TEST_CASE("bisecting one of two neighbors leaves a hanging midpoint with index 1") {
  auto mesh = two_triangle_square();
  const auto [c0, c1] = mesh.bisect(0);
  CHECK(mesh.element(c0).level == 1);
  CHECK(mesh.element(c1).level == 1);
  CHECK_FALSE(mesh.is_alive(0));
  const NodeId m = node_at(mesh, {0.5, 0.5});
  REQUIRE(m != kNoNode);
  CHECK(mesh.node(m).status == NodeStatus::hanging);
  CHECK(mesh.node(m).lambda == 1);
  CHECK(mesh.element_area(c0) == doctest::Approx(mesh.element_area(0) / 2.0));
  check_against_oracle(mesh);
}

TEST_CASE("bisecting both neighbors promotes the shared midpoint") {
  auto mesh = two_triangle_square();
  mesh.bisect(0);
  mesh.bisect(1);
  const NodeId m = node_at(mesh, {0.5, 0.5});
  CHECK(mesh.node(m).status == NodeStatus::proper);
  CHECK(mesh.node(m).lambda == 0);
  CHECK(mesh.global_index() == 0);
  check_against_oracle(mesh);
}

TEST_CASE("two successive bisections of one original edge give index 2") {
  auto mesh = two_triangle_square();
  const auto [c0, c1] = mesh.bisect(0);        // splits the diagonal at M
  const auto [d0, d1] = mesh.bisect(c1);       // splits the bottom boundary edge
  (void)d1;
  const auto [f0, f1] = mesh.bisect(d0);       // splits [SW, M], half of the diagonal
  (void)c0; (void)f0; (void)f1;
  const NodeId m3 = node_at(mesh, {0.25, 0.25});
  REQUIRE(m3 != kNoNode);
  CHECK(mesh.node(m3).lambda == 2);
  const NodeId mb = node_at(mesh, {0.5, 0.0});
  CHECK(mesh.node(mb).status == NodeStatus::proper);  // boundary midpoint
  check_against_oracle(mesh);
}

TEST_CASE("bisect rejects dead elements") {
  auto mesh = two_triangle_square();
  mesh.bisect(0);
  CHECK_THROWS_AS(mesh.bisect(0), std::invalid_argument);
}

TEST_CASE("prospective index: conforming neighbor, boundary edge, deep endpoints") {
  auto mesh = two_triangle_square();
  CHECK(mesh.prospective_lambda(0) == 1);  // unrefined facing neighbor

  const auto [c0, c1] = mesh.bisect(0);
  // c0's opposite edge is the boundary edge x = 1 with proper endpoints.
  CHECK(mesh.node_on_boundary(mesh.opposite_edge(c0)[0]));
  CHECK(mesh.node_on_boundary(mesh.opposite_edge(c0)[1]));
  CHECK(mesh.prospective_lambda(c0) == 1);

  const auto [d0, d1] = mesh.bisect(c1);
  (void)d1;
  const auto [f0, f1] = mesh.bisect(d0);
  (void)f1;
  const auto [g0, g1] = mesh.bisect(f0);
  (void)g1;
  // g0 faces the segment between the lambda=2 node (0.25,0.25) and the proper
  // boundary midpoint (0.5,0).
  const auto oe = mesh.opposite_edge(g0);
  const int la = mesh.node(oe[0]).lambda;
  const int lb = mesh.node(oe[1]).lambda;
  CHECK(std::max(la, lb) == 2);
  CHECK(std::min(la, lb) == 0);
  CHECK(mesh.prospective_lambda(g0) == 3);
  check_against_oracle(mesh);
}

TEST_CASE("prospective index returns 0 when one cut would promote the midpoint") {
  auto mesh = two_triangle_square();
  mesh.bisect(0);
  // The diagonal midpoint exists and hangs on element 1 alone; cutting element
  // 1 would promote it.
  CHECK(mesh.prospective_lambda(1) == 0);
}

TEST_CASE("compatibility is decided by the newest vertices against the shared line") {
  auto mesh = two_triangle_square();
  CHECK(mesh.compatible(0, 1));  // both newest vertices off the diagonal

  const auto [c0, c1] = mesh.bisect(0);
  // c0 shares half of the diagonal with element 1 and its newest vertex is the
  // diagonal midpoint, which lies on that line.
  CHECK_FALSE(mesh.compatible(c0, 1));
  // c0 and c1 share the bisector edge, whose line carries both newest vertices.
  CHECK_FALSE(mesh.compatible(c0, c1));
  CHECK_THROWS_AS(mesh.compatible(c0, c0), std::invalid_argument);
  CHECK_THROWS_AS((void)two_triangle_square().compatible(0, 0), std::invalid_argument);

  auto grid = make_square_mesh(4);
  CHECK_THROWS_AS(grid.compatible(0, 10), std::invalid_argument);  // disjoint elements
}

TEST_CASE("facing element: conforming pair, boundary, hanging interior, coarse neighbor") {
  auto mesh = two_triangle_square();
  CHECK(mesh.facing_element(0) == 1);
  CHECK(mesh.facing_element(1) == 0);

  const auto [c0, c1] = mesh.bisect(0);
  CHECK(mesh.facing_element(c0) == kNoElement);  // boundary edge
  CHECK(mesh.facing_element(1) == kNoElement);   // midpoint hangs inside its edge

  const auto [d0, d1] = mesh.bisect(c1);
  (void)d1;
  // d0's opposite edge is half of the diagonal while element 1 still owns the
  // full diagonal: the facing element is found through the ancestor walk.
  CHECK(mesh.facing_element(d0) == 1);
}

TEST_CASE("chains stop early, extend over compatible facers, and detect bad input") {
  auto mesh = two_triangle_square();
  CHECK(mesh.build_chain(0, 1) == std::vector<ElementId>{0});

  const auto [c0, c1] = mesh.bisect(0);
  (void)c0;
  const auto [d0, d1] = mesh.bisect(c1);
  (void)d1;
  // prospective(d0) = 2 = Lambda+1 and the facing coarse triangle is
  // compatible: a two-element chain.
  REQUIRE(mesh.prospective_lambda(d0) == 2);
  const auto chain = mesh.build_chain(d0, 1);
  CHECK(chain == std::vector<ElementId>{d0, 1});

  // With Lambda = 2 the same element stops immediately.
  CHECK(mesh.build_chain(d0, 2) == std::vector<ElementId>{d0});

  // Running the chain: one cut of the coarse neighbor promotes the diagonal
  // midpoint, and the index reduction cascades so that bisecting d0 creates a
  // midpoint of index 1, not 2.
  mesh.create_admissible_chain(d0, 1);
  const NodeId m = node_at(mesh, {0.5, 0.5});
  const NodeId m3 = node_at(mesh, {0.25, 0.25});
  REQUIRE(m3 != kNoNode);
  CHECK(mesh.node(m).status == NodeStatus::proper);
  CHECK(mesh.node(m3).lambda == 1);
  CHECK(mesh.global_index() <= 1);
  check_against_oracle(mesh);
}

TEST_CASE("incompatible facing element extends the chain") {
  auto mesh = two_triangle_square();
  const auto [c0, c1] = mesh.bisect(0);
  const auto [d0, d1] = mesh.bisect(c1);
  (void)d0;
  // d1 sits against the bisector edge of the first cut; the facing element c0
  // has its newest vertex on that line, so the chain walks on.
  REQUIRE(mesh.prospective_lambda(d1) == 2);
  REQUIRE(mesh.facing_element(d1) == c0);
  REQUIRE_FALSE(mesh.compatible(d1, c0));
  const auto chain = mesh.build_chain(d1, 1);
  REQUIRE(chain.size() >= 2);
  CHECK(chain[0] == d1);
  CHECK(chain[1] == c0);
  // Levels never increase along the chain.
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    CHECK(mesh.element(chain[i]).level >= mesh.element(chain[i + 1]).level);
  }
}

TEST_CASE("chains refuse partitions that already violate the bound") {
  auto mesh = two_triangle_square();
  const auto [c0, c1] = mesh.bisect(0);
  (void)c0;
  const auto [d0, d1] = mesh.bisect(c1);
  (void)d1;
  const auto [f0, f1] = mesh.bisect(d0);  // creates a lambda = 2 node
  (void)f1;
  const auto [g0, g1] = mesh.bisect(f0);
  (void)g1;
  REQUIRE(mesh.prospective_lambda(g0) == 3);
  // With Lambda = 1 the prospective index 3 exceeds Lambda + 1: the input was
  // not 1-admissible and the chain construction must say so.
  CHECK_THROWS_AS(mesh.build_chain(g0, 1), std::logic_error);
}

TEST_CASE("a three-element chain appears under nested refinement with Lambda 1") {
  std::mt19937 rng(7);
  auto mesh = make_square_mesh(2);
  oracle::random_refine(mesh, 25, 3, 1, rng);

  bool found = false;
  for (const ElementId e : mesh.alive_elements()) {
    const auto chain = mesh.build_chain(e, 1);
    const int K = static_cast<int>(chain.size()) - 1;
    CHECK(K <= mesh.element(e).level + 1);
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
      CHECK(mesh.element(chain[i]).level >= mesh.element(chain[i + 1]).level);
    }
    if (chain.size() >= 3) found = true;
  }
  CHECK(found);
}

TEST_CASE("create_admissible_chain performs the minimal cuts and stays admissible") {
  SUBCASE("already admissible: exactly one bisection") {
    auto mesh = two_triangle_square();
    const int before = mesh.num_elements();
    mesh.create_admissible_chain(0, 1);
    CHECK(mesh.num_elements() == before + 2);
  }

  SUBCASE("incompatible facing element: two cuts ahead of the marked one") {
    auto mesh = two_triangle_square();
    const auto [c0, c1] = mesh.bisect(0);
    (void)c0;
    const auto [d0, d1] = mesh.bisect(c1);
    (void)d0;
    const int level_marked = mesh.element(d1).level;
    const int before = mesh.num_elements();
    mesh.create_admissible_chain(d1, 1);
    CHECK(mesh.num_elements() == before + 6);  // chain element twice, then d1
    CHECK_FALSE(mesh.is_alive(d1));
    const auto ref = oracle::classify_nodes(mesh);
    for (NodeId n = 0; n < mesh.num_nodes(); ++n) {
      CHECK(ref.lambda[static_cast<std::size_t>(n)] <= 1);
    }
    for (ElementId e = before; e < mesh.num_elements(); ++e) {
      CHECK(mesh.element(e).level <= level_marked + 1);
    }
    check_against_oracle(mesh);
  }

  SUBCASE("unbounded sentinel behaves like a plain bisection") {
    auto a = two_triangle_square();
    auto b = two_triangle_square();
    a.bisect(0);
    a.bisect(2);
    b.bisect(0);
    b.bisect(2);
    a.create_admissible_chain(3, kLambdaUnbounded);
    b.bisect(3);
    CHECK(oracle::same_partition(a, b));
  }
}

TEST_CASE("refine: empty set, uniform pass, repeated corner refinement") {
  SUBCASE("empty mark set leaves the partition alone") {
    auto mesh = make_square_mesh(2);
    const int before = mesh.num_elements();
    mesh.refine(std::vector<ElementId>{}, 1);
    CHECK(mesh.num_elements() == before);
  }

  SUBCASE("marking everything bisects everything once") {
    auto mesh = make_square_mesh(2);
    const int alive_before = mesh.num_alive();
    mesh.refine(mesh.alive_elements(), 1);
    CHECK(mesh.num_alive() == 2 * alive_before);
    CHECK(mesh.global_index() <= 1);
    check_against_oracle(mesh);
  }

  SUBCASE("corner refinement: cumulative growth bounded by the marked count") {
    auto mesh = make_square_mesh(2);
    const int n0 = mesh.num_alive();
    int total_marked = 0;
    std::vector<double> ratios;
    for (int step = 0; step < 20; ++step) {
      // Mark the element touching the origin.
      ElementId corner = kNoElement;
      for (const ElementId e : mesh.alive_elements()) {
        for (const NodeId n : mesh.element_boundary_nodes(e)) {
          const Point p = mesh.node_xy(n);
          if (p.x == 0.0 && p.y == 0.0) corner = e;
        }
        if (corner != kNoElement) break;
      }
      REQUIRE(corner != kNoElement);
      const std::vector<ElementId> marked{corner};
      mesh.refine(marked, 2);
      total_marked += 1;
      ratios.push_back(double(mesh.num_alive() - n0) / double(total_marked));
    }
    // The per-step ratio settles instead of growing with the depth.
    const double final_ratio = ratios.back();
    CHECK(final_ratio < 12.0);
    CHECK(*std::max_element(ratios.begin(), ratios.end()) <= 2.0 * final_ratio + 4.0);
    check_against_oracle(mesh);
  }
}

TEST_CASE("overlay: identity, against the root mesh, and random pairs") {
  std::mt19937 rng(11);
  auto t0 = make_square_mesh(2);

  auto a = t0;
  oracle::random_refine(a, 10, 2, 2, rng);
  auto b = t0;
  oracle::random_refine(b, 10, 2, 2, rng);

  CHECK(oracle::same_partition(MeshForest::overlay(a, a), a));
  CHECK(oracle::same_partition(MeshForest::overlay(a, t0), a));
  CHECK(oracle::same_partition(MeshForest::overlay(t0, b), b));

  const auto both = MeshForest::overlay(a, b);
  const auto ref = oracle::classify_nodes(both);
  int max_lambda = 0;
  for (const int l : ref.lambda) max_lambda = std::max(max_lambda, l);
  CHECK(max_lambda <= 2);
  check_against_oracle(both);

  // lambda in the overlay never exceeds the index either input assigns to the
  // same point.
  const auto lambda_by_coord = [](const MeshForest& m) {
    std::map<std::pair<double, double>, int> out;
    for (NodeId n = 0; n < m.num_nodes(); ++n) {
      out[{m.node_xy(n).x, m.node_xy(n).y}] = m.node(n).lambda;
    }
    return out;
  };
  const auto la = lambda_by_coord(a);
  const auto lb = lambda_by_coord(b);
  for (NodeId n = 0; n < both.num_nodes(); ++n) {
    const auto key = std::make_pair(both.node_xy(n).x, both.node_xy(n).y);
    int bound = kLambdaUnbounded;
    if (const auto it = la.find(key); it != la.end()) bound = std::min(bound, it->second);
    if (const auto it = lb.find(key); it != lb.end()) bound = std::min(bound, it->second);
    if (bound != kLambdaUnbounded) CHECK(both.node(n).lambda <= bound);
  }

  // Different roots are rejected.
  const auto other = make_square_mesh(4);
  CHECK_THROWS_AS(MeshForest::overlay(a, other), std::invalid_argument);
}

TEST_CASE("element boundaries list hanging nodes counterclockwise") {
  auto mesh = two_triangle_square();
  CHECK(mesh.element_boundary_nodes(0).size() == 3);

  mesh.bisect(0);
  const auto nodes = mesh.element_boundary_nodes(1);
  CHECK(nodes.size() == 4);  // the diagonal midpoint hangs on element 1

  // Counterclockwise ordering: positive shoelace area.
  double area2 = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Point p = mesh.node_xy(nodes[i]);
    const Point q = mesh.node_xy(nodes[(i + 1) % nodes.size()]);
    area2 += p.x * q.y - q.x * p.y;
  }
  CHECK(area2 > 0.0);

  // A five-node element (two sides carrying one hanging node each) shows up
  // in a richer partition.
  std::mt19937 rng(3);
  auto grid = make_square_mesh(2);
  oracle::random_refine(grid, 30, 3, 2, rng);
  bool found5 = false;
  for (const ElementId e : grid.alive_elements()) {
    const auto bn = grid.element_boundary_nodes(e);
    if (bn.size() != 5) continue;
    found5 = true;
    const auto& corners = grid.element(e).corners;
    for (const NodeId n : bn) {
      // Every listed node really sits on one of the three corner segments.
      bool on_side = false;
      for (int i = 0; i < 3; ++i) {
        const Point a = grid.node_xy(corners[i]);
        const Point b = grid.node_xy(corners[(i + 1) % 3]);
        const Point p = grid.node_xy(n);
        if (collinear(a, b, p) && std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
            std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y)) {
          on_side = true;
        }
      }
      CHECK(on_side);
    }
    break;
  }
  CHECK(found5);
}

TEST_CASE("promotion lowers the index of every node inside the promoted edge") {
  auto mesh = two_triangle_square();
  const auto [c0, c1] = mesh.bisect(0);
  (void)c0;
  const auto [d0, d1] = mesh.bisect(c1);
  (void)d1;
  mesh.bisect(d0);  // creates the lambda=2 node at (0.25, 0.25)
  const NodeId m = node_at(mesh, {0.5, 0.5});
  const NodeId m3 = node_at(mesh, {0.25, 0.25});
  REQUIRE(mesh.node(m).lambda == 1);
  REQUIRE(mesh.node(m3).lambda == 2);

  mesh.bisect(1);  // second cut of the diagonal promotes its midpoint
  CHECK(mesh.node(m).status == NodeStatus::proper);
  CHECK(mesh.node(m).lambda == 0);
  CHECK(mesh.node(m3).lambda <= 1);  // dropped by at least one
  check_against_oracle(mesh);
}

TEST_CASE("incremental indices equal the from-scratch recursion on random meshes") {
  for (const int lambda : {1, 2, 3}) {
    std::mt19937 rng(100 + lambda);
    auto mesh = make_square_mesh(2);
    oracle::random_refine(mesh, 40, 3, lambda, rng);
    CAPTURE(lambda);
    CHECK(mesh.global_index() <= lambda);
    check_against_oracle(mesh);
    CHECK(mesh.total_area() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("admissibility caps the boundary-node count and the edge-length ratio") {
  for (const int lambda : {1, 2}) {
    std::mt19937 rng(200 + lambda);
    auto mesh = make_square_mesh(2);
    double min_ratio = 1e300;
    for (int step = 0; step < 30; ++step) {
      oracle::random_refine(mesh, 1, 3, lambda, rng);
      for (const ElementId e : mesh.alive_elements()) {
        const auto bn = mesh.element_boundary_nodes(e);
        CHECK(static_cast<int>(bn.size()) <= 3 * (1 << lambda));
        const double hE = mesh.element_h(e);
        for (std::size_t i = 0; i < bn.size(); ++i) {
          const double len =
              norm(mesh.node_xy(bn[(i + 1) % bn.size()]) - mesh.node_xy(bn[i]));
          min_ratio = std::min(min_ratio, len / hE);
        }
      }
    }
    CAPTURE(lambda);
    // For right-isosceles roots the shortest admissible edge is a leg divided
    // 2^Lambda times, giving the uniform lower bound sqrt(2)/2^Lambda.
    const double c_bound = std::sqrt(2.0) / (1 << lambda);
    CHECK(min_ratio >= c_bound - 1e-12);
    CHECK(min_ratio <= c_bound + 1e-12);  // attained in these runs
  }
}

TEST_CASE("extreme corner refinement stays exact until the guarded depth limit") {
  auto mesh = make_square_mesh(2);
  const auto deepest_at_origin = [&] {
    ElementId best = kNoElement;
    for (const ElementId e : mesh.alive_elements()) {
      bool touches = false;
      for (const NodeId n : mesh.element_boundary_nodes(e)) {
        const Point p = mesh.node_xy(n);
        if (p.x == 0.0 && p.y == 0.0) touches = true;
      }
      if (touches &&
          (best == kNoElement || mesh.element(e).level > mesh.element(best).level)) {
        best = e;
      }
    }
    return best;
  };
  for (int step = 0; step < 100; ++step) {
    mesh.create_admissible_chain(deepest_at_origin(), 2);
  }
  int max_level = 0;
  for (const ElementId e : mesh.alive_elements()) {
    max_level = std::max(max_level, mesh.element(e).level);
  }
  CHECK(max_level >= 100);
  CHECK(mesh.total_area() == doctest::Approx(1.0).epsilon(1e-15));
  check_against_oracle(mesh);
  // Far beyond double-precision dyadic range the forest refuses to continue
  // instead of silently rounding.
  CHECK_THROWS_AS(
      [&] {
        for (int step = 0; step < 100; ++step) {
          mesh.create_admissible_chain(deepest_at_origin(), 2);
        }
      }(),
      std::logic_error);
}

TEST_CASE("L-shaped roots behave under a binding admissibility bound") {
  for (const int lambda : {1, 2}) {
    std::mt19937 rng(300 + lambda);
    auto mesh = make_lshape_mesh(0.5);
    oracle::random_refine(mesh, 35, 3, lambda, rng);
    CAPTURE(lambda);
    CHECK(mesh.global_index() <= lambda);
    CHECK(mesh.total_area() == doctest::Approx(3.0).epsilon(1e-12));
    check_against_oracle(mesh);
  }
}

TEST_CASE("index bookkeeping is labeling-independent on a mixed-shape root mesh") {
  // Conforming strip of non-right triangles; only plain bisections here, so
  // no assumption on the initial labeling is needed.
  const std::vector<Point> pts{{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}, {0.5, 1.0}, {1.5, 1.0}};
  const std::vector<std::array<int, 3>> tris{{0, 1, 3}, {1, 4, 3}, {1, 2, 4}};
  auto mesh = MeshForest::from_triangulation(pts, tris);
  CHECK(mesh.total_area() == doctest::Approx(1.5));

  std::mt19937 rng(31);
  for (int step = 0; step < 60; ++step) {
    std::uniform_int_distribution<ElementId> pick(0, mesh.num_elements() - 1);
    ElementId e = pick(rng);
    while (!mesh.is_alive(e)) e = pick(rng);
    mesh.bisect(e);
  }
  check_against_oracle(mesh);
  CHECK(mesh.total_area() == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("text round trip preserves derived adjacency") {
  std::mt19937 rng(5);
  auto mesh = make_square_mesh(2);
  oracle::random_refine(mesh, 15, 2, 2, rng);
  // Derived structures rebuilt from raw tables match the incremental state.
  auto rebuilt = MeshForest::from_raw_tables(mesh.raw_tables());
  CHECK(oracle::same_partition(mesh, rebuilt));
  CHECK(rebuilt.global_index() == mesh.global_index());
  for (const ElementId e : mesh.alive_elements()) {
    CHECK(rebuilt.facing_element(e) == mesh.facing_element(e));
    CHECK(rebuilt.element_boundary_nodes(e) == mesh.element_boundary_nodes(e));
  }
  for (NodeId n = 0; n < mesh.num_nodes(); ++n) {
    CHECK(rebuilt.node_on_boundary(n) == mesh.node_on_boundary(n));
  }
}

}  // TEST_SUITE
