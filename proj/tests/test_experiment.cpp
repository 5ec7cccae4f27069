#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "avem/experiment.hpp"
#include "avem/mesh_io.hpp"
#include "avem/problems.hpp"

using namespace avem;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p);
  REQUIRE(is.good());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("benchmark data: point values and corner behavior") {
  const auto spec = build_lshape_problem();
  CHECK(spec.mesh.num_nodes() == 225);
  CHECK(spec.mesh.num_alive() == 384);
  CHECK(spec.mesh.total_area() == doctest::Approx(3.0).epsilon(1e-13));

  // The Gaussian in u peaks with value 1 at (0.5, 0.5).
  const double r = std::sqrt(0.5);
  const double singular = std::cbrt(r * r) * std::sin(2.0 * (M_PI / 4.0) / 3.0);
  CHECK(spec.data.exact(Point{0.5, 0.5}) == doctest::Approx(singular + 1.0).epsilon(1e-13));

  // The first diffusion Gaussian is centered at (-0.5, -0.5); the other one
  // still contributes exp(-25) ~ 1.4e-11 at the reaction center.
  CHECK(spec.data.A(Point{-0.5, -0.5}).a11 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(spec.data.c(Point{-0.5, 0.0}) == doctest::Approx(2.0).epsilon(1e-10));

  // The singular part vanishes on both legs of the reentrant corner.
  for (const double t : {0.1, 0.35, 0.8}) {
    CHECK(std::abs(spec.data.exact(Point{t, 0.0}) -
                   std::exp(-1000.0 * ((t - 0.5) * (t - 0.5) + 0.25))) < 1e-15);
    const double v = spec.data.exact(Point{0.0, -t}) -
                     std::exp(-1000.0 * (0.25 + (-t - 0.5) * (-t - 0.5)));
    CHECK(std::abs(v) < 1e-12);
  }
}

TEST_CASE("manufactured load agrees with finite differences of the solution") {
  const auto spec = build_lshape_problem();
  const double h = 1e-5;
  for (const Point p : {Point{-0.52, -0.47}, Point{0.42, 0.55}, Point{-0.3, 0.7},
                        Point{0.21, 0.11}, Point{-0.8, -0.2}}) {
    const auto u = spec.data.exact;
    const auto a = [&](Point q) { return spec.data.A(q).a11; };
    // -div(a grad u) by central differences of the flux.
    const auto flux_x = [&](Point q) {
      return a(q) * (u({q.x + h, q.y}) - u({q.x - h, q.y})) / (2.0 * h);
    };
    const auto flux_y = [&](Point q) {
      return a(q) * (u({q.x, q.y + h}) - u({q.x, q.y - h})) / (2.0 * h);
    };
    const double div_flux = (flux_x({p.x + h, p.y}) - flux_x({p.x - h, p.y})) / (2.0 * h) +
                            (flux_y({p.x, p.y + h}) - flux_y({p.x, p.y - h})) / (2.0 * h);
    const double f_ref = -div_flux + spec.data.c(p) * u(p);
    CHECK(spec.data.f(p) == doctest::Approx(f_ref).epsilon(2e-4));
  }

  // The gradient matches finite differences too.
  for (const Point p : {Point{-0.52, -0.47}, Point{0.42, 0.55}, Point{0.13, -0.4}}) {
    const auto u = spec.data.exact;
    const Point g = spec.data.exact_grad(p);
    CHECK(g.x == doctest::Approx((u({p.x + h, p.y}) - u({p.x - h, p.y})) / (2 * h)).epsilon(1e-6));
    CHECK(g.y == doctest::Approx((u({p.x, p.y + h}) - u({p.x, p.y - h})) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("smoke experiment: affine problem, trivial artifacts") {
  const auto dir = std::filesystem::temp_directory_path() / "avem_smoke_test";
  std::filesystem::remove_all(dir);
  AvemConfig config;
  config.eps0 = 1.0;
  config.tol = 1.0;
  const auto summary = run_experiment(build_square_problem(2), config, dir.string());
  CHECK(summary.result.passes == 1);
  CHECK(summary.result.trace[0].eta <= 1e-10);
  CHECK(summary.result.trace[0].h1_error <= 1e-10);

  const auto trace = slurp(dir / "trace.csv");
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 2);  // header + one row
  for (const char* name : {"convergence.csv", "data_estimators.csv", "mesh_data.txt",
                           "mesh_final.txt", "mesh_data.svg", "mesh_final.svg",
                           "bisection_heatmap.svg", "mesh_stats.txt"}) {
    CHECK(std::filesystem::exists(dir / name));
  }

  // Emitted meshes parse back through the text format.
  const auto reloaded = load_mesh_text_file((dir / "mesh_final.txt").string());
  CHECK(reloaded.num_alive() == summary.result.mesh.num_alive());
  const auto redata = load_mesh_text_file((dir / "mesh_data.txt").string());
  CHECK(redata.num_alive() == summary.result.data_mesh.num_alive());

  // The perturbation diagnostic is reported; exact data make it vanish here.
  const auto stats = slurp(dir / "mesh_stats.txt");
  const auto pos = stats.find("perturbation_bound ");
  REQUIRE(pos != std::string::npos);
  const double pert = std::stod(stats.substr(pos + 19));
  CHECK(pert == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("perturbation diagnostic is positive for variable data") {
  const auto dir = std::filesystem::temp_directory_path() / "avem_pert_test";
  std::filesystem::remove_all(dir);
  AvemConfig config;
  config.eps0 = 1.0;
  config.tol = 1.0;
  run_experiment(build_lshape_problem(0.25), config, dir.string());
  const auto stats = slurp(dir / "mesh_stats.txt");
  const auto pos = stats.find("perturbation_bound ");
  REQUIRE(pos != std::string::npos);
  const double pert = std::stod(stats.substr(pos + 19));
  CHECK(pert > 0.0);
  CHECK(std::isfinite(pert));
}

TEST_CASE("experiment outputs are deterministic") {
  const auto dir_a = std::filesystem::temp_directory_path() / "avem_det_a";
  const auto dir_b = std::filesystem::temp_directory_path() / "avem_det_b";
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
  AvemConfig config;
  config.eps0 = 1.0;
  config.tol = 0.5;
  const auto spec = build_lshape_problem(0.5);
  run_experiment(spec, config, dir_a.string());
  run_experiment(spec, config, dir_b.string());
  for (const char* name : {"trace.csv", "convergence.csv", "data_estimators.csv",
                           "mesh_final.txt", "mesh_data.txt"}) {
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));
  }
}

TEST_CASE("greedy sweep: single row for constants, decaying rows otherwise") {
  const auto constant = run_greedy_sweep(build_greedy_target("constant"), 0.0,
                                         LqNorm::infinity, 0.5, 1, 0.5, 0.5, false, 10);
  REQUIRE(constant.rows.size() == 1);
  CHECK(std::isnan(constant.fitted_slope));  // undefined, reported as such

  const auto linear = run_greedy_sweep(build_greedy_target("linear"), 0.0, LqNorm::infinity,
                                       0.1, 5, 0.5, 0.5, false, 10);
  REQUIRE(linear.rows.size() == 5);
  for (std::size_t i = 0; i < linear.rows.size(); ++i) {
    CHECK(linear.rows[i].zeta <= linear.rows[i].delta);  // max-norm postcondition
    if (i + 1 < linear.rows.size()) {
      CHECK(linear.rows[i + 1].n_elements >= linear.rows[i].n_elements);
    }
  }
  CHECK(linear.fitted_slope < -0.4);
}

TEST_CASE("slope fitting uses only the final decade") {
  // Two clusters; the early one would flatten the fit if it were included.
  const std::vector<double> x{1.0, 2.0, 200.0, 400.0, 800.0};
  const std::vector<double> y{1.0, 1.0, 1.0, 0.5, 0.25};
  const double slope = fit_loglog_slope(x, y);
  CHECK(slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::isnan(fit_loglog_slope(std::vector<double>{1.0}, std::vector<double>{1.0})));
}

}  // TEST_SUITE
