#include <cmath>
#include <numbers>

#include "doctest.h"
#include "framelab/poisson.hpp"

using namespace framelab;
using std::numbers::pi;

namespace {

double max_error(const ScalarField& a, const ScalarField& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

ScalarField boundary_sample(const DiscGrid& g, auto fn) {
  ScalarField b(g.sectors());
  for (int k = 0; k < g.sectors(); ++k) {
    const std::size_t node = g.boundary_nodes()[k];
    b[k] = fn(g.u(node), g.v(node), g.normal_u(k), g.normal_v(k));
  }
  return b;
}

ScalarField minus_mean(ScalarField f, const DiscGrid& g) {
  const double mean = integrate_disc(f, g) / pi;
  for (auto& x : f) x -= mean;
  return f;
}

}  // namespace

TEST_CASE("Dirichlet Poisson") {
  SUBCASE("constant rhs") {
    const DiscGrid g = DiscGrid::build(32, 64);
    const ScalarField phi = solve_poisson_dirichlet(ScalarField(g.node_count(), 4.0), g);
    const double h = g.mesh_size();
    CHECK(max_error(phi, g.sample([](double u, double v) { return u * u + v * v - 1; })) <= h * h);
    for (std::size_t b : g.boundary_nodes()) CHECK(phi[b] == 0.0);
  }
  SUBCASE("zero rhs") {
    const DiscGrid g = DiscGrid::build(16, 32);
    CHECK(max_abs(solve_poisson_dirichlet(ScalarField(g.node_count(), 0.0), g)) <= 1e-10);
  }
  SUBCASE("manufactured solution converges at second order") {
    // phi* = (r^2 - 1) u, Delta phi* = 8u.
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
      const DiscGrid g = DiscGrid::build(n, 2 * n);
      const DirichletPoisson solver(g);
      const ScalarField phi = solver.solve(g.sample([](double u, double) { return 8 * u; }));
      const double e =
          max_error(phi, g.sample([](double u, double v) { return (u * u + v * v - 1) * u; }));
      if (prev > 0.0) CHECK(std::log2(prev / e) >= 1.9);
      prev = e;
    }
  }
  SUBCASE("shape mismatch") {
    const DiscGrid g = DiscGrid::build(8, 16);
    CHECK_THROWS(solve_poisson_dirichlet(ScalarField(5), g));
  }
}

TEST_CASE("Neumann Poisson") {
  SUBCASE("f = 4, g = 2") {
    const DiscGrid g = DiscGrid::build(32, 64);
    const NeumannSolution s =
        solve_poisson_neumann(ScalarField(g.node_count(), 4.0), ScalarField(g.sectors(), 2.0), g);
    const double h = g.mesh_size();
    CHECK(max_error(s.phi, g.sample([](double u, double v) { return u * u + v * v - 0.5; })) <=
          h * h);
    CHECK(std::abs(integrate_disc(s.phi, g)) <= 1e-10);
  }
  SUBCASE("zero data") {
    const DiscGrid g = DiscGrid::build(16, 32);
    const NeumannSolution s =
        solve_poisson_neumann(ScalarField(g.node_count(), 0.0), ScalarField(g.sectors(), 0.0), g);
    CHECK(max_abs(s.phi) <= 1e-10);
    CHECK_FALSE(s.projected);
  }
  SUBCASE("incompatible data") {
    const DiscGrid g = DiscGrid::build(16, 32);
    CHECK_THROWS_AS(
        solve_poisson_neumann(ScalarField(g.node_count(), 1.0), ScalarField(g.sectors(), 0.0), g),
        PoissonError);
  }
  SUBCASE("small defect is projected away") {
    const DiscGrid g = DiscGrid::build(16, 32);
    const NeumannSolution s = solve_poisson_neumann(ScalarField(g.node_count(), 4.0),
                                                    ScalarField(g.sectors(), 2.0 + 1e-9), g);
    CHECK(s.projected);
    CHECK(std::abs(s.compatibility_defect) == doctest::Approx(2 * pi * 1e-9).epsilon(1e-3));
    CHECK(std::abs(integrate_disc(s.phi, g)) <= 1e-10);
  }
  SUBCASE("manufactured solution converges at second order") {
    // phi* = v^2 sin u + u.
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
      const DiscGrid g = DiscGrid::build(n, 2 * n);
      const ScalarField f =
          g.sample([](double u, double v) { return (2.0 - v * v) * std::sin(u); });
      const ScalarField b = boundary_sample(g, [](double u, double v, double nu, double nv) {
        return (v * v * std::cos(u) + 1.0) * nu + 2 * v * std::sin(u) * nv;
      });
      const NeumannPoisson solver(g);
      const NeumannSolution s = solver.solve(f, b);
      CHECK(std::abs(integrate_disc(s.phi, g)) <= 1e-10);
      const ScalarField exact =
          minus_mean(g.sample([](double u, double v) { return v * v * std::sin(u) + u; }), g);
      const double e = max_error(s.phi, exact);
      if (prev > 0.0) CHECK(std::log2(prev / e) >= 1.9);
      prev = e;
    }
  }
}
