#include <cmath>
#include <numbers>

#include "doctest.h"
#include "framelab/disc_grid.hpp"

using namespace framelab;
using std::numbers::pi;

namespace {

double max_error(const ScalarField& a, const ScalarField& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

}  // namespace

TEST_CASE("grid construction") {
  SUBCASE("node count") {
    const DiscGrid g = DiscGrid::build(8, 16);
    CHECK(g.node_count() == 129u);
    CHECK(g.boundary_nodes().size() == 16u);
    CHECK(g.u(0) == 0.0);
    CHECK(g.v(0) == 0.0);
    CHECK(g.index(3, 5) == 1u + 2u * 16u + 5u);
    CHECK(g.ring_of(g.index(3, 5)) == 3);
    CHECK(g.is_boundary(g.index(8, 0)));
    CHECK_FALSE(g.is_boundary(g.index(7, 15)));
  }
  SUBCASE("node positions") {
    const DiscGrid g = DiscGrid::build(8, 16);
    const std::size_t i = g.index(4, 2);
    CHECK(g.r(i) == doctest::Approx(0.5));
    CHECK(g.theta(i) == doctest::Approx(2 * pi * 2 / 16));
    CHECK(g.u(i) == doctest::Approx(0.5 * std::cos(pi / 4)));
    CHECK(g.v(i) == doctest::Approx(0.5 * std::sin(pi / 4)));
  }
  SUBCASE("weights") {
    const DiscGrid g = DiscGrid::build(64, 128);
    double area = 0.0, arc = 0.0;
    for (double w : g.quad_weights()) {
      CHECK(w > 0.0);
      area += w;
    }
    for (double w : g.boundary_arc_weights()) arc += w;
    CHECK(std::abs(area - pi) / pi < 1e-10);
    CHECK(std::abs(arc - 2 * pi) < 1e-10);
  }
  SUBCASE("boundary normals") {
    const DiscGrid g = DiscGrid::build(8, 16);
    for (int k = 0; k < 16; ++k) {
      const std::size_t node = g.boundary_nodes()[k];
      CHECK(g.normal_u(k) == doctest::Approx(g.u(node)));
      CHECK(g.normal_v(k) == doctest::Approx(g.v(node)));
    }
  }
  SUBCASE("mesh size") {
    CHECK(DiscGrid::build(64, 128).mesh_size() == doctest::Approx(2 * pi / 128));
    CHECK(DiscGrid::build(8, 256).mesh_size() == doctest::Approx(1.0 / 8));
  }
  SUBCASE("invalid sizes") {
    CHECK_THROWS_AS(DiscGrid::build(8, 15), GridError);
    CHECK_THROWS_AS(DiscGrid::build(7, 16), GridError);
    CHECK_THROWS_AS(DiscGrid::build(8, 14), GridError);
  }
}

TEST_CASE("cartesian partials") {
  SUBCASE("linear field is exact") {
    const DiscGrid g = DiscGrid::build(16, 32);
    const Partials p = cartesian_partials(g.sample([](double u, double) { return u; }), g);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      CHECK(p.du[i] == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(p.dv[i]) < 1e-12);
    }
  }
  SUBCASE("product uv is second order") {
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
      const DiscGrid g = DiscGrid::build(n, 2 * n);
      const Partials p = cartesian_partials(g.sample([](double u, double v) { return u * v; }), g);
      const double e = max_error(p.du, g.sample([](double, double v) { return v; }));
      const double h = g.mesh_size();
      CHECK(e <= 0.5 * h * h);
      if (prev > 0.0) CHECK(std::log2(prev / e) >= 1.9);
      prev = e;
    }
  }
  SUBCASE("sin(u) exp(v) halves to a quarter") {
    auto err = [](int n) {
      const DiscGrid g = DiscGrid::build(n, 2 * n);
      const Partials p =
          cartesian_partials(g.sample([](double u, double v) { return std::sin(u) * std::exp(v); }), g);
      const ScalarField fu = g.sample([](double u, double v) { return std::cos(u) * std::exp(v); });
      const ScalarField fv = g.sample([](double u, double v) { return std::sin(u) * std::exp(v); });
      return std::max(max_error(p.du, fu), max_error(p.dv, fv));
    };
    const double ratio = err(32) / err(64);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.6);
  }
  SUBCASE("shape mismatch") {
    const DiscGrid g = DiscGrid::build(8, 16);
    CHECK_THROWS_AS(cartesian_partials(ScalarField(10), g), GridError);
  }
}

TEST_CASE("disc quadrature") {
  const DiscGrid g = DiscGrid::build(64, 128);
  CHECK(std::abs(integrate_disc(g.sample([](double, double) { return 1.0; }), g) - pi) < 1e-8);
  CHECK(std::abs(integrate_disc(g.sample([](double u, double) { return u; }), g)) < 1e-8);
  CHECK(std::abs(integrate_disc(g.sample([](double, double v) { return v; }), g)) < 1e-8);
  const double h = g.mesh_size();
  const double r2 = integrate_disc(g.sample([](double u, double v) { return u * u + v * v; }), g);
  CHECK(std::abs(r2 - pi / 2) <= h * h);

  const ScalarField a = g.sample([](double u, double v) { return u + v; });
  const ScalarField b = g.sample([](double u, double v) { return u - v; });
  const ScalarField ab = g.sample([](double u, double v) { return u * u - v * v; });
  CHECK(inner_product(a, b, g) == doctest::Approx(integrate_disc(ab, g)).epsilon(1e-12));
}

TEST_CASE("boundary quadrature") {
  const DiscGrid g = DiscGrid::build(16, 32);
  const auto bdry = [&g](auto fn) {
    ScalarField f(g.sectors());
    for (int k = 0; k < g.sectors(); ++k) f[k] = fn(2 * pi * k / g.sectors());
    return f;
  };
  CHECK(std::abs(integrate_boundary(bdry([](double) { return 1.0; }), g) - 2 * pi) < 1e-10);
  CHECK(std::abs(integrate_boundary(bdry([](double t) { return std::cos(t); }), g)) < 1e-10);
  const double c2 = integrate_boundary(bdry([](double t) { return std::cos(t) * std::cos(t); }), g);
  CHECK(std::abs(c2 - pi) < 1e-10);
  CHECK_THROWS_AS(integrate_boundary(ScalarField(3), g), GridError);

  const ScalarField full = g.sample([](double u, double) { return u; });
  const ScalarField on_b = boundary_values(full, g);
  REQUIRE(on_b.size() == 32u);
  CHECK(on_b[0] == doctest::Approx(1.0));
}

TEST_CASE("discrete Green identity") {
  // phi = r^4: grad = 4 r^2 (u, v), Delta = 16 r^2, both sides equal 8 pi.
  for (int n : {16, 32, 64}) {
    const DiscGrid g = DiscGrid::build(n, 2 * n);
    const ScalarField fu = g.sample([](double u, double v) { return 4 * (u * u + v * v) * u; });
    const ScalarField fv = g.sample([](double u, double v) { return 4 * (u * u + v * v) * v; });
    ScalarField flux(g.sectors());
    for (int k = 0; k < g.sectors(); ++k) {
      const std::size_t node = g.boundary_nodes()[k];
      flux[k] = fu[node] * g.normal_u(k) + fv[node] * g.normal_v(k);
    }
    const double boundary = integrate_boundary(flux, g);
    CHECK(boundary == doctest::Approx(8 * pi).epsilon(1e-12));
    CHECK(integrate_disc(flux_divergence(fu, fv, g), g) == doctest::Approx(boundary).epsilon(1e-12));
    const double h = g.mesh_size();
    const double interior =
        integrate_disc(g.sample([](double u, double v) { return 16 * (u * u + v * v); }), g);
    CHECK(std::abs(interior - boundary) <= 16 * h * h);
  }
}

TEST_CASE("polar Laplacian") {
  const DiscGrid g = DiscGrid::build(32, 64);
  const ScalarField lap = apply_laplacian(g.sample([](double u, double v) { return u * u + v * v; }), g);
  double e = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (!g.is_boundary(i)) e = std::max(e, std::abs(lap[i] - 4.0));
  }
  CHECK(e < 1e-9);
  CHECK(max_abs(lap) == doctest::Approx(4.0));
}
