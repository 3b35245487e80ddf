#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "framelab/catalog.hpp"
#include "framelab/gauge.hpp"
#include "framelab/so_n.hpp"

using namespace framelab;
using std::numbers::pi;

namespace {

struct Case {
  DiscGrid grid;
  SurfaceJet jet;
  NormalFrameField frame;
  TorsionField torsion;
};

Case make_case(const std::string& name, int n_r, TwistSpec twist = {}) {
  const DiscGrid grid = DiscGrid::build(n_r, 2 * n_r);
  const SurfaceSpec spec = surface_catalog(name);
  SurfaceJet jet = sample_surface(spec, grid);
  NormalFrameField frame = apply_twist(initial_frame(spec, jet, grid), twist, grid);
  TorsionField torsion = torsion_of_frame(frame, grid);
  return {grid, std::move(jet), std::move(frame), std::move(torsion)};
}

TwistSpec linear_twist(double a, double b) {
  TwistSpec t;
  t.kind = TwistKind::linear;
  t.a = a;
  t.b = b;
  return t;
}

double rho(double u, double v) { return 1.0 + u * u + v * v; }

// 2 pi int_0^1 2 r^2 / (1 + r^2)^2 r dr by composite Simpson.
double graph_torsion_oracle() {
  const int m = 20000;
  const auto f = [](double r) { return 2 * r * r * r / ((1 + r * r) * (1 + r * r)); };
  double s = f(0.0) + f(1.0);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(static_cast<double>(i) / m);
  return 2 * pi * s / (3.0 * m);
}

LieAlgebraField random_lie_field(int n, const DiscGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> c(n * n * 3);
  for (auto& x : c) x = dist(rng);
  LieAlgebraField a{MatrixField(g.node_count(), n, n)};
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    for (int s = 0; s < n; ++s) {
      for (int t = s + 1; t < n; ++t) {
        const std::size_t b = 3 * (s * n + t);
        const double x = c[b] + c[b + 1] * std::sin(2 * g.u(i)) + c[b + 2] * std::cos(3 * g.v(i));
        a.a(i, s, t) = x;
        a.a(i, t, s) = -x;
      }
    }
  }
  return a;
}

}  // namespace

TEST_CASE("radial oracle matches the closed form") {
  CHECK(graph_torsion_oracle() == doctest::Approx(2 * pi * (std::log(2.0) - 0.5)).epsilon(1e-10));
  CHECK(*analytic_total_torsion("holomorphic_graph", {}) ==
        doctest::Approx(graph_torsion_oracle()).epsilon(1e-8));
}

TEST_CASE("apply_rotation") {
  const Case c = make_case("holomorphic_graph", 8);
  const std::size_t nodes = c.grid.node_count();
  SUBCASE("identity") {
    const NormalFrameField f = apply_rotation(c.frame, RotationField::identity(2, nodes));
    CHECK(max_frobenius_difference(f.basis, c.frame.basis) == 0.0);
  }
  SUBCASE("quarter turn") {
    RotationField r{MatrixField(nodes, 2, 2)};
    for (std::size_t i = 0; i < nodes; ++i) r.r.set(i, rotation_from_angle(pi / 2));
    const NormalFrameField f = apply_rotation(c.frame, r);
    for (std::size_t i = 0; i < nodes; ++i) {
      CHECK((f.at(i).col(0) - c.frame.at(i).col(1)).norm() <= 1e-15);
      CHECK((f.at(i).col(1) + c.frame.at(i).col(0)).norm() <= 1e-15);
    }
    CHECK(check_frame(c.jet, f).min_orientation > 0.0);
  }
  SUBCASE("random field preserves frame invariants") {
    const Case e = make_case("holomorphic_graph_embedded", 8);
    const RotationField r = random_smooth_rotation(3, e.grid, 5);
    const FrameDiagnostics d = check_frame(e.jet, apply_rotation(e.frame, r));
    CHECK(d.orthonormality <= 1e-12);
    CHECK(d.tangency <= 1e-12);
    CHECK(d.min_orientation > 0.0);
  }
}

TEST_CASE("random rotation fields") {
  const DiscGrid g = DiscGrid::build(8, 16);
  const RotationField a = random_smooth_rotation(4, g, 42);
  const RotationField b = random_smooth_rotation(4, g, 42);
  const RotationField c = random_smooth_rotation(4, g, 43);
  CHECK(max_frobenius_difference(a.r, b.r) == 0.0);
  CHECK(max_frobenius_difference(a.r, c.r) > 0.0);
  const RotationField bump = random_bump_rotation(3, g, 9);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    CHECK(orthogonality_defect(a.r.at(i)) <= 1e-10);
    CHECK(orthogonality_defect(bump.r.at(i)) <= 1e-10);
  }
  for (std::size_t node : g.boundary_nodes()) {
    CHECK((bump.r.at(node) - SmallMatrix::Identity(3, 3)).norm() <= 1e-15);
  }
}

TEST_CASE("transform_torsion") {
  SUBCASE("identity") {
    const Case c = make_case("holomorphic_graph", 16);
    const TorsionField t =
        transform_torsion(c.torsion, RotationField::identity(2, c.grid.node_count()), c.grid);
    CHECK(max_frobenius_difference(t.t1, c.torsion.t1) <= 1e-16);
    CHECK(max_frobenius_difference(t.t2, c.torsion.t2) <= 1e-16);
  }
  SUBCASE("pure rotation by phi = u") {
    const DiscGrid g = DiscGrid::build(32, 64);
    const ScalarField phi = g.sample([](double u, double) { return u; });
    const TorsionField zero{MatrixField(g.node_count(), 2, 2), MatrixField(g.node_count(), 2, 2)};
    const TorsionField t = transform_torsion(zero, plane_rotation(2, phi), g);
    const double h = g.mesh_size();
    double e1 = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      e1 = std::max(e1, std::abs(std::abs(t.t1(i, 0, 1)) - 1.0));
      CHECK(t.t1(i, 0, 1) == -t.t1(i, 1, 0));
    }
    CHECK(e1 <= h * h);
    CHECK(max_frobenius(t.t2) <= h * h);
  }
  SUBCASE("agrees with torsion of the rotated frame") {
    for (const std::string name : {"holomorphic_graph", "holomorphic_graph_embedded"}) {
      CAPTURE(name);
      double prev = 0.0;
      for (int n : {16, 32, 64}) {
        const Case c = make_case(name, n);
        const RotationField r = random_smooth_rotation(c.torsion.codimension(), c.grid, 3);
        const TorsionField a = transform_torsion(c.torsion, r, c.grid);
        const TorsionField b = torsion_of_frame(apply_rotation(c.frame, r), c.grid);
        const double e =
            std::max(max_frobenius_difference(a.t1, b.t1), max_frobenius_difference(a.t2, b.t2));
        const double h = c.grid.mesh_size();
        CHECK(e <= 2 * h * h);
        if (prev > 0.0) CHECK(std::log2(prev / e) >= 1.8);
        prev = e;
      }
    }
  }
}

TEST_CASE("total torsion") {
  SUBCASE("zero") {
    const DiscGrid g = DiscGrid::build(8, 16);
    const TorsionField zero{MatrixField(g.node_count(), 2, 2), MatrixField(g.node_count(), 2, 2)};
    CHECK(total_torsion(zero, g) == 0.0);
    const ElResidual el = el_residual(zero, g);
    CHECK(el.interior == 0.0);
    CHECK(el.boundary == 0.0);
  }
  SUBCASE("twisted plane") {
    const Case c = make_case("plane", 64, linear_twist(1, 0));
    CHECK(total_torsion(c.torsion, c.grid) == doctest::Approx(2 * pi).epsilon(0.01));
    const ElResidual el = el_residual(c.torsion, c.grid);
    CHECK(el.interior <= 1e-3);
    CHECK(el.boundary == doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("holomorphic graph") {
    const Case c = make_case("holomorphic_graph", 64);
    CHECK(total_torsion(c.torsion, c.grid) == doctest::Approx(graph_torsion_oracle()).epsilon(0.01));
    const ElResidual el = el_residual(c.torsion, c.grid);
    const double h = c.grid.mesh_size();
    CHECK(el.interior <= h * h);
    CHECK(el.boundary <= h * h);
  }
  SUBCASE("constant rotations leave it unchanged") {
    const Case c = make_case("holomorphic_graph_embedded", 16);
    const double t0 = total_torsion(c.torsion, c.grid);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int trial = 0; trial < 5; ++trial) {
      SmallMatrix a = SmallMatrix::Zero(3, 3);
      a(0, 1) = dist(rng);
      a(0, 2) = dist(rng);
      a(1, 2) = dist(rng);
      a -= a.transpose().eval();
      RotationField r{MatrixField(c.grid.node_count(), 3, 3)};
      const SmallMatrix r0 = exp_so(a);
      for (std::size_t i = 0; i < c.grid.node_count(); ++i) r.r.set(i, r0);
      CHECK(std::abs(total_torsion(transform_torsion(c.torsion, r, c.grid), c.grid) - t0) <= 1e-10);
    }
  }
}

TEST_CASE("torsion gradient") {
  SUBCASE("zero torsion") {
    const DiscGrid g = DiscGrid::build(8, 16);
    const TorsionField zero{MatrixField(g.node_count(), 3, 3), MatrixField(g.node_count(), 3, 3)};
    CHECK(max_frobenius(torsion_gradient(zero, g).a) == 0.0);
  }
  SUBCASE("directional derivatives") {
    const Case c = make_case("holomorphic_graph_embedded", 16);
    const RotationField r = random_smooth_rotation(3, c.grid, 17);
    const TorsionField t = transform_torsion(c.torsion, r, c.grid);
    const LieAlgebraField g = torsion_gradient(t, c.grid);
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      LieAlgebraField a = random_lie_field(3, c.grid, seed);
      const double eps = 1e-5;
      const auto torsion_at = [&](double scale) {
        LieAlgebraField step = a;
        for (int s = 0; s < 3; ++s)
          for (int q = 0; q < 3; ++q)
            for (double& x : step.a.component(s, q)) x *= scale;
        return total_torsion(transform_torsion(t, exp_field(step), c.grid), c.grid);
      };
      const double fd = (torsion_at(eps) - torsion_at(-eps)) / (2 * eps);
      const double exact = lie_inner_product(g, a, c.grid);
      CHECK(std::abs(fd - exact) <= 1e-4 * std::abs(exact));
    }
  }
  SUBCASE("small at a Coulomb frame") {
    const Case c = make_case("holomorphic_graph", 32);
    const double h = c.grid.mesh_size();
    CHECK(max_frobenius(torsion_gradient(c.torsion, c.grid).a) <= h * h);
  }
}

TEST_CASE("Neumann route") {
  SUBCASE("twisted plane") {
    const Case c = make_case("plane", 32, linear_twist(1, 0));
    const CoulombResult r = coulomb_via_neumann(c.jet, c.frame, c.grid);
    CHECK(r.route == Route::neumann);
    CHECK(r.total_torsion <= 1e-4);
    CHECK(max_frobenius(r.torsion.t1) <= 1e-2);
    // angle = -u + const
    const double c0 = r.angle[0];
    double e = 0.0;
    for (std::size_t i = 0; i < c.grid.node_count(); ++i) {
      e = std::max(e, std::abs(r.angle[i] - c0 + c.grid.u(i)));
    }
    CHECK(e <= 1e-2);
    CHECK(check_frame(c.jet, r.frame).orthonormality <= 1e-12);
  }
  SUBCASE("already Coulomb") {
    const Case c = make_case("holomorphic_graph", 32);
    const CoulombResult r = coulomb_via_neumann(c.jet, c.frame, c.grid);
    const double t0 = total_torsion(c.torsion, c.grid);
    CHECK(std::abs(r.total_torsion - t0) <= 1e-3 * t0);
    double spread = 0.0;
    for (double x : r.angle) spread = std::max(spread, std::abs(x - r.angle[0]));
    CHECK(spread <= 1e-10);
  }
  SUBCASE("codimension 3") {
    const Case c = make_case("holomorphic_graph_embedded", 8);
    CHECK_THROWS_WITH_AS(coulomb_via_neumann(c.jet, c.frame, c.grid),
                         "Neumann route requires codimension 2", GaugeError);
  }
}

TEST_CASE("descent") {
  SUBCASE("options") {
    DescentOptions o;
    CHECK_NOTHROW(o.validate());
    o.armijo_slope = 1.0;
    CHECK_THROWS_AS(o.validate(), GaugeError);
    o = {};
    o.step_shrink = 0.0;
    CHECK_THROWS_AS(o.validate(), GaugeError);
    o = {};
    o.max_iterations = 0;
    CHECK_THROWS_AS(o.validate(), GaugeError);
    o = {};
    o.initial_step = -1;
    CHECK_THROWS_AS(o.validate(), GaugeError);
  }
  SUBCASE("twisted plane agrees with the Neumann route") {
    const Case c = make_case("plane", 32, linear_twist(1, 0));
    const CoulombResult d = minimize_total_torsion(c.jet, c.frame, c.grid);
    const CoulombResult n = coulomb_via_neumann(c.jet, c.frame, c.grid);
    CHECK(d.converged);
    CHECK(d.total_torsion <= 1e-4 * 2 * pi);
    const double h = c.grid.mesh_size();
    CHECK(max_frobenius_difference(d.torsion.t1, n.torsion.t1) <= h * h);
    CHECK(max_frobenius_difference(d.torsion.t2, n.torsion.t2) <= h * h);
    for (std::size_t i = 0; i < c.grid.node_count(); ++i) {
      CHECK(orthogonality_defect(d.rotation.r.at(i)) <= 1e-10);
    }
  }
  SUBCASE("history is monotone") {
    const Case c = make_case("holomorphic_graph_embedded", 16);
    DescentOptions o;
    o.random_seed = 4;
    const CoulombResult d = minimize_total_torsion(c.jet, c.frame, c.grid, o);
    REQUIRE(d.history.size() >= 2u);
    for (std::size_t k = 1; k < d.history.size(); ++k) {
      CHECK(d.history[k].total_torsion <= d.history[k - 1].total_torsion);
      CHECK(d.history[k].iteration == d.history[k - 1].iteration + 1);
    }
    CHECK(d.history.back().total_torsion == d.total_torsion);
  }
  SUBCASE("iteration cap flags non-convergence") {
    const Case c = make_case("plane", 16, linear_twist(1, 0.5));
    DescentOptions o;
    o.max_iterations = 1;
    o.el_tolerance = 1e-14;
    const CoulombResult d = minimize_total_torsion(c.jet, c.frame, c.grid, o);
    CHECK_FALSE(d.converged);
    CHECK(d.iterations == 1);
  }
  SUBCASE("gauge invariance of the minimum") {
    const Case c = make_case("holomorphic_graph", 32);
    const CoulombResult a = minimize_total_torsion(c.jet, c.frame, c.grid);
    const NormalFrameField rotated = apply_rotation(c.frame, random_smooth_rotation(2, c.grid, 8, 0.5));
    const CoulombResult b = minimize_total_torsion(c.jet, rotated, c.grid);
    const double h = c.grid.mesh_size();
    CHECK(std::abs(a.total_torsion - b.total_torsion) <= h * h);
  }
}

TEST_CASE("tau potential") {
  SUBCASE("zero data") {
    const Case c = make_case("plane", 8);
    const NormalCurvatureField s = curvature_from_torsion(c.torsion, c.jet, c.grid);
    const TauPotential t = tau_potential(c.torsion, s, c.grid);
    CHECK(max_frobenius(t.tau) == 0.0);
    CHECK(t.residual_gradient == 0.0);
    CHECK(t.residual_boundary == 0.0);
    CHECK(t.residual_poisson == 0.0);
  }
  SUBCASE("holomorphic graph") {
    const Case c = make_case("holomorphic_graph", 32);
    const NormalCurvatureField s = curvature_from_torsion(c.torsion, c.jet, c.grid);
    const TauPotential t = tau_potential(c.torsion, s, c.grid);
    const double h = c.grid.mesh_size();
    double e = 0.0;
    for (std::size_t i = 0; i < c.grid.node_count(); ++i) {
      const double oracle = 0.5 * std::log(rho(c.grid.u(i), c.grid.v(i)) / 2.0);
      e = std::max(e, std::abs(t.tau(i, 0, 1) - oracle));
      CHECK(t.tau(i, 1, 0) == -t.tau(i, 0, 1));
    }
    CHECK(e <= h * h);
    CHECK(t.residual_boundary == 0.0);
    CHECK(t.residual_gradient <= h * h);
    CHECK(t.residual_poisson <= h * h);
  }
}

TEST_CASE("a priori report") {
  CHECK(apriori_gamma(2) == doctest::Approx(0.25));
  CHECK(apriori_gamma(3) == doctest::Approx(std::sqrt(3.0) / 4).epsilon(1e-12));
  CHECK(apriori_gamma(9) == doctest::Approx(std::numbers::sqrt2).epsilon(1e-15));
  for (int n = 1; n <= 20; ++n) CHECK(apriori_gamma(n) <= std::numbers::sqrt2);

  const Case c = make_case("holomorphic_graph", 16);
  const CoulombResult r = minimize_total_torsion(c.jet, c.frame, c.grid);
  const AprioriReport rep = apriori_report(2, r, curvature_from_torsion(r.torsion, c.jet, c.grid));
  CHECK(rep.lhs == 0.0);
  CHECK(rep.condition_met);
  CHECK(rep.sup_torsion > 0.0);
  CHECK(rep.total_torsion_min == r.total_torsion);
}
