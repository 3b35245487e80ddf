#include "framelab/gauge.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "framelab/poisson.hpp"
#include "framelab/so_n.hpp"

namespace framelab {
namespace {

// Fixed descent metric 4 (D_u^t W D_u + D_v^t W D_v) + delta W. It is the
// second variation of the total torsion in one skew coordinate at T = 0, so
// the preconditioned step is exact for the abelian (n = 2) part.
constexpr double kMassShift = 1e-6;

Eigen::SparseMatrix<double> descent_metric(const DiscGrid& grid) {
  const auto w = grid.quad_weights();
  const auto n = static_cast<Eigen::Index>(grid.node_count());
  Eigen::SparseMatrix<double> weights(n, n);
  std::vector<Eigen::Triplet<double>> diag;
  for (Eigen::Index i = 0; i < n; ++i) diag.emplace_back(i, i, w[static_cast<std::size_t>(i)]);
  weights.setFromTriplets(diag.begin(), diag.end());
  const Eigen::SparseMatrix<double> du = grid.du_operator();
  const Eigen::SparseMatrix<double> dv = grid.dv_operator();
  const Eigen::SparseMatrix<double> dut = du.transpose();
  const Eigen::SparseMatrix<double> dvt = dv.transpose();
  Eigen::SparseMatrix<double> metric = dut * weights * du + dvt * weights * dv;
  metric *= 4.0;
  metric += kMassShift * weights;
  return metric;
}

SmallMatrix random_skew(int n, std::mt19937_64& rng, double amplitude) {
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  SmallMatrix a = SmallMatrix::Zero(n, n);
  for (int s = 0; s < n; ++s) {
    for (int t = s + 1; t < n; ++t) {
      a(s, t) = dist(rng);
      a(t, s) = -a(s, t);
    }
  }
  return a;
}

void require_same_shape(const MatrixField& a, const MatrixField& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.node_count() != b.node_count()) {
    throw GaugeError(std::string(what) + ": dimension mismatch");
  }
}

}  // namespace

RotationField RotationField::identity(int n, std::size_t nodes) {
  RotationField r{MatrixField(nodes, n, n)};
  for (int s = 0; s < n; ++s) std::ranges::fill(r.r.component(s, s), 1.0);
  return r;
}

const char* route_name(Route route) { return route == Route::neumann ? "neumann" : "descent"; }

void DescentOptions::validate() const {
  if (max_iterations <= 0 || max_backtracks <= 0) {
    throw GaugeError("descent options: iteration limits must be positive");
  }
  if (!(initial_step > 0.0) || !(el_tolerance > 0.0) || !(relative_tolerance > 0.0) ||
      !(random_amplitude > 0.0)) {
    throw GaugeError("descent options: step, tolerances and amplitude must be positive");
  }
  if (!(armijo_slope > 0.0 && armijo_slope < 1.0)) {
    throw GaugeError("descent options: Armijo slope factor must lie in (0, 1)");
  }
  if (!(step_shrink > 0.0 && step_shrink < 1.0)) {
    throw GaugeError("descent options: step shrink factor must lie in (0, 1)");
  }
}

NormalFrameField apply_rotation(const NormalFrameField& frame, const RotationField& rotation) {
  if (rotation.dimension() != frame.codimension() ||
      rotation.r.node_count() != frame.node_count()) {
    throw GaugeError("apply_rotation: dimension mismatch");
  }
  NormalFrameField out{MatrixField(frame.node_count(), frame.basis.rows(), frame.codimension())};
  for (std::size_t i = 0; i < frame.node_count(); ++i) {
    // Columns are normals: N_s = sum_t R(s, t) N~_t.
    out.basis.set(i, frame.at(i) * rotation.r.at(i).transpose());
  }
  return out;
}

TorsionField transform_torsion(const TorsionField& torsion, const RotationField& rotation,
                               const DiscGrid& grid) {
  require_same_shape(torsion.t1, rotation.r, "transform_torsion");
  const auto [du, dv] = rotation.r.partials(grid);
  const int n = torsion.codimension();
  TorsionField out{MatrixField(grid.node_count(), n, n), MatrixField(grid.node_count(), n, n)};
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    const SmallMatrix r = rotation.r.at(i);
    const SmallMatrix rt = r.transpose();
    out.t1.set(i, skew_part(du.at(i) * rt) + r * torsion.t1.at(i) * rt);
    out.t2.set(i, skew_part(dv.at(i) * rt) + r * torsion.t2.at(i) * rt);
  }
  return out;
}

double total_torsion(const TorsionField& torsion, const DiscGrid& grid) {
  ScalarField density = squared_norms(torsion.t1);
  const ScalarField second = squared_norms(torsion.t2);
  for (std::size_t i = 0; i < density.size(); ++i) density[i] += second[i];
  return integrate_disc(density, grid);
}

ElResidual el_residual(const TorsionField& torsion, const DiscGrid& grid) {
  ElResidual res;
  const int n = torsion.codimension();
  const std::size_t interior = grid.boundary_offset();
  const auto boundary = grid.boundary_nodes();
  for (int s = 0; s < n; ++s) {
    for (int t = s + 1; t < n; ++t) {
      const auto a = torsion.t1.component(s, t);
      const auto b = torsion.t2.component(s, t);
      const Partials pa = cartesian_partials(a, grid);
      const Partials pb = cartesian_partials(b, grid);
      for (std::size_t i = 0; i < interior; ++i) {
        res.interior = std::max(res.interior, std::abs(pa.du[i] + pb.dv[i]));
      }
      for (std::size_t k = 0; k < boundary.size(); ++k) {
        const std::size_t i = boundary[k];
        res.boundary =
            std::max(res.boundary, std::abs(a[i] * grid.normal_u(k) + b[i] * grid.normal_v(k)));
      }
    }
  }
  return res;
}

LieAlgebraField torsion_gradient(const TorsionField& torsion, const DiscGrid& grid) {
  const int n = torsion.codimension();
  const std::size_t nodes = grid.node_count();
  const auto w = grid.quad_weights();
  const Eigen::Map<const Eigen::VectorXd> weights(w.data(), static_cast<Eigen::Index>(nodes));
  LieAlgebraField g{MatrixField(nodes, n, n)};
  for (int s = 0; s < n; ++s) {
    for (int t = s + 1; t < n; ++t) {
      const auto a = torsion.t1.component(s, t);
      const auto b = torsion.t2.component(s, t);
      const Eigen::Map<const Eigen::VectorXd> ta(a.data(), static_cast<Eigen::Index>(nodes));
      const Eigen::Map<const Eigen::VectorXd> tb(b.data(), static_cast<Eigen::Index>(nodes));
      const Eigen::VectorXd wa = weights.cwiseProduct(ta);
      const Eigen::VectorXd wb = weights.cwiseProduct(tb);
      const Eigen::VectorXd sum =
          grid.du_operator().transpose() * wa + grid.dv_operator().transpose() * wb;
      auto up = g.a.component(s, t);
      auto down = g.a.component(t, s);
      for (std::size_t i = 0; i < nodes; ++i) {
        up[i] = 2.0 * sum[static_cast<Eigen::Index>(i)] / w[i];
        down[i] = -up[i];
      }
    }
  }
  return g;
}

double lie_inner_product(const LieAlgebraField& a, const LieAlgebraField& b, const DiscGrid& grid) {
  require_same_shape(a.a, b.a, "lie_inner_product");
  ScalarField density(grid.node_count(), 0.0);
  for (int s = 0; s < a.a.rows(); ++s) {
    for (int t = 0; t < a.a.cols(); ++t) {
      const auto x = a.a.component(s, t);
      const auto y = b.a.component(s, t);
      for (std::size_t i = 0; i < density.size(); ++i) density[i] += x[i] * y[i];
    }
  }
  return integrate_disc(density, grid);
}

RotationField exp_field(const LieAlgebraField& a) {
  RotationField r{MatrixField(a.a.node_count(), a.a.rows(), a.a.cols())};
  for (std::size_t i = 0; i < a.a.node_count(); ++i) r.r.set(i, exp_so(a.a.at(i)));
  return r;
}

CoulombResult coulomb_via_neumann(const SurfaceJet& jet, const NormalFrameField& frame,
                                  const DiscGrid& grid) {
  if (jet.codimension != 2 || frame.codimension() != 2) {
    throw GaugeError("Neumann route requires codimension 2");
  }
  const TorsionField seed = torsion_of_frame(frame, grid);
  const auto t_u = seed.t1.component(0, 1);
  const auto t_v = seed.t2.component(0, 1);

  ScalarField f = flux_divergence(t_u, t_v, grid);
  for (double& x : f) x = -x;
  const auto boundary = grid.boundary_nodes();
  ScalarField g(boundary.size());
  for (std::size_t k = 0; k < boundary.size(); ++k) {
    const std::size_t i = boundary[k];
    g[k] = -(t_u[i] * grid.normal_u(k) + t_v[i] * grid.normal_v(k));
  }
  const NeumannSolution sol = solve_poisson_neumann(f, g, grid);

  CoulombResult out;
  out.route = Route::neumann;
  out.rotation = plane_rotation(2, sol.phi);
  out.frame = apply_rotation(frame, out.rotation);
  out.torsion = torsion_of_frame(out.frame, grid);
  out.total_torsion = total_torsion(out.torsion, grid);
  const ElResidual el = el_residual(out.torsion, grid);
  out.el_interior = el.interior;
  out.el_boundary = el.boundary;
  out.iterations = 1;
  out.converged = true;
  out.angle = sol.phi;
  out.compatibility_defect = sol.compatibility_defect;
  out.history.push_back({0, total_torsion(seed, grid), 0.0, 0.0, 0.0});
  const ElResidual seed_el = el_residual(seed, grid);
  out.history[0].el_interior = seed_el.interior;
  out.history[0].el_boundary = seed_el.boundary;
  out.history.push_back({1, out.total_torsion, el.interior, el.boundary, 1.0});
  return out;
}

CoulombResult minimize_total_torsion(const SurfaceJet& jet, const NormalFrameField& frame,
                                     const DiscGrid& grid, const DescentOptions& options) {
  options.validate();
  const int n = frame.codimension();
  if (jet.codimension != n) throw GaugeError("minimize_total_torsion: codimension mismatch");
  const std::size_t nodes = grid.node_count();
  const auto w = grid.quad_weights();

  const TorsionField seed = torsion_of_frame(frame, grid);
  RotationField rotation = options.random_seed
                               ? random_bump_rotation(n, grid, *options.random_seed,
                                                      options.random_amplitude)
                               : RotationField::identity(n, nodes);
  // The iterate is tracked through its torsion; each accepted step applies
  // transform_torsion with the step rotation only, so the gradient below is
  // exact for the functional being decreased.
  TorsionField torsion = options.random_seed ? transform_torsion(seed, rotation, grid) : seed;
  double energy = total_torsion(torsion, grid);

  const Eigen::SparseMatrix<double> hessian = descent_metric(grid);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> preconditioner(hessian);
  if (preconditioner.info() != Eigen::Success) {
    throw GaugeError("minimize_total_torsion: preconditioner factorization failed");
  }

  CoulombResult out;
  out.route = Route::descent;
  out.converged = false;
  double last_step = 0.0;
  int iteration = 0;
  for (;; ++iteration) {
    const ElResidual el = el_residual(torsion, grid);
    out.history.push_back({iteration, energy, el.interior, el.boundary, last_step});
    if (el.interior <= options.el_tolerance && el.boundary <= options.el_tolerance) {
      out.converged = true;
      break;
    }
    if (iteration >= options.max_iterations) break;

    const LieAlgebraField gradient = torsion_gradient(torsion, grid);
    LieAlgebraField direction{MatrixField(nodes, n, n)};
    double slope = 0.0;
    Eigen::VectorXd c(static_cast<Eigen::Index>(nodes));
    for (int s = 0; s < n; ++s) {
      for (int t = s + 1; t < n; ++t) {
        const auto g = gradient.a.component(s, t);
        for (std::size_t i = 0; i < nodes; ++i) {
          c[static_cast<Eigen::Index>(i)] = 2.0 * w[i] * g[i];
        }
        const Eigen::VectorXd p = -preconditioner.solve(c);
        slope += c.dot(p);
        auto up = direction.a.component(s, t);
        auto down = direction.a.component(t, s);
        for (std::size_t i = 0; i < nodes; ++i) {
          up[i] = p[static_cast<Eigen::Index>(i)];
          down[i] = -up[i];
        }
      }
    }
    if (!(slope < 0.0)) {
      out.converged = true;
      break;
    }

    double alpha = options.initial_step;
    bool accepted = false;
    RotationField step;
    TorsionField trial;
    double trial_energy = energy;
    for (int b = 0; b < options.max_backtracks; ++b, alpha *= options.step_shrink) {
      LieAlgebraField scaled{direction.a};
      for (int s = 0; s < n; ++s) {
        for (int t = 0; t < n; ++t) {
          for (double& x : scaled.a.component(s, t)) x *= alpha;
        }
      }
      step = exp_field(scaled);
      trial = transform_torsion(torsion, step, grid);
      trial_energy = total_torsion(trial, grid);
      if (trial_energy <= energy + options.armijo_slope * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No decrease left at working precision.
      out.converged = true;
      break;
    }
    for (std::size_t i = 0; i < nodes; ++i) {
      rotation.r.set(i, step.r.at(i) * rotation.r.at(i));
    }
    const double decrease = energy - trial_energy;
    const double previous = energy;
    torsion = std::move(trial);
    energy = trial_energy;
    last_step = alpha;
    if (decrease <= options.relative_tolerance *
                        std::max(previous, std::numeric_limits<double>::min())) {
      const ElResidual final_el = el_residual(torsion, grid);
      out.history.push_back({iteration + 1, energy, final_el.interior, final_el.boundary, alpha});
      ++iteration;
      out.converged = true;
      break;
    }
  }

  out.iterations = iteration;
  out.rotation = std::move(rotation);
  out.frame = apply_rotation(frame, out.rotation);
  out.torsion = std::move(torsion);
  out.total_torsion = energy;
  out.el_interior = out.history.back().el_interior;
  out.el_boundary = out.history.back().el_boundary;
  return out;
}

TauPotential tau_potential(const TorsionField& torsion, const NormalCurvatureField& curvature,
                           const DiscGrid& grid) {
  const int n = torsion.codimension();
  const std::size_t nodes = grid.node_count();
  TauPotential out{MatrixField(nodes, n, n)};
  const DirichletPoisson solver(grid);
  for (int s = 0; s < n; ++s) {
    for (int t = s + 1; t < n; ++t) {
      const Partials p1 = cartesian_partials(torsion.t1.component(s, t), grid);
      const Partials p2 = cartesian_partials(torsion.t2.component(s, t), grid);
      ScalarField rhs(nodes);
      for (std::size_t i = 0; i < nodes; ++i) rhs[i] = p1.dv[i] - p2.du[i];
      const ScalarField tau = solver.solve(rhs);
      auto up = out.tau.component(s, t);
      auto down = out.tau.component(t, s);
      for (std::size_t i = 0; i < nodes; ++i) {
        up[i] = tau[i];
        down[i] = -tau[i];
      }
    }
  }

  const auto [tau_u, tau_v] = out.tau.partials(grid);
  for (int s = 0; s < n; ++s) {
    for (int t = 0; t < n; ++t) {
      const auto a = tau_u.component(s, t);
      const auto b = tau_v.component(s, t);
      const auto t1 = torsion.t1.component(s, t);
      const auto t2 = torsion.t2.component(s, t);
      for (std::size_t i = 0; i < nodes; ++i) {
        out.residual_gradient = std::max(
            {out.residual_gradient, std::abs(a[i] + t2[i]), std::abs(b[i] - t1[i])});
      }
      const auto tau = out.tau.component(s, t);
      for (const std::size_t i : grid.boundary_nodes()) {
        out.residual_boundary = std::max(out.residual_boundary, std::abs(tau[i]));
      }
    }
  }

  std::vector<ScalarField> laplacians;
  for (int s = 0; s < n; ++s) {
    for (int t = 0; t < n; ++t) laplacians.push_back(apply_laplacian(out.tau.component(s, t), grid));
  }
  for (std::size_t i = 0; i < grid.boundary_offset(); ++i) {
    const SmallMatrix a = tau_u.at(i);
    const SmallMatrix b = tau_v.at(i);
    SmallMatrix lhs = a * b - b * a - curvature.s12.at(i);
    for (int s = 0; s < n; ++s) {
      for (int t = 0; t < n; ++t) lhs(s, t) += laplacians[static_cast<std::size_t>(s * n + t)][i];
    }
    out.residual_poisson = std::max(out.residual_poisson, lhs.cwiseAbs().maxCoeff());
  }
  return out;
}

double apriori_gamma(int n) {
  return std::min(0.25 * std::sqrt(0.5 * n * (n - 1.0)), std::sqrt(2.0));
}

AprioriReport apriori_report(int n, const CoulombResult& result,
                             const NormalCurvatureField& curvature) {
  AprioriReport rep;
  rep.codimension = n;
  rep.total_torsion_min = result.total_torsion;
  rep.curvature_sup = curvature_sup(curvature);
  rep.gamma = apriori_gamma(n);
  rep.lhs = n <= 2 ? 0.0
                   : std::sqrt(n - 2.0) / 4.0 *
                         ((n - 2.0) / (2.0 * std::numbers::pi) * rep.total_torsion_min +
                          rep.gamma * rep.curvature_sup);
  rep.condition_met = rep.lhs < 1.0;
  rep.sup_torsion = std::max(max_frobenius(result.torsion.t1), max_frobenius(result.torsion.t2));
  return rep;
}

RotationField random_smooth_rotation(int n, const DiscGrid& grid, std::uint64_t seed,
                                     double amplitude) {
  std::mt19937_64 rng(seed);
  const SmallMatrix a0 = random_skew(n, rng, amplitude);
  const SmallMatrix a1 = random_skew(n, rng, amplitude);
  const SmallMatrix a2 = random_skew(n, rng, amplitude);
  RotationField r{MatrixField(grid.node_count(), n, n)};
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    r.r.set(i, exp_so(a0 + grid.u(i) * a1 + grid.v(i) * a2));
  }
  return r;
}

RotationField random_bump_rotation(int n, const DiscGrid& grid, std::uint64_t seed,
                                   double amplitude) {
  std::mt19937_64 rng(seed);
  const SmallMatrix a0 = random_skew(n, rng, amplitude);
  RotationField r{MatrixField(grid.node_count(), n, n)};
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    const double q = 1.0 - grid.r(i) * grid.r(i);
    r.r.set(i, exp_so(q * q * a0));
  }
  return r;
}

RotationField plane_rotation(int n, std::span<const double> angle) {
  if (n < 2) throw GaugeError("plane_rotation: codimension must be at least 2");
  RotationField r = RotationField::identity(n, angle.size());
  auto c00 = r.r.component(0, 0);
  auto c01 = r.r.component(0, 1);
  auto c10 = r.r.component(1, 0);
  auto c11 = r.r.component(1, 1);
  for (std::size_t i = 0; i < angle.size(); ++i) {
    const double c = std::cos(angle[i]), s = std::sin(angle[i]);
    c00[i] = c;
    c01[i] = s;
    c10[i] = -s;
    c11[i] = c;
  }
  return r;
}

}  // namespace framelab
