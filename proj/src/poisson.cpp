#include "framelab/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace framelab {
namespace {

using Triplet = Eigen::Triplet<double>;

// Face conductances of the polar finite-volume cells. `limit` restricts the
// assembly to nodes below it (Dirichlet drops the boundary ring).
std::vector<Triplet> conductances(const DiscGrid& grid, std::size_t limit) {
  const int n_r = grid.rings();
  const int n = grid.sectors();
  const double h = grid.radial_step();
  const double dt = grid.angular_step();
  std::vector<Triplet> t;
  t.reserve(limit * 5 + n);

  auto link = [&](std::size_t a, std::size_t b, double c) {
    if (a < limit) t.emplace_back(a, a, c);
    if (b < limit) t.emplace_back(b, b, c);
    if (a < limit && b < limit) {
      t.emplace_back(a, b, -c);
      t.emplace_back(b, a, -c);
    }
  };

  for (int j = 0; j < n_r; ++j) {
    const double c = (j + 0.5) * dt;  // r_{j+1/2} * dt / h
    for (int k = 0; k < n; ++k) link(grid.index(j, k), grid.index(j + 1, k), c);
  }
  for (int j = 1; j <= n_r; ++j) {
    const double c = (j < n_r ? h : 0.5 * h) / (j * h * dt);
    for (int k = 0; k < n; ++k) link(grid.index(j, k), grid.index(j, (k + 1) % n), c);
  }
  return t;
}

}  // namespace

Eigen::SparseMatrix<double> neumann_stiffness(const DiscGrid& grid) {
  const auto t = conductances(grid, grid.node_count());
  Eigen::SparseMatrix<double> k(grid.node_count(), grid.node_count());
  k.setFromTriplets(t.begin(), t.end());
  return k;
}

DirichletPoisson::DirichletPoisson(const DiscGrid& grid)
    : grid_(&grid), unknowns_(grid.boundary_offset()) {
  const auto t = conductances(grid, unknowns_);
  Eigen::SparseMatrix<double> k(unknowns_, unknowns_);
  k.setFromTriplets(t.begin(), t.end());
  factor_.compute(k);
  if (factor_.info() != Eigen::Success) {
    throw PoissonError("Dirichlet stiffness factorization failed");
  }
}

ScalarField DirichletPoisson::solve(std::span<const double> rhs) const {
  const DiscGrid& g = *grid_;
  if (rhs.size() != g.node_count()) throw GridError("rhs size does not match grid");
  const auto w = g.quad_weights();
  Eigen::VectorXd b(unknowns_);
  for (std::size_t i = 0; i < unknowns_; ++i) b[i] = -w[i] * rhs[i];
  const Eigen::VectorXd x = factor_.solve(b);
  if (factor_.info() != Eigen::Success) throw PoissonError("Dirichlet solve failed");

  ScalarField phi(g.node_count(), 0.0);
  for (std::size_t i = 0; i < unknowns_; ++i) phi[i] = x[i];

  const ScalarField lap = apply_laplacian(phi, g);
  double residual = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < unknowns_; ++i) {
    residual = std::max(residual, std::abs(lap[i] - rhs[i]));
    scale = std::max(scale, std::abs(rhs[i]));
  }
  // Rounding in the 1/h^2 stencil dominates for tiny right-hand sides.
  const double h = g.radial_step();
  const double floor = 1e-12 * max_abs(phi) / (h * h);
  if (residual > 1e-10 * scale + floor) {
    std::ostringstream msg;
    msg << "Dirichlet solve did not converge: residual " << residual << " for |rhs| " << scale;
    throw PoissonError(msg.str());
  }
  return phi;
}

NeumannPoisson::NeumannPoisson(const DiscGrid& grid)
    : grid_(&grid), stiffness_(neumann_stiffness(grid)) {
  // Bordered system [K w; w^T 0] pins the constant mode by mean(phi) = 0.
  const std::size_t count = grid.node_count();
  const auto w = grid.quad_weights();
  std::vector<Triplet> t;
  t.reserve(stiffness_.nonZeros() + 2 * count);
  for (int col = 0; col < stiffness_.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness_, col); it; ++it) {
      t.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    t.emplace_back(i, count, w[i]);
    t.emplace_back(count, i, w[i]);
  }
  Eigen::SparseMatrix<double> bordered(count + 1, count + 1);
  bordered.setFromTriplets(t.begin(), t.end());
  bordered.makeCompressed();
  factor_.analyzePattern(bordered);
  factor_.factorize(bordered);
  if (factor_.info() != Eigen::Success) {
    throw PoissonError("Neumann bordered system factorization failed");
  }
}

NeumannSolution NeumannPoisson::solve(std::span<const double> f, std::span<const double> g,
                                      double compatibility_tolerance) const {
  const DiscGrid& grid = *grid_;
  const std::size_t count = grid.node_count();
  if (f.size() != count) throw GridError("rhs size does not match grid");
  if (g.size() != static_cast<std::size_t>(grid.sectors())) {
    throw GridError("Neumann data must have one value per boundary node");
  }
  const auto w = grid.quad_weights();
  const auto ds = grid.boundary_arc_weights();

  NeumannSolution out;
  double f_l1 = 0.0, g_l1 = 0.0;
  for (std::size_t i = 0; i < count; ++i) f_l1 += w[i] * std::abs(f[i]);
  for (std::size_t k = 0; k < g.size(); ++k) g_l1 += ds[k] * std::abs(g[k]);
  out.compatibility_defect = integrate_disc(f, grid) - integrate_boundary(g, grid);
  // The absolute floor admits rounding-level defects of all-zero data.
  const double allowed = std::max(compatibility_tolerance * (f_l1 + g_l1), 1e-14);
  if (std::abs(out.compatibility_defect) > allowed) {
    std::ostringstream msg;
    msg << "Neumann data incompatible: integral of f minus boundary integral of g = "
        << out.compatibility_defect << " exceeds tolerance " << allowed;
    throw PoissonError(msg.str());
  }
  const double shift = out.compatibility_defect / std::numbers::pi;
  out.projected = out.compatibility_defect != 0.0;

  Eigen::VectorXd b = Eigen::VectorXd::Zero(count + 1);
  for (std::size_t i = 0; i < count; ++i) b[i] = -w[i] * (f[i] - shift);
  const std::size_t boundary = grid.boundary_offset();
  for (std::size_t k = 0; k < g.size(); ++k) b[boundary + k] += ds[k] * g[k];

  const Eigen::VectorXd x = factor_.solve(b);
  if (factor_.info() != Eigen::Success) throw PoissonError("Neumann solve failed");

  out.phi.assign(x.data(), x.data() + count);

  Eigen::Map<const Eigen::VectorXd> phi(out.phi.data(), count);
  const Eigen::VectorXd residual = stiffness_ * phi - b.head(count);
  const double scale = b.head(count).cwiseAbs().maxCoeff();
  if (residual.cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1e-300) &&
      residual.cwiseAbs().maxCoeff() > 1e-14) {
    throw PoissonError("Neumann solve did not converge");
  }
  return out;
}

ScalarField solve_poisson_dirichlet(std::span<const double> rhs, const DiscGrid& grid) {
  return DirichletPoisson(grid).solve(rhs);
}

NeumannSolution solve_poisson_neumann(std::span<const double> f, std::span<const double> g,
                                      const DiscGrid& grid, double compatibility_tolerance) {
  return NeumannPoisson(grid).solve(f, g, compatibility_tolerance);
}

}  // namespace framelab
