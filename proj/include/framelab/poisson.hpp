#pragma once

// Scalar Poisson problems on the unit disc, finite-volume form of the
// five-point polar Laplacian. Factorizations are built once per grid and
// reused across right-hand sides.

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <memory>
#include <span>
#include <stdexcept>

#include "framelab/disc_grid.hpp"

namespace framelab {

class PoissonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Delta phi = rhs inside, phi = 0 on the boundary ring.
class DirichletPoisson {
 public:
  explicit DirichletPoisson(const DiscGrid& grid);
  ScalarField solve(std::span<const double> rhs) const;

 private:
  const DiscGrid* grid_;
  std::size_t unknowns_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor_;
};

struct NeumannSolution {
  ScalarField phi;
  /// sum_k w_k f_k - sum_boundary ds g before projection.
  double compatibility_defect = 0.0;
  /// True when f was shifted by a constant to restore compatibility.
  bool projected = false;
};

/// Delta phi = f inside, d phi / d nu = g on the boundary, mean(phi) = 0.
class NeumannPoisson {
 public:
  static constexpr double kDefaultCompatibilityTolerance = 1e-6;

  explicit NeumannPoisson(const DiscGrid& grid);

  /// g holds one value per boundary node in sector order. Throws
  /// PoissonError when |defect| > max(tolerance * (||f||_1 + ||g||_1), 1e-14).
  NeumannSolution solve(std::span<const double> f, std::span<const double> g,
                        double compatibility_tolerance = kDefaultCompatibilityTolerance) const;

 private:
  const DiscGrid* grid_;
  Eigen::SparseMatrix<double> stiffness_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> factor_;
};

ScalarField solve_poisson_dirichlet(std::span<const double> rhs, const DiscGrid& grid);

NeumannSolution solve_poisson_neumann(
    std::span<const double> f, std::span<const double> g, const DiscGrid& grid,
    double compatibility_tolerance = NeumannPoisson::kDefaultCompatibilityTolerance);

/// Finite-volume stiffness matrix K (sum of face conductances, symmetric
/// positive semidefinite, constants in the kernel) over all nodes with the
/// half cell on the boundary ring. K phi = -w .* (Delta phi) at interior nodes.
Eigen::SparseMatrix<double> neumann_stiffness(const DiscGrid& grid);

}  // namespace framelab
