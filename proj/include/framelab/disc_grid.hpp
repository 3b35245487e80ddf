#pragma once

// Polar discretization of the closed unit disc.
//
// Nodes sit at r_j = j / n_r (j = 0..n_r) and theta_k = 2 pi k / n_theta with a
// single shared center node. Node 0 is the center; ring j, sector k is node
// 1 + (j - 1) * n_theta + k, so every ring is a contiguous block and the
// boundary ring is the last block.

#include <Eigen/SparseCore>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace framelab {

using ScalarField = std::vector<double>;

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Partials {
  ScalarField du;
  ScalarField dv;
};

class DiscGrid {
 public:
  static constexpr int kMinRings = 8;
  static constexpr int kMinSectors = 16;

  /// Throws GridError for n_r < 8, n_theta < 16 or odd n_theta.
  static DiscGrid build(int n_r, int n_theta);

  int rings() const { return n_r_; }
  int sectors() const { return n_theta_; }
  std::size_t node_count() const { return u_.size(); }
  std::size_t index(int ring, int sector) const {
    return ring == 0 ? 0 : 1 + static_cast<std::size_t>(ring - 1) * n_theta_ + sector;
  }
  /// First node of ring j >= 1.
  std::size_t ring_offset(int ring) const { return index(ring, 0); }

  double radial_step() const { return 1.0 / n_r_; }
  double angular_step() const { return angular_step_; }
  /// h = max(1/n_r, 2 pi / n_theta), the resolution used in error bounds.
  double mesh_size() const;

  double u(std::size_t node) const { return u_[node]; }
  double v(std::size_t node) const { return v_[node]; }
  double r(std::size_t node) const { return r_[node]; }
  double theta(std::size_t node) const { return theta_[node]; }
  int ring_of(std::size_t node) const;
  bool is_boundary(std::size_t node) const { return node >= boundary_offset(); }
  std::size_t boundary_offset() const { return ring_offset(n_r_); }

  std::span<const double> quad_weights() const { return quad_weights_; }
  /// Boundary ring in sector order; boundary_nodes()[k] = index(n_r, k).
  std::span<const std::size_t> boundary_nodes() const { return boundary_nodes_; }
  /// Outward unit normal (cos theta_k, sin theta_k) per boundary node.
  double normal_u(std::size_t sector) const { return cos_theta_[sector]; }
  double normal_v(std::size_t sector) const { return sin_theta_[sector]; }
  std::span<const double> boundary_arc_weights() const { return arc_weights_; }
  std::span<const double> cos_theta() const { return cos_theta_; }
  std::span<const double> sin_theta() const { return sin_theta_; }

  /// Sparse matrices of cartesian_partials (row = output node). Equal to the
  /// stencil path up to rounding; used where the transpose is needed.
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& du_operator() const { return du_; }
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& dv_operator() const { return dv_; }

  ScalarField sample(auto&& fn) const {
    ScalarField out(node_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(u_[i], v_[i]);
    return out;
  }

 private:
  DiscGrid() = default;
  void assemble_derivative_operators();

  int n_r_ = 0;
  int n_theta_ = 0;
  double angular_step_ = 0.0;
  std::vector<double> u_, v_, r_, theta_;
  std::vector<double> quad_weights_;
  std::vector<std::size_t> boundary_nodes_;
  std::vector<double> arc_weights_;
  std::vector<double> cos_theta_, sin_theta_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> du_, dv_;
};

/// Cartesian partials by the chain rule from polar differences. theta:
/// periodic central difference. r: fourth-order central difference up to
/// ring n_r - 2 (the stencil crosses the center onto the opposite sector near
/// the axis), shifted and one-sided fourth-order stencils on ring n_r - 1 and
/// the boundary ring. Center: linear fits over rings 1 and 2 combined by
/// Richardson extrapolation. Overall second order (limited by theta and the
/// center); the radial error has no low-order jumps between stencils, so
/// differentiating a computed derivative again stays second order.
Partials cartesian_partials(std::span<const double> f, const DiscGrid& grid);

/// Polar-cell quadrature of f over the disc.
double integrate_disc(std::span<const double> f, const DiscGrid& grid);

/// Weighted inner product sum_k w_k a_k b_k with the disc quadrature weights.
double inner_product(std::span<const double> a, std::span<const double> b, const DiscGrid& grid);

/// Trapezoid rule on the unit circle; f holds one value per boundary node in
/// sector order.
double integrate_boundary(std::span<const double> f, const DiscGrid& grid);

/// Values of a full field on the boundary ring, in sector order.
ScalarField boundary_values(std::span<const double> f, const DiscGrid& grid);

/// Finite-volume divergence of (F_u, F_v): face fluxes from averaged node
/// values, with the boundary ring's outer face using the nodal normal
/// component. Satisfies sum_k w_k div_k == integrate_boundary(F . nu) to
/// rounding.
ScalarField flux_divergence(std::span<const double> f_u, std::span<const double> f_v,
                            const DiscGrid& grid);

/// Five-point polar Laplacian at interior nodes (center uses the ring-1
/// mean). Boundary entries are left at zero.
ScalarField apply_laplacian(std::span<const double> f, const DiscGrid& grid);

/// Max-norm over a node range, deterministic.
double max_abs(std::span<const double> f);

}  // namespace framelab
