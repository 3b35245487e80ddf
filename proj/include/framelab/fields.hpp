#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "framelab/disc_grid.hpp"

namespace framelab {

/// Largest supported ambient dimension n + 2; codimension is capped at 8.
inline constexpr int kMaxAmbient = 10;
inline constexpr int kMaxCodimension = kMaxAmbient - 2;

/// Heap-free dynamic matrix for per-node algebra.
using SmallMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxAmbient, kMaxAmbient>;
using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxAmbient, 1>;

/// A rows x cols matrix per grid node, stored component-major so that every
/// entry (r, c) is one contiguous ScalarField-like span over the nodes.
class MatrixField {
 public:
  MatrixField() = default;
  MatrixField(std::size_t nodes, int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t node_count() const { return nodes_; }

  std::span<double> component(int r, int c) {
    return {data_.data() + offset(r, c), nodes_};
  }
  std::span<const double> component(int r, int c) const {
    return {data_.data() + offset(r, c), nodes_};
  }

  double operator()(std::size_t node, int r, int c) const { return data_[offset(r, c) + node]; }
  double& operator()(std::size_t node, int r, int c) { return data_[offset(r, c) + node]; }

  SmallMatrix at(std::size_t node) const;
  void set(std::size_t node, const SmallMatrix& m);

  /// Entrywise Cartesian partials.
  std::pair<MatrixField, MatrixField> partials(const DiscGrid& grid) const;

 private:
  std::size_t offset(int r, int c) const {
    return (static_cast<std::size_t>(c) * rows_ + r) * nodes_;
  }

  std::size_t nodes_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// Largest per-node Frobenius norm.
double max_frobenius(const MatrixField& f);

/// Largest per-node Frobenius norm of a - b.
double max_frobenius_difference(const MatrixField& a, const MatrixField& b);

/// Per-node |A|^2 = trace(A A^t).
ScalarField squared_norms(const MatrixField& f);

}  // namespace framelab
