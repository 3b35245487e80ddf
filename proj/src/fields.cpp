#include "framelab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace framelab {

MatrixField::MatrixField(std::size_t nodes, int rows, int cols)
    : nodes_(nodes), rows_(rows), cols_(cols),
      data_(nodes * static_cast<std::size_t>(rows) * cols, 0.0) {
  if (rows > kMaxAmbient || cols > kMaxAmbient) {
    throw std::invalid_argument("matrix field dimensions exceed the supported maximum");
  }
}

SmallMatrix MatrixField::at(std::size_t node) const {
  SmallMatrix m(rows_, cols_);
  for (int c = 0; c < cols_; ++c)
    for (int r = 0; r < rows_; ++r) m(r, c) = data_[offset(r, c) + node];
  return m;
}

void MatrixField::set(std::size_t node, const SmallMatrix& m) {
  for (int c = 0; c < cols_; ++c)
    for (int r = 0; r < rows_; ++r) data_[offset(r, c) + node] = m(r, c);
}

std::pair<MatrixField, MatrixField> MatrixField::partials(const DiscGrid& grid) const {
  MatrixField du(nodes_, rows_, cols_), dv(nodes_, rows_, cols_);
  for (int c = 0; c < cols_; ++c) {
    for (int r = 0; r < rows_; ++r) {
      const Partials p = cartesian_partials(component(r, c), grid);
      std::copy(p.du.begin(), p.du.end(), du.component(r, c).begin());
      std::copy(p.dv.begin(), p.dv.end(), dv.component(r, c).begin());
    }
  }
  return {std::move(du), std::move(dv)};
}

ScalarField squared_norms(const MatrixField& f) {
  ScalarField out(f.node_count(), 0.0);
  for (int c = 0; c < f.cols(); ++c) {
    for (int r = 0; r < f.rows(); ++r) {
      const auto comp = f.component(r, c);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += comp[i] * comp[i];
    }
  }
  return out;
}

double max_frobenius(const MatrixField& f) {
  const ScalarField sq = squared_norms(f);
  return std::sqrt(*std::max_element(sq.begin(), sq.end()));
}

double max_frobenius_difference(const MatrixField& a, const MatrixField& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.node_count() != b.node_count()) {
    throw std::invalid_argument("matrix field shapes differ");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.node_count(); ++i) {
    worst = std::max(worst, (a.at(i) - b.at(i)).norm());
  }
  return worst;
}

}  // namespace framelab
