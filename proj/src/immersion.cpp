#include "framelab/immersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace framelab {
namespace {

double determinant_with_tangents(const SurfacePoint& p, const SmallMatrix& normals) {
  const int m = static_cast<int>(p.xu.size());
  SmallMatrix full(m, m);
  full.col(0) = p.xu;
  full.col(1) = p.xv;
  full.rightCols(m - 2) = normals;
  return full.determinant();
}

void orient(const SurfaceJet& jet, MatrixField& basis) {
  const int n = basis.cols();
  for (std::size_t i = 0; i < basis.node_count(); ++i) {
    SmallMatrix normals = basis.at(i);
    if (determinant_with_tangents(jet.points[i], normals) < 0.0) {
      normals.col(n - 1) *= -1.0;
      basis.set(i, normals);
    }
  }
}

std::string describe_node(const DiscGrid* grid, std::size_t node) {
  std::ostringstream s;
  s << "node " << node;
  if (grid != nullptr) s << " (u=" << grid->u(node) << ", v=" << grid->v(node) << ")";
  return s.str();
}

}  // namespace

SurfaceJet sample_surface(const SurfaceSpec& spec, const DiscGrid& grid, double tolerance) {
  if (spec.codimension < 1 || spec.codimension > kMaxCodimension) {
    throw ImmersionError("codimension " + std::to_string(spec.codimension) +
                         " outside the supported range 1.." + std::to_string(kMaxCodimension));
  }
  SurfaceJet jet;
  jet.codimension = spec.codimension;
  jet.points.reserve(grid.node_count());
  jet.conformal_factor.resize(grid.node_count());

  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    SurfacePoint p = spec.evaluate(grid.u(i), grid.v(i));
    if (p.xu.size() != jet.ambient()) {
      throw ImmersionError("surface '" + spec.name + "' returned vectors of the wrong dimension");
    }
    const double g11 = p.xu.squaredNorm();
    const double g22 = p.xv.squaredNorm();
    const double g12 = p.xu.dot(p.xv);
    const double w = 0.5 * (g11 + g22);
    if (!(w > 0.0)) {
      std::ostringstream msg;
      msg << "surface '" << spec.name << "' is not immersed at " << describe_node(&grid, i);
      throw ImmersionError(msg.str());
    }
    jet.conformal_factor[i] = w;
    jet.conformality_residual =
        std::max(jet.conformality_residual, std::max(std::abs(g11 - g22), std::abs(g12)) / w);
    jet.points.push_back(std::move(p));
  }
  if (jet.conformality_residual > tolerance) {
    std::ostringstream msg;
    msg << "surface '" << spec.name << "' is not conformal: residual "
        << jet.conformality_residual << " exceeds " << tolerance;
    throw ImmersionError(msg.str());
  }
  return jet;
}

FrameDiagnostics check_frame(const SurfaceJet& jet, const NormalFrameField& frame) {
  FrameDiagnostics d;
  d.min_orientation = std::numeric_limits<double>::infinity();
  const int n = frame.codimension();
  for (std::size_t i = 0; i < frame.node_count(); ++i) {
    const SmallMatrix normals = frame.at(i);
    const SmallMatrix gram = normals.transpose() * normals;
    d.orthonormality = std::max(
        d.orthonormality, (gram - SmallMatrix::Identity(n, n)).cwiseAbs().maxCoeff());
    const SurfacePoint& p = jet.points[i];
    d.tangency = std::max(d.tangency, (normals.transpose() * p.xu).cwiseAbs().maxCoeff());
    d.tangency = std::max(d.tangency, (normals.transpose() * p.xv).cwiseAbs().maxCoeff());
    d.min_orientation = std::min(d.min_orientation, determinant_with_tangents(p, normals));
  }
  return d;
}

NormalFrameField seed_normal_frame(const SurfaceJet& jet, std::span<const SmallVector> seeds,
                                   double min_pivot) {
  const int n = jet.codimension;
  const int m = jet.ambient();
  if (static_cast<int>(seeds.size()) != n) {
    throw ImmersionError("expected " + std::to_string(n) + " seed vectors, got " +
                         std::to_string(seeds.size()));
  }
  NormalFrameField frame{MatrixField(jet.points.size(), m, n)};

  for (std::size_t i = 0; i < jet.points.size(); ++i) {
    const SurfacePoint& p = jet.points[i];
    const SmallVector e1 = p.xu.normalized();
    SmallVector e2 = p.xv - p.xv.dot(e1) * e1;
    e2.normalize();

    SmallMatrix normals(m, n);
    for (int s = 0; s < n; ++s) {
      SmallVector q = seeds[s];
      if (q.size() != m) throw ImmersionError("seed vector has the wrong dimension");
      q -= q.dot(e1) * e1;
      q -= q.dot(e2) * e2;
      for (int t = 0; t < s; ++t) q -= q.dot(normals.col(t)) * normals.col(t);
      const double pivot = q.norm();
      if (pivot < min_pivot) {
        std::ostringstream msg;
        msg << "seed " << s + 1 << " degenerates at " << describe_node(nullptr, i)
            << ": Gram-Schmidt pivot " << pivot << " < " << min_pivot;
        throw ImmersionError(msg.str());
      }
      q /= pivot;
      // One reorthogonalization pass keeps the frame orthonormal to 1e-15.
      q -= q.dot(e1) * e1;
      q -= q.dot(e2) * e2;
      for (int t = 0; t < s; ++t) q -= q.dot(normals.col(t)) * normals.col(t);
      normals.col(s) = q.normalized();
    }
    frame.basis.set(i, normals);
  }
  orient(jet, frame.basis);
  return frame;
}

NormalFrameField sample_normal_frame(const SurfaceSpec& spec, const SurfaceJet& jet,
                                     const DiscGrid& grid) {
  if (!spec.analytic_frame) {
    throw ImmersionError("surface '" + spec.name + "' has no analytic frame");
  }
  NormalFrameField frame{MatrixField(grid.node_count(), jet.ambient(), jet.codimension)};
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    frame.basis.set(i, spec.analytic_frame(grid.u(i), grid.v(i)));
  }
  orient(jet, frame.basis);
  return frame;
}

NormalFrameField initial_frame(const SurfaceSpec& spec, const SurfaceJet& jet,
                               const DiscGrid& grid) {
  if (!spec.seeds.empty()) return seed_normal_frame(jet, spec.seeds);
  return sample_normal_frame(spec, jet, grid);
}

TorsionField torsion_of_frame(const NormalFrameField& frame, const DiscGrid& grid) {
  const int n = frame.codimension();
  const auto [du, dv] = frame.basis.partials(grid);
  TorsionField t{MatrixField(grid.node_count(), n, n), MatrixField(grid.node_count(), n, n)};
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    const SmallMatrix normals = frame.at(i);
    // (F^t N)(s, t) = <dN_s, N_t>; averaging with -(N^t F) makes T skew exactly.
    const SmallMatrix a = du.at(i).transpose() * normals;
    const SmallMatrix b = dv.at(i).transpose() * normals;
    t.t1.set(i, 0.5 * (a - a.transpose()));
    t.t2.set(i, 0.5 * (b - b.transpose()));
  }
  return t;
}

SecondFundamentalField second_fundamental(const SurfaceJet& jet, const NormalFrameField& frame) {
  const int n = frame.codimension();
  SecondFundamentalField out;
  out.l.assign(n, MatrixField(frame.node_count(), 2, 2));
  for (std::size_t i = 0; i < frame.node_count(); ++i) {
    const SurfacePoint& p = jet.points[i];
    const SmallMatrix normals = frame.at(i);
    for (int s = 0; s < n; ++s) {
      const double l11 = normals.col(s).dot(p.xuu);
      const double l12 = normals.col(s).dot(p.xuv);
      const double l22 = normals.col(s).dot(p.xvv);
      out.l[s](i, 0, 0) = l11;
      out.l[s](i, 0, 1) = l12;
      out.l[s](i, 1, 0) = l12;
      out.l[s](i, 1, 1) = l22;
    }
  }
  return out;
}

namespace {

NormalCurvatureField finish_curvature(MatrixField s12, const SurfaceJet& jet) {
  NormalCurvatureField out{std::move(s12), {}, jet.conformal_factor};
  out.norm = squared_norms(out.s12);
  for (double& x : out.norm) x = std::sqrt(x);
  return out;
}

}  // namespace

NormalCurvatureField curvature_from_torsion(const TorsionField& torsion, const SurfaceJet& jet,
                                            const DiscGrid& grid) {
  const int n = torsion.codimension();
  const std::size_t count = grid.node_count();
  MatrixField s(count, n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const Partials p1 = cartesian_partials(torsion.t1.component(a, b), grid);
      const Partials p2 = cartesian_partials(torsion.t2.component(a, b), grid);
      auto out = s.component(a, b);
      for (std::size_t i = 0; i < count; ++i) out[i] = p1.dv[i] - p2.du[i];
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    const SmallMatrix t1 = torsion.t1.at(i);
    const SmallMatrix t2 = torsion.t2.at(i);
    const SmallMatrix commutator = t1 * t2 - t2 * t1;
    s.set(i, s.at(i) + commutator);
  }
  return finish_curvature(std::move(s), jet);
}

NormalCurvatureField curvature_from_ricci(const SecondFundamentalField& second,
                                          const SurfaceJet& jet) {
  const int n = static_cast<int>(second.l.size());
  const std::size_t count = jet.points.size();
  MatrixField s(count, n, n);
  for (std::size_t i = 0; i < count; ++i) {
    const double inv_w = 1.0 / jet.conformal_factor[i];
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        double sum = 0.0;
        for (int k = 0; k < 2; ++k) {
          sum += second.l[a](i, 0, k) * second.l[b](i, 1, k) -
                 second.l[a](i, 1, k) * second.l[b](i, 0, k);
        }
        s(i, a, b) = sum * inv_w;
      }
    }
  }
  return finish_curvature(std::move(s), jet);
}

NormalCurvatureVector normal_curvature_vector(const NormalCurvatureField& curvature) {
  const int n = curvature.s12.rows();
  const std::size_t count = curvature.s12.node_count();
  NormalCurvatureVector out;
  out.squared_length.assign(count, 0.0);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      ScalarField comp(count);
      const auto s = curvature.s12.component(a, b);
      for (std::size_t i = 0; i < count; ++i) {
        comp[i] = 2.0 * s[i] / curvature.conformal_factor[i];
        out.squared_length[i] += comp[i] * comp[i];
      }
      out.components.push_back(std::move(comp));
    }
  }
  return out;
}

double weingarten_residual(const SurfaceJet& jet, const NormalFrameField& frame,
                           const TorsionField& torsion, const SecondFundamentalField& second,
                           const DiscGrid& grid) {
  const int n = frame.codimension();
  const auto [du, dv] = frame.basis.partials(grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    const SurfacePoint& p = jet.points[i];
    const double inv_w = 1.0 / jet.conformal_factor[i];
    const SmallMatrix normals = frame.at(i);
    const SmallMatrix d[2] = {du.at(i), dv.at(i)};
    const SmallMatrix t[2] = {torsion.t1.at(i), torsion.t2.at(i)};
    for (int s = 0; s < n; ++s) {
      for (int dir = 0; dir < 2; ++dir) {
        SmallVector r = d[dir].col(s);
        r += (second.l[s](i, dir, 0) * p.xu + second.l[s](i, dir, 1) * p.xv) * inv_w;
        for (int q = 0; q < n; ++q) r -= t[dir](s, q) * normals.col(q);
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
      }
    }
  }
  return worst;
}

double curvature_sup(const NormalCurvatureField& curvature) {
  return *std::max_element(curvature.norm.begin(), curvature.norm.end());
}

}  // namespace framelab
