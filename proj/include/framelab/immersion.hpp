#pragma once

// Conformal immersions X : B -> R^(n+2) sampled on the polar grid, normal
// frames over them, and the frame-derived quantities: torsion coefficients,
// second fundamental form, and the normal curvature tensor S_12 computed by
// differentiating the torsion and, independently, from the Ricci equation.

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "framelab/disc_grid.hpp"
#include "framelab/fields.hpp"

namespace framelab {

class ImmersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// X and its first and second partials at one parameter point.
struct SurfacePoint {
  SmallVector x, xu, xv, xuu, xuv, xvv;
};

/// Closed-form surface. Either `seeds` (constant vectors for Gram-Schmidt)
/// or `analytic_frame` (ambient x n matrix of normal columns) supplies the
/// initial normal frame.
struct SurfaceSpec {
  std::string name;
  int codimension = 2;
  std::function<SurfacePoint(double u, double v)> evaluate;
  std::vector<SmallVector> seeds;
  std::function<SmallMatrix(double u, double v)> analytic_frame;
};

struct SurfaceJet {
  int codimension = 0;
  std::vector<SurfacePoint> points;
  /// Conformal factor g11 = g22.
  ScalarField conformal_factor;
  /// max over nodes of max(|g11 - g22|, |g12|) / W.
  double conformality_residual = 0.0;

  int ambient() const { return codimension + 2; }
};

/// Throws ImmersionError if the conformality residual exceeds `tolerance`
/// or W <= 0 somewhere.
SurfaceJet sample_surface(const SurfaceSpec& spec, const DiscGrid& grid, double tolerance = 1e-6);

/// Per-node (n+2) x n matrix whose columns are N_1..N_n.
struct NormalFrameField {
  MatrixField basis;

  int codimension() const { return basis.cols(); }
  std::size_t node_count() const { return basis.node_count(); }
  SmallMatrix at(std::size_t node) const { return basis.at(node); }
};

struct FrameDiagnostics {
  double orthonormality = 0.0;  // max |<N_s, N_t> - delta_st|
  double tangency = 0.0;        // max |<N_s, X_{u^i}>|
  double min_orientation = 0.0;  // min det(X_u, X_v, N_1..N_n)
};

FrameDiagnostics check_frame(const SurfaceJet& jet, const NormalFrameField& frame);

/// Projects the seeds onto the normal spaces and orthonormalizes them in the
/// given order (no pivoting); flips N_n where the orientation is negative.
/// Throws ImmersionError naming the first node whose Gram-Schmidt pivot
/// falls below `min_pivot`.
NormalFrameField seed_normal_frame(const SurfaceJet& jet, std::span<const SmallVector> seeds,
                                   double min_pivot = 1e-6);

/// Samples a closed-form frame and fixes its orientation like
/// seed_normal_frame.
NormalFrameField sample_normal_frame(const SurfaceSpec& spec, const SurfaceJet& jet,
                                     const DiscGrid& grid);

/// Seeds if available, otherwise the analytic frame.
NormalFrameField initial_frame(const SurfaceSpec& spec, const SurfaceJet& jet,
                               const DiscGrid& grid);

/// T_i with (T_i)(s, t) = T^t_{s,i} = <N_{s,u^i}, N_t>; skew per node.
struct TorsionField {
  MatrixField t1;
  MatrixField t2;

  int codimension() const { return t1.rows(); }
};

TorsionField torsion_of_frame(const NormalFrameField& frame, const DiscGrid& grid);

/// L[s] is the per-node symmetric 2x2 matrix L_{s,ij} = <N_s, X_{u^i u^j}>.
struct SecondFundamentalField {
  std::vector<MatrixField> l;
};

SecondFundamentalField second_fundamental(const SurfaceJet& jet, const NormalFrameField& frame);

struct NormalCurvatureField {
  MatrixField s12;
  ScalarField norm;              // Frobenius |S_12| per node
  ScalarField conformal_factor;  // W, for the curvature vector
};

/// S_12 = dT_1/dv - dT_2/du + T_1 T_2 - T_2 T_1.
NormalCurvatureField curvature_from_torsion(const TorsionField& torsion, const SurfaceJet& jet,
                                            const DiscGrid& grid);

/// S_{s,12}^t = sum_k (L_{s,1k} L_{t,2k} - L_{s,2k} L_{t,1k}) / W.
NormalCurvatureField curvature_from_ricci(const SecondFundamentalField& second,
                                          const SurfaceJet& jet);

struct NormalCurvatureVector {
  /// Components 2 S_{s,12}^t / W for s < t, in lexicographic (s, t) order.
  std::vector<ScalarField> components;
  ScalarField squared_length;
};

NormalCurvatureVector normal_curvature_vector(const NormalCurvatureField& curvature);

/// max over nodes, normals and directions of
/// |N_{s,u^i} + sum_jk L_{s,ij} g^{jk} X_{u^k} - sum_t T_{s,i}^t N_t|.
double weingarten_residual(const SurfaceJet& jet, const NormalFrameField& frame,
                           const TorsionField& torsion, const SecondFundamentalField& second,
                           const DiscGrid& grid);

/// sup over nodes of |S_12|.
double curvature_sup(const NormalCurvatureField& curvature);

}  // namespace framelab
