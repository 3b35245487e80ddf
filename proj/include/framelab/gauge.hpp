#pragma once

// Gauge freedom in the normal bundle: rotation fields acting on normal
// frames, the total torsion functional, its Euler-Lagrange residuals and
// gradient, the two Coulomb-frame constructions (Neumann problem for
// codimension 2, descent over rotation fields for any codimension), the
// torsion potential tau, and the smallness-condition report.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "framelab/disc_grid.hpp"
#include "framelab/fields.hpp"
#include "framelab/immersion.hpp"

namespace framelab {

class GaugeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-node R in SO(n); the frame it produces is N_s = sum_t R_s^t N~_t.
struct RotationField {
  MatrixField r;

  static RotationField identity(int n, std::size_t nodes);
  int dimension() const { return r.rows(); }
};

/// Per-node skew matrix (a variation or descent direction).
struct LieAlgebraField {
  MatrixField a;
};

enum class Route { neumann, descent };

const char* route_name(Route route);

struct ElResidual {
  double interior = 0.0;  // max |div(T_1, T_2)| off the boundary ring
  double boundary = 0.0;  // max |<(T_1, T_2), nu>| on the boundary ring
};

struct HistoryRecord {
  int iteration = 0;
  double total_torsion = 0.0;
  double el_interior = 0.0;
  double el_boundary = 0.0;
  double step = 0.0;
};

struct CoulombResult {
  NormalFrameField frame;
  RotationField rotation;  // relative to the input frame
  TorsionField torsion;
  double total_torsion = 0.0;
  double el_interior = 0.0;
  double el_boundary = 0.0;
  int iterations = 0;
  Route route = Route::descent;
  bool converged = true;
  std::vector<HistoryRecord> history;
  ScalarField angle;                  // Neumann route: rotation angle phi
  double compatibility_defect = 0.0;  // Neumann route
};

struct DescentOptions {
  int max_iterations = 200;
  double initial_step = 1.0;
  double armijo_slope = 1e-4;
  double step_shrink = 0.5;
  int max_backtracks = 40;
  /// Stop once both Euler-Lagrange residuals fall below this.
  double el_tolerance = 1e-8;
  /// Stop once an accepted step lowers T by less than this fraction.
  double relative_tolerance = 1e-12;
  /// Start from a random smooth rotation field instead of the identity.
  std::optional<std::uint64_t> random_seed;
  double random_amplitude = 1.0;

  /// Throws GaugeError unless all entries are positive and the Armijo
  /// factor and shrink factor lie in (0, 1).
  void validate() const;
};

struct TauPotential {
  MatrixField tau;
  double residual_gradient = 0.0;
  double residual_boundary = 0.0;
  double residual_poisson = 0.0;
};

struct AprioriReport {
  int codimension = 0;
  double total_torsion_min = 0.0;  // best total torsion found
  double curvature_sup = 0.0;      // S_0 = sup |S_12|
  double gamma = 0.0;
  double lhs = 0.0;
  bool condition_met = false;
  double sup_torsion = 0.0;  // max_i sup |T_i|
};

NormalFrameField apply_rotation(const NormalFrameField& frame, const RotationField& rotation);

/// T_i = skew(dR/du^i R^t) + R T~_i R^t, derivatives by cartesian_partials.
TorsionField transform_torsion(const TorsionField& torsion, const RotationField& rotation,
                               const DiscGrid& grid);

/// Quadrature of |T_1|^2 + |T_2|^2 (sum over ordered index pairs).
double total_torsion(const TorsionField& torsion, const DiscGrid& grid);

ElResidual el_residual(const TorsionField& torsion, const DiscGrid& grid);

/// Gradient of the total torsion with respect to left variations
/// exp(eps A) of the frame: for every skew field A,
///   d/d eps total_torsion(transform_torsion(T, exp(eps A))) at 0
///     = sum_k w_k <G_k, A_k>.
/// G = 2 (D_u^t W T_1 + D_v^t W T_2) / w, the transpose of the discrete
/// derivative, i.e. -2 div T inside plus a boundary flux term.
LieAlgebraField torsion_gradient(const TorsionField& torsion, const DiscGrid& grid);

/// sum_k w_k <A_k, B_k>.
double lie_inner_product(const LieAlgebraField& a, const LieAlgebraField& b, const DiscGrid& grid);

/// Pointwise exp of a skew field.
RotationField exp_field(const LieAlgebraField& a);

/// Codimension 2: solves the Neumann problem for the rotation angle and
/// rotates the frame. Throws GaugeError for other codimensions.
CoulombResult coulomb_via_neumann(const SurfaceJet& jet, const NormalFrameField& frame,
                                  const DiscGrid& grid);

/// Descent on rotation fields with Armijo backtracking. Each step is the
/// torsion gradient preconditioned per skew entry by the fixed metric
/// 4 (D_u^t W D_u + D_v^t W D_v) + delta W and applied as R <- exp(alpha P) R.
/// The iterate's torsion is updated with transform_torsion by the step
/// rotation alone. Stops on the EL tolerance, on relative stagnation, when
/// no Armijo step exists at working precision, or at max_iterations (then
/// converged = false).
CoulombResult minimize_total_torsion(const SurfaceJet& jet, const NormalFrameField& frame,
                                     const DiscGrid& grid, const DescentOptions& options = {});

/// Solves Delta tau = dT_1/dv - dT_2/du with tau = 0 on the boundary and
/// reports how well tau satisfies grad tau = (-T_2, T_1) and the nonlinear
/// system Delta tau + tau_u tau_v - tau_v tau_u = S_12.
TauPotential tau_potential(const TorsionField& torsion, const NormalCurvatureField& curvature,
                           const DiscGrid& grid);

/// gamma(n) = min{ sqrt(n (n - 1) / 2) / 4, sqrt 2 }.
double apriori_gamma(int n);

AprioriReport apriori_report(int n, const CoulombResult& result,
                             const NormalCurvatureField& curvature);

/// R = exp(A_0 + u A_1 + v A_2) with A_i skew, entries uniform in
/// [-amplitude, amplitude]. Deterministic for a given seed.
RotationField random_smooth_rotation(int n, const DiscGrid& grid, std::uint64_t seed,
                                     double amplitude = 1.0);

/// R = exp(b(r) A_0) with a random skew A_0 and the radial bump
/// b(r) = (1 - r^2)^2; descent initialization.
RotationField random_bump_rotation(int n, const DiscGrid& grid, std::uint64_t seed,
                                   double amplitude = 1.0);

/// Rotation by angle phi in the (N_1, N_2) plane, identity elsewhere.
RotationField plane_rotation(int n, std::span<const double> angle);

}  // namespace framelab
