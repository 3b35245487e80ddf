#pragma once

#include "framelab/fields.hpp"

namespace framelab {

/// Matrix exponential of a skew-symmetric matrix: closed form for n = 2,
/// Rodrigues for n = 3, scaling and squaring with a diagonal [6/6] Pade
/// approximant for n >= 4. The result is orthogonal to rounding.
SmallMatrix exp_so(const SmallMatrix& a);

/// exp(phi J) with J = [[0, 1], [-1, 0]], i.e. [[cos, sin], [-sin, cos]].
/// Applied to a frame it shifts the torsion T^2_{1,i} by d phi / d u^i.
SmallMatrix rotation_from_angle(double phi);

SmallMatrix skew_part(const SmallMatrix& m);

/// max |R R^t - I| and |det R - 1|.
double orthogonality_defect(const SmallMatrix& r);

}  // namespace framelab
