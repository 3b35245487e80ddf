#include "framelab/so_n.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace framelab {
namespace {

SmallMatrix rodrigues(const SmallMatrix& a) {
  const double theta = std::sqrt(0.5 * a.squaredNorm());
  const SmallMatrix a2 = a * a;
  double c1, c2;
  if (theta < 1e-4) {
    const double t2 = theta * theta;
    c1 = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    c2 = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  } else {
    c1 = std::sin(theta) / theta;
    c2 = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return SmallMatrix::Identity(3, 3) + c1 * a + c2 * a2;
}

SmallMatrix pade_exp(const SmallMatrix& a) {
  static constexpr std::array<double, 7> c = {
      1.0, 1.0 / 2.0, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
  const int n = static_cast<int>(a.rows());
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const SmallMatrix b = a / std::ldexp(1.0, squarings);

  SmallMatrix even = c[0] * SmallMatrix::Identity(n, n);
  SmallMatrix odd = SmallMatrix::Zero(n, n);
  SmallMatrix power = SmallMatrix::Identity(n, n);
  for (int k = 1; k <= 6; ++k) {
    power = power * b;
    if (k % 2 == 0) {
      even += c[k] * power;
    } else {
      odd += c[k] * power;
    }
  }
  SmallMatrix r = (even - odd).partialPivLu().solve(even + odd);
  for (int s = 0; s < squarings; ++s) r = r * r;
  return r;
}

}  // namespace

SmallMatrix exp_so(const SmallMatrix& a) {
  switch (a.rows()) {
    case 1:
      return SmallMatrix::Identity(1, 1);
    case 2:
      return rotation_from_angle(a(0, 1));
    case 3:
      return rodrigues(a);
    default:
      return pade_exp(a);
  }
}

SmallMatrix rotation_from_angle(double phi) {
  SmallMatrix r(2, 2);
  const double c = std::cos(phi), s = std::sin(phi);
  r << c, s, -s, c;
  return r;
}

SmallMatrix skew_part(const SmallMatrix& m) { return 0.5 * (m - m.transpose()); }

double orthogonality_defect(const SmallMatrix& r) {
  const int n = static_cast<int>(r.rows());
  const double orth = (r * r.transpose() - SmallMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  return std::max(orth, std::abs(r.determinant() - 1.0));
}

}  // namespace framelab
