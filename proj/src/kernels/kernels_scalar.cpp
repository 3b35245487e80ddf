#include "framelab/kernels.hpp"

namespace framelab::kernels {
namespace {

void radial_combination(const double* a, const double* b, const double* c, double ca, double cb,
                        double cc, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double ab = ca * a[k] + cb * b[k];
    out[k] = ab + cc * c[k];
  }
}

inline void ring_point(const double* f, const double* f_r, const double* cos_t,
                       const double* sin_t, double inv_r, double inv_2sin, double* f_u,
                       double* f_v, std::size_t k, std::size_t prev, std::size_t next) {
  const double f_theta = (f[next] - f[prev]) * inv_2sin;
  const double tangential = inv_r * f_theta;
  f_u[k] = cos_t[k] * f_r[k] - sin_t[k] * tangential;
  f_v[k] = sin_t[k] * f_r[k] + cos_t[k] * tangential;
}

void ring_gradient(const double* f, const double* f_r, const double* cos_t, const double* sin_t,
                   double inv_r, double inv_2sin, double* f_u, double* f_v, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t prev = k == 0 ? n - 1 : k - 1;
    const std::size_t next = k + 1 == n ? 0 : k + 1;
    ring_point(f, f_r, cos_t, sin_t, inv_r, inv_2sin, f_u, f_v, k, prev, next);
  }
}

double weighted_dot(const double* w, const double* a, const double* b, std::size_t n) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t body = n - n % 4;
  for (std::size_t k = 0; k < body; k += 4) {
    for (std::size_t lane = 0; lane < 4; ++lane) {
      const double wa = w[k + lane] * a[k + lane];
      s[lane] = s[lane] + wa * b[k + lane];
    }
  }
  double total = (s[0] + s[1]) + (s[2] + s[3]);
  for (std::size_t k = body; k < n; ++k) {
    const double wa = w[k] * a[k];
    total = total + wa * b[k];
  }
  return total;
}

double weighted_sum(const double* w, const double* a, std::size_t n) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t body = n - n % 4;
  for (std::size_t k = 0; k < body; k += 4) {
    for (std::size_t lane = 0; lane < 4; ++lane) {
      s[lane] = s[lane] + w[k + lane] * a[k + lane];
    }
  }
  double total = (s[0] + s[1]) + (s[2] + s[3]);
  for (std::size_t k = body; k < n; ++k) {
    total = total + w[k] * a[k];
  }
  return total;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{radial_combination, ring_gradient, weighted_dot, weighted_sum};
  return table;
}

}  // namespace framelab::kernels
