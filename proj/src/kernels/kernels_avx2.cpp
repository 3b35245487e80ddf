#include <immintrin.h>

#include "framelab/kernels.hpp"

namespace framelab::kernels {
namespace {

void radial_combination(const double* a, const double* b, const double* c, double ca, double cb,
                        double cc, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(ca);
  const __m256d vb = _mm256_set1_pd(cb);
  const __m256d vc = _mm256_set1_pd(cc);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d ab = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(a + k)),
                                     _mm256_mul_pd(vb, _mm256_loadu_pd(b + k)));
    _mm256_storeu_pd(out + k, _mm256_add_pd(ab, _mm256_mul_pd(vc, _mm256_loadu_pd(c + k))));
  }
  for (; k < n; ++k) {
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
  if (n < 6) {
    for (std::size_t k = 0; k < n; ++k) {
      ring_point(f, f_r, cos_t, sin_t, inv_r, inv_2sin, f_u, f_v, k, k == 0 ? n - 1 : k - 1,
                 k + 1 == n ? 0 : k + 1);
    }
    return;
  }
  ring_point(f, f_r, cos_t, sin_t, inv_r, inv_2sin, f_u, f_v, 0, n - 1, 1);

  const __m256d vinv_2sin = _mm256_set1_pd(inv_2sin);
  const __m256d vinv_r = _mm256_set1_pd(inv_r);
  std::size_t k = 1;
  for (; k + 4 <= n - 1; k += 4) {
    const __m256d f_theta = _mm256_mul_pd(
        _mm256_sub_pd(_mm256_loadu_pd(f + k + 1), _mm256_loadu_pd(f + k - 1)), vinv_2sin);
    const __m256d tangential = _mm256_mul_pd(vinv_r, f_theta);
    const __m256d c = _mm256_loadu_pd(cos_t + k);
    const __m256d s = _mm256_loadu_pd(sin_t + k);
    const __m256d fr = _mm256_loadu_pd(f_r + k);
    _mm256_storeu_pd(f_u + k, _mm256_sub_pd(_mm256_mul_pd(c, fr), _mm256_mul_pd(s, tangential)));
    _mm256_storeu_pd(f_v + k, _mm256_add_pd(_mm256_mul_pd(s, fr), _mm256_mul_pd(c, tangential)));
  }
  for (; k < n - 1; ++k) {
    ring_point(f, f_r, cos_t, sin_t, inv_r, inv_2sin, f_u, f_v, k, k - 1, k + 1);
  }
  ring_point(f, f_r, cos_t, sin_t, inv_r, inv_2sin, f_u, f_v, n - 1, n - 2, 0);
}

inline double reduce_lanes(__m256d acc) {
  alignas(32) double s[4];
  _mm256_store_pd(s, acc);
  return (s[0] + s[1]) + (s[2] + s[3]);
}

double weighted_dot(const double* w, const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t body = n - n % 4;
  for (std::size_t k = 0; k < body; k += 4) {
    const __m256d wa = _mm256_mul_pd(_mm256_loadu_pd(w + k), _mm256_loadu_pd(a + k));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(wa, _mm256_loadu_pd(b + k)));
  }
  double total = reduce_lanes(acc);
  for (std::size_t k = body; k < n; ++k) {
    const double wa = w[k] * a[k];
    total = total + wa * b[k];
  }
  return total;
}

double weighted_sum(const double* w, const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t body = n - n % 4;
  for (std::size_t k = 0; k < body; k += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + k), _mm256_loadu_pd(a + k)));
  }
  double total = reduce_lanes(acc);
  for (std::size_t k = body; k < n; ++k) {
    total = total + w[k] * a[k];
  }
  return total;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{radial_combination, ring_gradient, weighted_dot, weighted_sum};
  return table;
}

}  // namespace framelab::kernels
