#pragma once

// Data-parallel inner loops of the polar discretization.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2 variant. The variants perform the same floating-point
// operations in the same order (no FMA contraction, fixed 4-lane reduction
// order), so results are bit-identical across ISAs.

#include <cstddef>
#include <string_view>

namespace framelab::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Best ISA supported by the running CPU and compiled into the library.
Isa detected_isa();

/// ISA currently used by the dispatching entry points below.
Isa active_isa();

/// Overrides the dispatch choice. Requests for an unavailable ISA fall back
/// to scalar; returns the ISA actually selected.
Isa select_isa(Isa isa);

struct KernelTable {
  // out[k] = (ca * a[k] + cb * b[k]) + cc * c[k]
  void (*radial_combination)(const double* a, const double* b, const double* c, double ca,
                             double cb, double cc, double* out, std::size_t n);

  // Periodic ring derivative plus chain rule. For k in [0, n):
  //   f_theta = (f[k+1] - f[k-1]) * inv_2sin      (indices mod n)
  //   f_u[k]  = cos_t[k] * f_r[k] - sin_t[k] * inv_r * f_theta
  //   f_v[k]  = sin_t[k] * f_r[k] + cos_t[k] * inv_r * f_theta
  void (*ring_gradient)(const double* f, const double* f_r, const double* cos_t,
                        const double* sin_t, double inv_r, double inv_2sin, double* f_u,
                        double* f_v, std::size_t n);

  // sum_k w[k] * a[k] * b[k] in the canonical order: four interleaved
  // partial sums over the largest multiple of 4, combined as
  // (s0 + s1) + (s2 + s3), then the tail added sequentially.
  double (*weighted_dot)(const double* w, const double* a, const double* b, std::size_t n);

  // Same order as weighted_dot with b == 1.
  double (*weighted_sum)(const double* w, const double* a, std::size_t n);
};

const KernelTable& scalar_table();
#if defined(FRAMELAB_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

/// Table for the active ISA.
const KernelTable& table();

}  // namespace framelab::kernels
