#include <atomic>
#include <cstdlib>
#include <string>

#include "framelab/kernels.hpp"

namespace framelab::kernels {
namespace {

Isa probe() {
#if defined(FRAMELAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2")) {
    return Isa::avx2;
  }
#endif
  return Isa::scalar;
}

Isa initial_choice() {
  // FRAMELAB_ISA=scalar pins the reference path (useful for A/B runs).
  if (const char* env = std::getenv("FRAMELAB_ISA"); env != nullptr && std::string(env) == "scalar") {
    return Isa::scalar;
  }
  return probe();
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_choice()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

Isa detected_isa() {
  static const Isa isa = probe();
  return isa;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

Isa select_isa(Isa isa) {
  if (isa == Isa::avx2 && detected_isa() != Isa::avx2) {
    isa = Isa::scalar;
  }
  current().store(isa, std::memory_order_relaxed);
  return isa;
}

const KernelTable& table() {
#if defined(FRAMELAB_HAVE_AVX2)
  if (active_isa() == Isa::avx2) {
    return avx2_table();
  }
#endif
  return scalar_table();
}

}  // namespace framelab::kernels
