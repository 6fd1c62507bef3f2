#include <cstdlib>
#include <cstring>

#include "lsmclab/simd/bloom_kernels.h"

namespace lsmclab::simd {

namespace {

constexpr BloomKernels kScalar{Isa::kScalar, &scalar::Probe, &scalar::ProbeBatch};
#if defined(__x86_64__) || defined(_M_X64)
constexpr BloomKernels kAvx2{Isa::kAvx2, &avx2::Probe, &avx2::ProbeBatch};
#endif

}  // namespace

const char* IsaName(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
  }
  return "unknown";
}

Isa DetectIsa() {
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2")) return Isa::kAvx2;
#endif
  return Isa::kScalar;
}

const BloomKernels& KernelsFor(Isa isa) {
#if defined(__x86_64__) || defined(_M_X64)
  if (isa == Isa::kAvx2 && DetectIsa() == Isa::kAvx2) return kAvx2;
#endif
  (void)isa;
  return kScalar;
}

const BloomKernels& ActiveKernels() {
  static const BloomKernels& kernels = [] () -> const BloomKernels& {
    const char* force = std::getenv("LSMCLAB_SIMD");
    if (force != nullptr && std::strcmp(force, "scalar") == 0) return kScalar;
    return KernelsFor(DetectIsa());
  }();
  return kernels;
}

}  // namespace lsmclab::simd
