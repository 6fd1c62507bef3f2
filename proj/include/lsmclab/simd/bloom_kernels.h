#pragma once

#include <cstdint>
#include <span>

// Bloom filter probe kernels.
//
// A key's 64-bit hash h is split into h1 = low 32 bits and h2 = high 32 bits.
// Probe i tests bit  ((uint64)(h1 + i*h2 mod 2^32) * num_bits) >> 32  of the
// filter, for i in [0, num_probes). Every variant computes exactly this and
// must agree bit-for-bit with the scalar reference.

namespace lsmclab::simd {

struct FilterBits {
  const uint8_t* data = nullptr;
  // Multiple of 64; the byte array holds num_bits / 8 bytes.
  uint32_t num_bits = 0;
  uint32_t num_probes = 0;
};

enum class Isa { kScalar, kAvx2 };

const char* IsaName(Isa isa);

// Highest ISA supported by the running CPU.
Isa DetectIsa();

using ProbeFn = bool (*)(const FilterBits&, uint64_t hash);
using ProbeBatchFn = void (*)(const FilterBits&, std::span<const uint64_t> hashes,
                              std::span<uint8_t> out);

struct BloomKernels {
  Isa isa;
  ProbeFn probe;
  ProbeBatchFn probe_batch;
};

// Kernels for a specific ISA. Requesting an ISA the CPU lacks returns the
// scalar kernels.
const BloomKernels& KernelsFor(Isa isa);

// Kernels chosen once per process: the detected ISA unless the environment
// variable LSMCLAB_SIMD=scalar forces the reference path.
const BloomKernels& ActiveKernels();

namespace scalar {
bool Probe(const FilterBits& f, uint64_t hash);
void ProbeBatch(const FilterBits& f, std::span<const uint64_t> hashes, std::span<uint8_t> out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
bool Probe(const FilterBits& f, uint64_t hash);
void ProbeBatch(const FilterBits& f, std::span<const uint64_t> hashes, std::span<uint8_t> out);
}  // namespace avx2
#endif

}  // namespace lsmclab::simd
