#include "lsmclab/simd/bloom_kernels.h"

namespace lsmclab::simd::scalar {

namespace {

inline uint32_t BitPosition(uint32_t g, uint32_t num_bits) {
  return static_cast<uint32_t>((static_cast<uint64_t>(g) * num_bits) >> 32);
}

inline bool TestBit(const uint8_t* data, uint32_t pos) {
  return (data[pos >> 3] >> (pos & 7)) & 1;
}

}  // namespace

bool Probe(const FilterBits& f, uint64_t hash) {
  const auto h1 = static_cast<uint32_t>(hash);
  const auto h2 = static_cast<uint32_t>(hash >> 32);
  uint32_t g = h1;
  for (uint32_t i = 0; i < f.num_probes; ++i) {
    if (!TestBit(f.data, BitPosition(g, f.num_bits))) return false;
    g += h2;
  }
  return true;
}

void ProbeBatch(const FilterBits& f, std::span<const uint64_t> hashes, std::span<uint8_t> out) {
  for (size_t i = 0; i < hashes.size(); ++i) out[i] = Probe(f, hashes[i]) ? 1 : 0;
}

}  // namespace lsmclab::simd::scalar
