#include "lsmclab/simd/bloom_kernels.h"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#define LSMCLAB_AVX2 __attribute__((target("avx2")))

namespace lsmclab::simd::avx2 {

namespace {

// pos[i] = (g[i] * num_bits) >> 32 for all eight 32-bit lanes.
LSMCLAB_AVX2 inline __m256i BitPositions(__m256i g, __m256i num_bits) {
  const __m256i prod_even = _mm256_mul_epu32(g, num_bits);
  const __m256i prod_odd = _mm256_mul_epu32(_mm256_srli_epi64(g, 32), num_bits);
  return _mm256_blend_epi32(_mm256_srli_epi64(prod_even, 32), prod_odd, 0xAA);
}

// 0xFFFFFFFF in lanes whose bit is set.
LSMCLAB_AVX2 inline __m256i TestBits(const uint8_t* data, __m256i pos, __m256i active) {
  const __m256i word_idx = _mm256_srli_epi32(pos, 5);
  const __m256i shift = _mm256_and_si256(pos, _mm256_set1_epi32(31));
  const __m256i words = _mm256_mask_i32gather_epi32(
      _mm256_setzero_si256(), reinterpret_cast<const int*>(data), word_idx, active, 4);
  const __m256i bits = _mm256_and_si256(_mm256_srlv_epi32(words, shift), _mm256_set1_epi32(1));
  return _mm256_cmpeq_epi32(bits, _mm256_set1_epi32(1));
}

}  // namespace

LSMCLAB_AVX2 bool Probe(const FilterBits& f, uint64_t hash) {
  const __m256i lanes = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
  const __m256i h1 = _mm256_set1_epi32(static_cast<int>(static_cast<uint32_t>(hash)));
  const __m256i h2 = _mm256_set1_epi32(static_cast<int>(static_cast<uint32_t>(hash >> 32)));
  const __m256i nbits = _mm256_set1_epi32(static_cast<int>(f.num_bits));
  const __m256i nprobes = _mm256_set1_epi32(static_cast<int>(f.num_probes));

  for (uint32_t base = 0; base < f.num_probes; base += 8) {
    const __m256i idx = _mm256_add_epi32(lanes, _mm256_set1_epi32(static_cast<int>(base)));
    const __m256i active = _mm256_cmpgt_epi32(nprobes, idx);
    const __m256i g = _mm256_add_epi32(h1, _mm256_mullo_epi32(idx, h2));
    const __m256i set = TestBits(f.data, BitPositions(g, nbits), active);
    const __m256i missing = _mm256_andnot_si256(set, active);
    if (!_mm256_testz_si256(missing, missing)) return false;
  }
  return true;
}

// Eight keys per vector: lane j carries key j's running probe value.
LSMCLAB_AVX2 void ProbeBatch(const FilterBits& f, std::span<const uint64_t> hashes,
                             std::span<uint8_t> out) {
  const __m256i nbits = _mm256_set1_epi32(static_cast<int>(f.num_bits));
  const __m256i all = _mm256_set1_epi32(-1);
  const __m256i split = _mm256_setr_epi32(0, 2, 4, 6, 1, 3, 5, 7);

  size_t i = 0;
  for (; i + 8 <= hashes.size(); i += 8) {
    const __m256i a = _mm256_permutevar8x32_epi32(
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(hashes.data() + i)), split);
    const __m256i b = _mm256_permutevar8x32_epi32(
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(hashes.data() + i + 4)), split);
    __m256i g = _mm256_permute2x128_si256(a, b, 0x20);
    const __m256i h2 = _mm256_permute2x128_si256(a, b, 0x31);

    __m256i alive = all;
    for (uint32_t p = 0; p < f.num_probes; ++p) {
      alive = _mm256_and_si256(alive, TestBits(f.data, BitPositions(g, nbits), alive));
      if (_mm256_testz_si256(alive, alive)) break;
      g = _mm256_add_epi32(g, h2);
    }
    const int mask = _mm256_movemask_ps(_mm256_castsi256_ps(alive));
    for (int j = 0; j < 8; ++j) out[i + j] = static_cast<uint8_t>((mask >> j) & 1);
  }
  for (; i < hashes.size(); ++i) out[i] = scalar::Probe(f, hashes[i]) ? 1 : 0;
}

}  // namespace lsmclab::simd::avx2

#endif
