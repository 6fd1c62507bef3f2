#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lsmclab/simd/bloom_kernels.h"

namespace lsmclab {

// Modeled false-positive rate of a standard Bloom filter with the optimal
// probe count: 0.6185^bits_per_key.
double FilterFalsePositiveRate(double bits_per_key);

// Probe count used for a given bits-per-key: round(bpk * ln 2) clamped to
// [1, 30]; 0 when bpk is 0 (no filter).
uint32_t FilterProbeCount(double bits_per_key);

// Accumulates key hashes and emits a raw bit array (no trailer; the probe
// count travels in the file footer).
class BloomFilterBuilder {
 public:
  explicit BloomFilterBuilder(double bits_per_key);

  void AddKey(std::string_view key);
  void AddHash(uint64_t hash) { hashes_.push_back(hash); }
  size_t num_keys() const { return hashes_.size(); }

  uint32_t num_probes() const { return num_probes_; }
  // Empty when bits_per_key is 0.
  std::string Finish();

 private:
  double bits_per_key_;
  uint32_t num_probes_;
  std::vector<uint64_t> hashes_;
};

// Read-only view over a filter block. An empty block means "no filter" and
// answers true for every key.
class BloomFilterView {
 public:
  BloomFilterView() = default;
  BloomFilterView(std::string_view bits, uint32_t num_probes);

  bool MayContain(std::string_view key) const;
  bool MayContainHash(uint64_t hash) const;
  // out[i] = 1 iff hashes[i] may be present.
  void MayContainBatch(std::span<const uint64_t> hashes, std::span<uint8_t> out) const;

  bool empty() const { return bits_.num_bits == 0; }
  uint32_t num_bits() const { return bits_.num_bits; }
  uint32_t num_probes() const { return bits_.num_probes; }

 private:
  simd::FilterBits bits_;
};

}  // namespace lsmclab
