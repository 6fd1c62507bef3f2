#include "lsmclab/bloom.h"

#include <algorithm>
#include <cmath>

#include "lsmclab/hash.h"

namespace lsmclab {

double FilterFalsePositiveRate(double bits_per_key) {
  if (bits_per_key <= 0.0) return 1.0;
  return std::pow(0.6185, bits_per_key);
}

uint32_t FilterProbeCount(double bits_per_key) {
  if (bits_per_key <= 0.0) return 0;
  const double k = std::round(bits_per_key * 0.69314718055994530942);
  return static_cast<uint32_t>(std::clamp(k, 1.0, 30.0));
}

BloomFilterBuilder::BloomFilterBuilder(double bits_per_key)
    : bits_per_key_(bits_per_key), num_probes_(FilterProbeCount(bits_per_key)) {}

void BloomFilterBuilder::AddKey(std::string_view key) { hashes_.push_back(Hash64(key)); }

std::string BloomFilterBuilder::Finish() {
  if (num_probes_ == 0) return {};
  const double want = std::ceil(static_cast<double>(hashes_.size()) * bits_per_key_);
  uint64_t num_bits = std::max<uint64_t>(64, static_cast<uint64_t>(want));
  num_bits = (num_bits + 63) / 64 * 64;

  std::string bits(num_bits / 8, '\0');
  auto* data = reinterpret_cast<uint8_t*>(bits.data());
  const auto nb = static_cast<uint32_t>(num_bits);
  for (uint64_t h : hashes_) {
    const auto h1 = static_cast<uint32_t>(h);
    const auto h2 = static_cast<uint32_t>(h >> 32);
    uint32_t g = h1;
    for (uint32_t i = 0; i < num_probes_; ++i) {
      const auto pos = static_cast<uint32_t>((static_cast<uint64_t>(g) * nb) >> 32);
      data[pos >> 3] |= static_cast<uint8_t>(1u << (pos & 7));
      g += h2;
    }
  }
  hashes_.clear();
  return bits;
}

BloomFilterView::BloomFilterView(std::string_view bits, uint32_t num_probes) {
  if (bits.empty() || num_probes == 0) return;
  bits_.data = reinterpret_cast<const uint8_t*>(bits.data());
  bits_.num_bits = static_cast<uint32_t>(bits.size() * 8);
  bits_.num_probes = num_probes;
}

bool BloomFilterView::MayContain(std::string_view key) const {
  if (empty()) return true;
  return simd::ActiveKernels().probe(bits_, Hash64(key));
}

bool BloomFilterView::MayContainHash(uint64_t hash) const {
  if (empty()) return true;
  return simd::ActiveKernels().probe(bits_, hash);
}

void BloomFilterView::MayContainBatch(std::span<const uint64_t> hashes,
                                      std::span<uint8_t> out) const {
  if (empty()) {
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(hashes.size()), 1);
    return;
  }
  simd::ActiveKernels().probe_batch(bits_, hashes, out);
}

}  // namespace lsmclab
