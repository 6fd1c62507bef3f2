#pragma once

#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "lsmclab/sorted_file.h"

namespace lsmclab {

enum class BlockKind : uint8_t { kData = 0, kIndex = 1, kFilter = 2 };
inline constexpr int kNumBlockKinds = 3;

const char* BlockKindName(BlockKind kind);

struct BlockKey {
  uint64_t file_id = 0;
  BlockKind kind = BlockKind::kData;
  uint32_t index = 0;

  friend bool operator==(const BlockKey&, const BlockKey&) = default;
};

struct BlockKeyHash {
  size_t operator()(const BlockKey& k) const {
    uint64_t h = k.file_id * 0x9E3779B97F4A7C15ULL;
    h ^= (uint64_t{k.index} << 2) | static_cast<uint64_t>(k.kind);
    h *= 0xBF58476D1CE4E5B9ULL;
    return static_cast<size_t>(h ^ (h >> 31));
  }
};

// Least-recently-used cache of decoded blocks, bounded by the sum of the raw
// block sizes. A capacity of 0 caches nothing.
class BlockCache {
 public:
  explicit BlockCache(uint64_t capacity_bytes) : capacity_(capacity_bytes) {}

  std::shared_ptr<const CachedBlock> Lookup(const BlockKey& key);
  // Blocks larger than the whole capacity are not admitted.
  void Insert(const BlockKey& key, std::shared_ptr<const CachedBlock> block);
  void EraseFile(uint64_t file_id);
  void Clear();

  uint64_t capacity() const { return capacity_; }
  uint64_t usage() const;
  size_t size() const;

 private:
  struct Node {
    BlockKey key;
    std::shared_ptr<const CachedBlock> block;
    size_t charge;
  };
  using List = std::list<Node>;

  void EvictLocked();

  const uint64_t capacity_;
  mutable std::mutex mu_;
  uint64_t usage_ = 0;
  List lru_;  // front = most recent
  std::unordered_map<BlockKey, List::iterator, BlockKeyHash> map_;
};

}  // namespace lsmclab
