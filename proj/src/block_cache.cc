#include "lsmclab/block_cache.h"

namespace lsmclab {

const char* BlockKindName(BlockKind kind) {
  switch (kind) {
    case BlockKind::kData: return "data";
    case BlockKind::kIndex: return "index";
    case BlockKind::kFilter: return "filter";
  }
  return "?";
}

std::shared_ptr<const CachedBlock> BlockCache::Lookup(const BlockKey& key) {
  std::lock_guard<std::mutex> l(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) return nullptr;
  lru_.splice(lru_.begin(), lru_, it->second);
  return it->second->block;
}

void BlockCache::Insert(const BlockKey& key, std::shared_ptr<const CachedBlock> block) {
  const size_t charge = block->charge();
  std::lock_guard<std::mutex> l(mu_);
  if (charge > capacity_) return;
  auto it = map_.find(key);
  if (it != map_.end()) {
    usage_ -= it->second->charge;
    lru_.erase(it->second);
    map_.erase(it);
  }
  lru_.push_front(Node{key, std::move(block), charge});
  map_[key] = lru_.begin();
  usage_ += charge;
  EvictLocked();
}

void BlockCache::EvictLocked() {
  while (usage_ > capacity_ && !lru_.empty()) {
    const Node& victim = lru_.back();
    usage_ -= victim.charge;
    map_.erase(victim.key);
    lru_.pop_back();
  }
}

void BlockCache::EraseFile(uint64_t file_id) {
  std::lock_guard<std::mutex> l(mu_);
  for (auto it = lru_.begin(); it != lru_.end();) {
    if (it->key.file_id == file_id) {
      usage_ -= it->charge;
      map_.erase(it->key);
      it = lru_.erase(it);
    } else {
      ++it;
    }
  }
}

void BlockCache::Clear() {
  std::lock_guard<std::mutex> l(mu_);
  lru_.clear();
  map_.clear();
  usage_ = 0;
}

uint64_t BlockCache::usage() const {
  std::lock_guard<std::mutex> l(mu_);
  return usage_;
}

size_t BlockCache::size() const {
  std::lock_guard<std::mutex> l(mu_);
  return map_.size();
}

}  // namespace lsmclab
