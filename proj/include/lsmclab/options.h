#pragma once

#include <cstdint>
#include <optional>

#include "lsmclab/entry.h"
#include "lsmclab/status.h"

namespace lsmclab {

inline constexpr uint64_t kKiB = 1024;
inline constexpr uint64_t kMiB = 1024 * 1024;

// Shape of the tree. Level i (1-based, on disk) has capacity
// buffer_bytes * size_ratio^i.
struct TreeConfig {
  int size_ratio = 10;
  uint64_t buffer_bytes = 8 * kMiB;
  uint32_t page_bytes = 16 * kKiB;
  // Nominal encoded entry size; fixes entries per page.
  uint32_t entry_bytes = 128;
  double bits_per_key = 10.0;
  uint64_t block_cache_bytes = 8 * kMiB;
  // 0 means "same as buffer_bytes".
  uint64_t file_bytes = 0;
  // Delete persistence threshold in ticks, used by tombstone-TTL triggers.
  std::optional<Tick> delete_persistence_threshold;

  // Verify manifest invariants after every compaction job.
  bool paranoid_checks = false;
  // Latency histograms in microseconds instead of page I/Os.
  bool wall_clock = false;

  uint64_t effective_file_bytes() const { return file_bytes == 0 ? buffer_bytes : file_bytes; }
  uint32_t entries_per_page() const { return page_bytes / entry_bytes; }
  uint64_t pages_per_buffer() const { return buffer_bytes / page_bytes; }
  uint64_t pages_per_file() const { return effective_file_bytes() / page_bytes; }
  uint64_t entries_per_file() const { return pages_per_file() * entries_per_page(); }
  uint64_t entries_per_buffer() const { return pages_per_buffer() * entries_per_page(); }

  // M * T^level; saturates at UINT64_MAX.
  uint64_t capacity_bytes(int level) const;

  Status Validate() const;
};

}  // namespace lsmclab
