#include "lsmclab/options.h"

#include <limits>
#include <string>

namespace lsmclab {

uint64_t TreeConfig::capacity_bytes(int level) const {
  uint64_t cap = buffer_bytes;
  for (int i = 0; i < level; ++i) {
    if (cap > std::numeric_limits<uint64_t>::max() / static_cast<uint64_t>(size_ratio)) {
      return std::numeric_limits<uint64_t>::max();
    }
    cap *= static_cast<uint64_t>(size_ratio);
  }
  return cap;
}

Status TreeConfig::Validate() const {
  if (size_ratio < 2) return Status::InvalidArgument("size_ratio must be >= 2");
  if (page_bytes == 0) return Status::InvalidArgument("page_bytes must be > 0");
  if (entry_bytes <= kEntryHeaderBytes) {
    return Status::InvalidArgument("entry_bytes must exceed the entry header");
  }
  if (entry_bytes > page_bytes) return Status::InvalidArgument("entry_bytes larger than a page");
  if (buffer_bytes < page_bytes || buffer_bytes % page_bytes != 0) {
    return Status::InvalidArgument("buffer_bytes must be a positive multiple of page_bytes");
  }
  if (effective_file_bytes() % page_bytes != 0) {
    return Status::InvalidArgument("file_bytes must be an exact multiple of page_bytes");
  }
  if (!(bits_per_key >= 0.0)) return Status::InvalidArgument("bits_per_key must be >= 0");
  if (delete_persistence_threshold && *delete_persistence_threshold == 0) {
    return Status::InvalidArgument("delete persistence threshold must be > 0");
  }
  return Status::OK();
}

}  // namespace lsmclab
