#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "lsmclab/entry.h"

namespace lsmclab {

class Device;

struct BlockHandle {
  uint64_t offset = 0;
  uint64_t size = 0;

  friend bool operator==(const BlockHandle&, const BlockHandle&) = default;
};

// Metadata of one immutable sorted file. Everything except the access clock
// and the obsolete flag is fixed at creation.
struct FileMeta {
  uint64_t file_id = 0;
  std::string min_key;
  std::string max_key;
  uint64_t entry_count = 0;
  uint64_t tombstone_count = 0;
  // Smallest seqnum (= creation tick) among the file's tombstones.
  std::optional<Tick> oldest_tombstone_tick;
  Tick created_tick = 0;
  // Sum of encoded entry sizes; the unit for level capacities and compaction bytes.
  uint64_t data_bytes = 0;
  // Physical image size including index, filter and footer.
  uint64_t file_size = 0;
  uint32_t num_pages = 0;
  BlockHandle index;
  BlockHandle filter;
  uint32_t filter_probes = 0;

  mutable std::atomic<Tick> last_access_tick{0};
  // Set when a compaction drops the file; the device copy is removed once the
  // last version referencing it is gone.
  mutable std::atomic<bool> obsolete{false};

  FileMeta() = default;
  FileMeta(const FileMeta& o);
  FileMeta& operator=(const FileMeta& o);

  std::string name() const { return FileName(file_id); }
  double tombstone_density() const {
    return entry_count == 0 ? 0.0 : static_cast<double>(tombstone_count) / entry_count;
  }
  bool Overlaps(std::string_view lo, std::string_view hi) const {
    return !(max_key < lo || hi < min_key);
  }

  static std::string FileName(uint64_t file_id);
};

using FileHandle = std::shared_ptr<const FileMeta>;

// Shares ownership of the metadata; deletes the device copy when the handle
// dies after being marked obsolete.
FileHandle MakeFileHandle(FileMeta meta, std::shared_ptr<Device> device);

}  // namespace lsmclab
