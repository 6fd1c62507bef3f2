#include "lsmclab/file_meta.h"

#include <cstdio>

#include "lsmclab/device.h"

namespace lsmclab {

FileMeta::FileMeta(const FileMeta& o)
    : file_id(o.file_id),
      min_key(o.min_key),
      max_key(o.max_key),
      entry_count(o.entry_count),
      tombstone_count(o.tombstone_count),
      oldest_tombstone_tick(o.oldest_tombstone_tick),
      created_tick(o.created_tick),
      data_bytes(o.data_bytes),
      file_size(o.file_size),
      num_pages(o.num_pages),
      index(o.index),
      filter(o.filter),
      filter_probes(o.filter_probes),
      last_access_tick(o.last_access_tick.load(std::memory_order_relaxed)),
      obsolete(false) {}

FileMeta& FileMeta::operator=(const FileMeta& o) {
  if (this == &o) return *this;
  file_id = o.file_id;
  min_key = o.min_key;
  max_key = o.max_key;
  entry_count = o.entry_count;
  tombstone_count = o.tombstone_count;
  oldest_tombstone_tick = o.oldest_tombstone_tick;
  created_tick = o.created_tick;
  data_bytes = o.data_bytes;
  file_size = o.file_size;
  num_pages = o.num_pages;
  index = o.index;
  filter = o.filter;
  filter_probes = o.filter_probes;
  last_access_tick.store(o.last_access_tick.load(std::memory_order_relaxed));
  obsolete.store(false);
  return *this;
}

std::string FileMeta::FileName(uint64_t file_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%08llu.sst", static_cast<unsigned long long>(file_id));
  return buf;
}

FileHandle MakeFileHandle(FileMeta meta, std::shared_ptr<Device> device) {
  auto* raw = new FileMeta(std::move(meta));
  return FileHandle(raw, [device = std::move(device)](const FileMeta* m) {
    if (m->obsolete.load() && device) device->RemoveFile(m->name());
    delete m;
  });
}

}  // namespace lsmclab
