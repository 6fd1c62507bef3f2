#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lsmclab/block_cache.h"
#include "lsmclab/compaction.h"
#include "lsmclab/device.h"
#include "lsmclab/metrics.h"
#include "lsmclab/options.h"
#include "lsmclab/strategy.h"
#include "lsmclab/version.h"

namespace lsmclab {

struct EngineOptions {
  TreeConfig tree;
  CompactionStrategy strategy;
};

struct LookupResult {
  bool found = false;
  std::string value;
  bool from_buffer = false;
  LookupIo io;
};

using KeyValue = std::pair<std::string, std::string>;

// Single-writer LSM engine. Compactions run inline on the write path.
// Lookup() on a snapshot is safe from several threads at once; everything
// else must be called from one thread.
class Engine {
 public:
  static StatusOr<std::unique_ptr<Engine>> Open(EngineOptions options, std::shared_ptr<Device> device);

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  StatusOr<SequenceNumber> Put(std::string_view key, std::string_view value);
  StatusOr<SequenceNumber> Delete(std::string_view key);
  StatusOr<SequenceNumber> Write(std::string_view key, std::string_view value, EntryKind kind);

  StatusOr<LookupResult> Get(std::string_view key);
  // Live pairs with low <= key < high, ascending.
  StatusOr<std::vector<KeyValue>> Scan(std::string_view low, std::string_view high);

  // Flushes a non-empty buffer, then compacts until no trigger fires.
  Status Flush();
  // Compacts until no trigger fires; returns the number of jobs run.
  StatusOr<int> RunUntilQuiescent();

  // Disk-only lookup against a pinned version. Does not touch the clock or
  // the metrics.
  StatusOr<LookupResult> Lookup(const VersionPtr& v, std::string_view key) const;

  VersionPtr current() const { return manifest_->current(); }
  Tick now() const { return tick_; }
  const CompactionStrategy& strategy() const { return opts_.strategy; }
  const TreeConfig& config() const { return opts_.tree; }
  const Metrics& metrics() const { return metrics_; }
  BlockCache& cache() { return *cache_; }
  const std::shared_ptr<Device>& device() const { return device_; }

  size_t buffer_entries() const { return buffer_.size(); }
  uint64_t buffer_bytes() const { return buffer_bytes_; }

  // Space amplification of the on-disk tree from the incremental key census.
  double SpaceAmp() const;
  MetricsReport Report() const;
  std::string DumpManifest() const;

  // Called after every installed compaction job.
  using CompactionObserver = std::function<void(const CompactionJob&, const CompactionResult&)>;
  void SetCompactionObserver(CompactionObserver fn) { observer_ = std::move(fn); }

 private:
  struct BufferedValue {
    std::string value;
    SequenceNumber seqnum;
    EntryKind kind;
  };

  Engine(EngineOptions options, std::shared_ptr<Device> device, std::unique_ptr<Manifest> manifest);

  Status RebuildCensus();
  StatusOr<uint64_t> FlushBuffer();
  StatusOr<uint64_t> Quiesce(int* jobs);
  Status MaybeRunTimedCompactions();
  void RefreshTimedEvent();
  double Latency(uint64_t pages, std::chrono::steady_clock::time_point start) const;

  template <typename Block>
  StatusOr<std::shared_ptr<const Block>> FetchBlock(const FileMeta& f, BlockKind kind, uint32_t index,
                                                    BlockHandle handle, uint32_t* miss_pages,
                                                    uint32_t* hits) const;
  StatusOr<std::optional<EntryView>> FileGet(const FileMeta& f, std::string_view key, LookupIo* io,
                                             std::shared_ptr<const DataPage>* pin) const;

  EngineOptions opts_;
  std::shared_ptr<Device> device_;
  std::unique_ptr<Manifest> manifest_;
  std::unique_ptr<BlockCache> cache_;
  Metrics metrics_;

  Tick tick_ = 0;
  uint64_t next_file_id_ = 1;
  uint64_t next_run_id_ = 1;
  std::map<std::string, BufferedValue, std::less<>> buffer_;
  uint64_t buffer_bytes_ = 0;

  // Key hash -> size of the newest on-disk Put (0 for a tombstone), with the
  // top bit set once a Put for the key has been flushed.
  std::unordered_map<uint64_t, uint32_t> census_;
  uint64_t census_valid_bytes_ = 0;

  std::optional<Tick> next_timed_event_;
  CompactionObserver observer_;
};

}  // namespace lsmclab
