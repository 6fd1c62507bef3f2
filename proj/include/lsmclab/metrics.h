#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lsmclab/block_cache.h"
#include "lsmclab/device.h"
#include "lsmclab/version.h"

namespace lsmclab {

struct HistogramSummary {
  uint64_t count = 0;
  double mean = 0;
  double p50 = 0;
  double p90 = 0;
  double p99 = 0;
  double p100 = 0;
};

// Keeps every sample; percentiles are exact (nearest rank).
class Histogram {
 public:
  void Add(double v) { samples_.push_back(v); }
  size_t count() const { return samples_.size(); }
  HistogramSummary Summary() const;

 private:
  std::vector<double> samples_;
};

// Page I/O of one point lookup. Counts are cache misses only.
struct LookupIo {
  uint32_t filter_probes = 0;
  uint32_t filter_pages = 0;
  uint32_t index_pages = 0;
  uint32_t data_pages = 0;
  // Data pages fetched (hit or miss); one per filter-positive run.
  uint32_t data_page_accesses = 0;
  std::array<uint32_t, kNumBlockKinds> cache_hits{};
  std::array<uint32_t, kNumBlockKinds> cache_misses{};

  uint32_t total_pages() const { return filter_pages + index_pages + data_pages; }
};

struct MetricsReport {
  uint64_t flush_count = 0;
  uint64_t bytes_flushed = 0;
  uint64_t unique_bytes_ingested = 0;

  uint64_t compaction_count = 0;
  uint64_t pseudo_compaction_count = 0;
  uint64_t bytes_compaction_read = 0;
  uint64_t bytes_compaction_written = 0;
  uint64_t entries_dropped = 0;
  uint64_t tombstones_dropped = 0;

  uint64_t point_lookups = 0;
  uint64_t point_lookups_found = 0;
  uint64_t lookup_filter_pages = 0;
  uint64_t lookup_index_pages = 0;
  uint64_t lookup_data_pages = 0;
  uint64_t lookup_data_page_accesses = 0;
  uint64_t range_lookups = 0;
  uint64_t range_pages = 0;

  double write_amp = 0;
  double read_amp = 0;
  double space_amp = 0;
  uint64_t tombstones_remaining = 0;
  uint64_t max_tombstone_age_ticks = 0;
  int disk_levels = 0;
  uint64_t live_files = 0;
  uint64_t live_bytes = 0;

  HistogramSummary compaction_latency;
  HistogramSummary write_latency;
  HistogramSummary point_lookup_latency;
  HistogramSummary range_latency;

  std::array<uint64_t, kNumBlockKinds> cache_hits{};
  std::array<uint64_t, kNumBlockKinds> cache_misses{};

  // Flat "key=value" lines in a fixed order.
  std::string ToKeyValue() const;
};

// Ratio of page reads for point lookups to the ideal of one page per lookup
// that finds its key (empty lookups ideally read nothing).
double ReadAmp(uint64_t pages_read, uint64_t found_lookups);

// Space amplification by scanning every live file: bytes of shadowed versions
// and tombstones over bytes of the newest live versions.
StatusOr<double> MeasureSpaceAmp(const Version& v, Device* device);

// Tombstone entries across all live files, counted by scanning them.
StatusOr<uint64_t> ScanTombstones(const Version& v, Device* device);

// Event sink fed by the engine. Report() depends only on the recorded events
// and the tree state passed in.
class Metrics {
 public:
  void RecordFlush(uint64_t bytes, uint64_t unique_bytes) {
    r_.flush_count++;
    r_.bytes_flushed += bytes;
    r_.unique_bytes_ingested += unique_bytes;
  }
  void RecordCompaction(bool pseudo, uint64_t bytes_read, uint64_t bytes_written, uint64_t entries_dropped,
                        uint64_t tombstones_dropped, double latency);
  void RecordWrite(double latency) { write_latency_.Add(latency); }
  void RecordPointLookup(const LookupIo& io, bool found, double latency);
  void RecordRangeLookup(uint64_t pages, double latency);
  void RecordCacheAccesses(const LookupIo& io) {
    for (int k = 0; k < kNumBlockKinds; ++k) {
      r_.cache_hits[k] += io.cache_hits[k];
      r_.cache_misses[k] += io.cache_misses[k];
    }
  }

  const MetricsReport& counters() const { return r_; }

  MetricsReport Report(const Version& v, Tick now, double space_amp) const;

 private:
  MetricsReport r_;
  Histogram compaction_latency_;
  Histogram write_latency_;
  Histogram point_lookup_latency_;
  Histogram range_latency_;
};

}  // namespace lsmclab
