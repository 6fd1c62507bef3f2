#include "lsmclab/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "lsmclab/sorted_file.h"
#include "lsmclab/strutil.h"

namespace lsmclab {

HistogramSummary Histogram::Summary() const {
  HistogramSummary s;
  s.count = samples_.size();
  if (samples_.empty()) return s;
  std::vector<double> sorted = samples_;
  std::sort(sorted.begin(), sorted.end());
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / sorted.size();
  auto rank = [&](double p) {
    size_t r = static_cast<size_t>(std::ceil(p / 100.0 * sorted.size()));
    r = std::clamp<size_t>(r, 1, sorted.size());
    return sorted[r - 1];
  };
  s.p50 = rank(50);
  s.p90 = rank(90);
  s.p99 = rank(99);
  s.p100 = sorted.back();
  return s;
}

double ReadAmp(uint64_t pages_read, uint64_t found_lookups) {
  return static_cast<double>(pages_read) / static_cast<double>(std::max<uint64_t>(found_lookups, 1));
}

namespace {

template <typename Fn>
Status ForEachEntry(const Version& v, Device* device, Fn fn) {
  for (const auto& f : v.AllFiles()) {
    auto image = device->ReadFile(f->name());
    if (!image.ok()) return image.status();
    SortedFileIterator it(std::move(*image), *f);
    for (; it.Valid(); it.Next()) fn(it.entry());
    if (!it.status().ok()) return it.status();
  }
  return Status::OK();
}

}  // namespace

StatusOr<double> MeasureSpaceAmp(const Version& v, Device* device) {
  struct Newest {
    SequenceNumber seq;
    uint64_t size;
    bool put;
  };
  std::unordered_map<std::string, Newest> newest;
  uint64_t total = 0;
  Status s = ForEachEntry(v, device, [&](const EntryView& e) {
    total += e.encoded_size();
    auto [it, inserted] = newest.try_emplace(std::string(e.key), Newest{e.seqnum, e.encoded_size(), !e.is_tombstone()});
    if (!inserted && e.seqnum > it->second.seq) it->second = Newest{e.seqnum, e.encoded_size(), !e.is_tombstone()};
  });
  if (!s.ok()) return s;
  uint64_t valid = 0;
  for (const auto& [k, n] : newest) {
    if (n.put) valid += n.size;
  }
  if (total == 0) return 0.0;
  return static_cast<double>(total - valid) / static_cast<double>(std::max<uint64_t>(valid, 1));
}

StatusOr<uint64_t> ScanTombstones(const Version& v, Device* device) {
  uint64_t n = 0;
  Status s = ForEachEntry(v, device, [&](const EntryView& e) { n += e.is_tombstone() ? 1 : 0; });
  if (!s.ok()) return s;
  return n;
}

void Metrics::RecordCompaction(bool pseudo, uint64_t bytes_read, uint64_t bytes_written,
                               uint64_t entries_dropped, uint64_t tombstones_dropped, double latency) {
  r_.compaction_count++;
  if (pseudo) {
    r_.pseudo_compaction_count++;
  } else {
    r_.bytes_compaction_read += bytes_read;
    r_.bytes_compaction_written += bytes_written;
    r_.entries_dropped += entries_dropped;
    r_.tombstones_dropped += tombstones_dropped;
  }
  compaction_latency_.Add(latency);
}

void Metrics::RecordPointLookup(const LookupIo& io, bool found, double latency) {
  r_.point_lookups++;
  if (found) r_.point_lookups_found++;
  r_.lookup_filter_pages += io.filter_pages;
  r_.lookup_index_pages += io.index_pages;
  r_.lookup_data_pages += io.data_pages;
  r_.lookup_data_page_accesses += io.data_page_accesses;
  point_lookup_latency_.Add(latency);
}

void Metrics::RecordRangeLookup(uint64_t pages, double latency) {
  r_.range_lookups++;
  r_.range_pages += pages;
  range_latency_.Add(latency);
}

MetricsReport Metrics::Report(const Version& v, Tick now, double space_amp) const {
  MetricsReport r = r_;
  r.write_amp = r.unique_bytes_ingested == 0
                    ? 0.0
                    : static_cast<double>(r.bytes_compaction_written) / static_cast<double>(r.unique_bytes_ingested);
  r.read_amp = ReadAmp(r.lookup_filter_pages + r.lookup_index_pages + r.lookup_data_pages, r.point_lookups_found);
  r.space_amp = space_amp;
  r.tombstones_remaining = 0;
  r.max_tombstone_age_ticks = 0;
  for (const auto& f : v.AllFiles()) {
    r.tombstones_remaining += f->tombstone_count;
    if (f->oldest_tombstone_tick && now > *f->oldest_tombstone_tick) {
      r.max_tombstone_age_ticks = std::max<uint64_t>(r.max_tombstone_age_ticks, now - *f->oldest_tombstone_tick);
    }
  }
  r.disk_levels = v.nonempty_level_count();
  r.live_files = v.file_count();
  r.live_bytes = v.total_data_bytes();
  r.compaction_latency = compaction_latency_.Summary();
  r.write_latency = write_latency_.Summary();
  r.point_lookup_latency = point_lookup_latency_.Summary();
  r.range_latency = range_latency_.Summary();
  return r;
}

std::string MetricsReport::ToKeyValue() const {
  std::string out;
  auto u = [&](const char* k, uint64_t v) { out += StringPrintf("%s=%llu\n", k, static_cast<unsigned long long>(v)); };
  auto d = [&](const char* k, double v) { out += StringPrintf("%s=%.6f\n", k, v); };
  auto h = [&](const char* prefix, const HistogramSummary& s) {
    out += StringPrintf("%s_count=%llu\n", prefix, static_cast<unsigned long long>(s.count));
    out += StringPrintf("%s_mean=%.6f\n%s_p50=%.6f\n%s_p90=%.6f\n%s_p99=%.6f\n%s_p100=%.6f\n", prefix, s.mean,
                        prefix, s.p50, prefix, s.p90, prefix, s.p99, prefix, s.p100);
  };
  u("flush_count", flush_count);
  u("bytes_flushed", bytes_flushed);
  u("unique_bytes_ingested", unique_bytes_ingested);
  u("compaction_count", compaction_count);
  u("pseudo_compaction_count", pseudo_compaction_count);
  u("bytes_compaction_read", bytes_compaction_read);
  u("bytes_compaction_written", bytes_compaction_written);
  u("entries_dropped", entries_dropped);
  u("tombstones_dropped", tombstones_dropped);
  u("point_lookups", point_lookups);
  u("point_lookups_found", point_lookups_found);
  u("lookup_filter_pages", lookup_filter_pages);
  u("lookup_index_pages", lookup_index_pages);
  u("lookup_data_pages", lookup_data_pages);
  u("lookup_data_page_accesses", lookup_data_page_accesses);
  u("range_lookups", range_lookups);
  u("range_pages", range_pages);
  d("write_amp", write_amp);
  d("read_amp", read_amp);
  d("space_amp", space_amp);
  u("tombstones_remaining", tombstones_remaining);
  u("max_tombstone_age_ticks", max_tombstone_age_ticks);
  u("disk_levels", static_cast<uint64_t>(disk_levels));
  u("live_files", live_files);
  u("live_bytes", live_bytes);
  h("compaction_latency", compaction_latency);
  h("write_latency", write_latency);
  h("point_lookup_latency", point_lookup_latency);
  h("range_latency", range_latency);
  for (int k = 0; k < kNumBlockKinds; ++k) {
    const char* name = BlockKindName(static_cast<BlockKind>(k));
    out += StringPrintf("cache_%s_hits=%llu\n", name, static_cast<unsigned long long>(cache_hits[k]));
    out += StringPrintf("cache_%s_misses=%llu\n", name, static_cast<unsigned long long>(cache_misses[k]));
  }
  return out;
}

}  // namespace lsmclab
