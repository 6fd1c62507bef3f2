#include "lsmclab/engine.h"

#include <algorithm>
#include <queue>
#include <sstream>
#include <unordered_set>

#include "lsmclab/hash.h"
#include "lsmclab/sorted_file.h"

namespace lsmclab {

namespace {

constexpr uint32_t kCensusPutSeen = 1u << 31;

uint32_t PagesOf(uint64_t bytes, uint32_t page_bytes) {
  return static_cast<uint32_t>((bytes + page_bytes - 1) / page_bytes);
}

}  // namespace

StatusOr<std::unique_ptr<Engine>> Engine::Open(EngineOptions options, std::shared_ptr<Device> device) {
  LSMCLAB_RETURN_IF_ERROR(options.tree.Validate());
  LSMCLAB_RETURN_IF_ERROR(options.strategy.Validate());
  if (!device) return Status::InvalidArgument("no device");
  auto manifest = Manifest::Open(device);
  if (!manifest.ok()) return manifest.status();
  std::unique_ptr<Engine> e(new Engine(std::move(options), std::move(device), std::move(*manifest)));
  LSMCLAB_RETURN_IF_ERROR(e->RebuildCensus());
  e->RefreshTimedEvent();
  return e;
}

Engine::Engine(EngineOptions options, std::shared_ptr<Device> device, std::unique_ptr<Manifest> manifest)
    : opts_(std::move(options)),
      device_(std::move(device)),
      manifest_(std::move(manifest)),
      cache_(std::make_unique<BlockCache>(opts_.tree.block_cache_bytes)) {
  const ManifestState& st = manifest_->state();
  tick_ = st.tick;
  next_file_id_ = st.next_file_id;
  next_run_id_ = st.next_run_id;
}

Status Engine::RebuildCensus() {
  census_.clear();
  census_valid_bytes_ = 0;
  VersionPtr v = current();
  if (v->file_count() == 0) return Status::OK();
  std::unordered_map<uint64_t, std::pair<SequenceNumber, uint32_t>> newest;
  for (const auto& f : v->AllFiles()) {
    auto image = device_->ReadFile(f->name());
    if (!image.ok()) return image.status();
    SortedFileIterator it(std::move(*image), *f);
    for (; it.Valid(); it.Next()) {
      const EntryView& e = it.entry();
      const uint32_t size = e.is_tombstone() ? 0 : static_cast<uint32_t>(e.encoded_size());
      auto [slot, inserted] = newest.try_emplace(Hash64(e.key), e.seqnum, size);
      if (!inserted && e.seqnum > slot->second.first) slot->second = {e.seqnum, size};
    }
    LSMCLAB_RETURN_IF_ERROR(it.status());
  }
  for (const auto& [h, n] : newest) {
    census_[h] = n.second | kCensusPutSeen;
    census_valid_bytes_ += n.second;
  }
  return Status::OK();
}

double Engine::SpaceAmp() const {
  const uint64_t total = current()->total_data_bytes();
  if (total == 0) return 0.0;
  const uint64_t valid = std::min(census_valid_bytes_, total);
  return static_cast<double>(total - valid) / static_cast<double>(std::max<uint64_t>(valid, 1));
}

double Engine::Latency(uint64_t pages, std::chrono::steady_clock::time_point start) const {
  if (!opts_.tree.wall_clock) return static_cast<double>(pages);
  return std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
}

StatusOr<SequenceNumber> Engine::Put(std::string_view key, std::string_view value) {
  return Write(key, value, EntryKind::kPut);
}

StatusOr<SequenceNumber> Engine::Delete(std::string_view key) { return Write(key, {}, EntryKind::kTombstone); }

StatusOr<SequenceNumber> Engine::Write(std::string_view key, std::string_view value, EntryKind kind) {
  if (key.empty()) return Status::InvalidArgument("empty key");
  if (kind == EntryKind::kTombstone && !value.empty()) {
    return Status::InvalidArgument("tombstone with a value");
  }
  const auto start = std::chrono::steady_clock::now();
  const SequenceNumber seq = ++tick_;

  auto it = buffer_.find(key);
  if (it == buffer_.end()) {
    buffer_.emplace(std::string(key), BufferedValue{std::string(value), seq, kind});
  } else {
    buffer_bytes_ -= EncodedEntrySize(key.size(), it->second.value.size());
    it->second = BufferedValue{std::string(value), seq, kind};
  }
  buffer_bytes_ += EncodedEntrySize(key.size(), value.size());

  uint64_t pages = 0;
  if (buffer_bytes_ >= opts_.tree.buffer_bytes) {
    auto flushed = FlushBuffer();
    if (!flushed.ok()) return flushed.status();
    pages += *flushed;
    int jobs = 0;
    auto moved = Quiesce(&jobs);
    if (!moved.ok()) return moved.status();
    pages += *moved;
  } else if (next_timed_event_ && tick_ >= *next_timed_event_) {
    int jobs = 0;
    auto moved = Quiesce(&jobs);
    if (!moved.ok()) return moved.status();
    pages += *moved;
  }
  metrics_.RecordWrite(Latency(pages, start));
  return seq;
}

Status Engine::MaybeRunTimedCompactions() {
  if (!next_timed_event_ || tick_ < *next_timed_event_) return Status::OK();
  int jobs = 0;
  return Quiesce(&jobs).status();
}

Status Engine::Flush() {
  if (!buffer_.empty()) {
    auto flushed = FlushBuffer();
    if (!flushed.ok()) return flushed.status();
  }
  int jobs = 0;
  return Quiesce(&jobs).status();
}

StatusOr<int> Engine::RunUntilQuiescent() {
  int jobs = 0;
  auto r = Quiesce(&jobs);
  if (!r.ok()) return r.status();
  return jobs;
}

StatusOr<uint64_t> Engine::FlushBuffer() {
  if (buffer_.empty()) return uint64_t{0};
  const TreeConfig& cfg = opts_.tree;
  uint64_t file_id = next_file_id_;
  const uint64_t run_id = next_run_id_;

  std::vector<FileHandle> outputs;
  auto abandon = [&](Status s) {
    for (auto& h : outputs) h->obsolete.store(true);
    outputs.clear();
    return s;
  };

  std::unique_ptr<SortedFileBuilder> builder;
  auto finish = [&]() -> Status {
    BuiltFile built = builder->Finish();
    builder.reset();
    const std::string name = built.meta.name();
    LSMCLAB_RETURN_IF_ERROR(device_->WriteFile(name, std::move(built.image)));
    outputs.push_back(MakeFileHandle(std::move(built.meta), device_));
    return Status::OK();
  };
  for (const auto& [key, bv] : buffer_) {
    if (!builder) builder = std::make_unique<SortedFileBuilder>(cfg, file_id++, tick_);
    builder->Add(EntryView{key, bv.value, bv.seqnum, bv.kind});
    if (builder->Full()) {
      Status s = finish();
      if (!s.ok()) return abandon(s);
    }
  }
  if (builder) {
    Status s = finish();
    if (!s.ok()) return abandon(s);
  }

  VersionEdit edit;
  uint64_t bytes = 0, pages = 0;
  for (const auto& h : outputs) {
    edit.added.push_back({1, run_id, h});
    bytes += h->data_bytes;
    pages += h->num_pages;
  }
  edit.next_file_id = file_id;
  edit.next_run_id = run_id + 1;
  edit.tick = tick_;
  Status s = manifest_->LogAndApply(edit);
  if (!s.ok()) return abandon(s);
  next_file_id_ = file_id;
  next_run_id_ = run_id + 1;

  uint64_t unique = 0;
  for (const auto& [key, bv] : buffer_) {
    const uint32_t size = static_cast<uint32_t>(EncodedEntrySize(key.size(), bv.value.size()));
    const uint32_t contribution = bv.kind == EntryKind::kPut ? size : 0;
    auto [slot, inserted] = census_.try_emplace(Hash64(key), 0);
    if (!inserted) census_valid_bytes_ -= slot->second & ~kCensusPutSeen;
    if (bv.kind == EntryKind::kPut && !(slot->second & kCensusPutSeen)) unique += size;
    slot->second = contribution | (slot->second & kCensusPutSeen) |
                   (bv.kind == EntryKind::kPut ? kCensusPutSeen : 0);
    census_valid_bytes_ += contribution;
  }
  buffer_.clear();
  buffer_bytes_ = 0;
  metrics_.RecordFlush(bytes, unique);
  if (cfg.paranoid_checks) LSMCLAB_RETURN_IF_ERROR(current()->CheckConsistency());
  return pages;
}

StatusOr<uint64_t> Engine::Quiesce(int* jobs) {
  uint64_t pages = 0;
  while (true) {
    VersionPtr v = current();
    PickContext ctx;
    ctx.cfg = &opts_.tree;
    ctx.now = tick_;
    ctx.space_amp = SpaceAmp();
    ctx.rr_cursors = &manifest_->state().rr_cursors;
    const auto firing = EvaluateTriggers(*v, opts_.strategy, ctx);
    if (firing.empty()) break;
    if (*jobs >= 10 * TreeDepth(*v)) {
      return Status::InvariantViolation("compaction did not settle after " + std::to_string(*jobs) +
                                        " jobs; last trigger " + firing.front().trigger.ToString() +
                                        " at level " + std::to_string(firing.front().level) + "\n" +
                                        v->DebugString());
    }
    auto job = SelectCompaction(*v, firing.front(), opts_.strategy, ctx);
    if (!job.ok()) return job.status();

    const auto start = std::chrono::steady_clock::now();
    CompactionEnv env{&opts_.tree, device_, &next_file_id_, &next_run_id_, tick_};
    const uint64_t saved_file_id = next_file_id_, saved_run_id = next_run_id_;
    auto result = ExecuteCompaction(*v, *job, env);
    if (!result.ok()) {
      next_file_id_ = saved_file_id;
      next_run_id_ = saved_run_id;
      return result.status();
    }
    Status s = manifest_->LogAndApply(result->edit);
    if (!s.ok()) {
      DiscardOutputs(*result);
      next_file_id_ = saved_file_id;
      next_run_id_ = saved_run_id;
      return s;
    }
    if (!job->pseudo) {
      for (const auto& f : job->victims) cache_->EraseFile(f.file->file_id);
      for (const auto& f : job->targets) cache_->EraseFile(f.file->file_id);
    }
    const uint64_t job_pages = result->pages_read + result->pages_written;
    pages += job_pages;
    metrics_.RecordCompaction(job->pseudo, result->bytes_read, result->bytes_written, result->entries_dropped,
                              result->tombstones_dropped, Latency(job_pages, start));
    if (observer_) observer_(*job, *result);
    ++*jobs;
    if (opts_.tree.paranoid_checks) LSMCLAB_RETURN_IF_ERROR(current()->CheckConsistency());
  }
  RefreshTimedEvent();
  return pages;
}

void Engine::RefreshTimedEvent() {
  PickContext ctx;
  ctx.cfg = &opts_.tree;
  ctx.now = tick_;
  next_timed_event_ = NextTimedEvent(*current(), opts_.strategy, ctx);
}

template <typename Block>
StatusOr<std::shared_ptr<const Block>> Engine::FetchBlock(const FileMeta& f, BlockKind kind, uint32_t index,
                                                          BlockHandle handle, uint32_t* miss_pages,
                                                          uint32_t* hits) const {
  const BlockKey key{f.file_id, kind, index};
  if (auto cached = cache_->Lookup(key)) {
    ++*hits;
    return std::static_pointer_cast<const Block>(cached);
  }
  auto raw = device_->ReadRange(f.name(), handle.offset, handle.size);
  if (!raw.ok()) return raw.status();
  *miss_pages += PagesOf(handle.size, opts_.tree.page_bytes);
  std::shared_ptr<const Block> block;
  if constexpr (std::is_same_v<Block, FilterBlock>) {
    block = std::make_shared<const FilterBlock>(std::move(*raw), f.filter_probes);
  } else {
    auto parsed = Block::Parse(std::move(*raw));
    if (!parsed.ok()) return parsed.status();
    block = std::move(*parsed);
  }
  cache_->Insert(key, block);
  return block;
}

StatusOr<std::optional<EntryView>> Engine::FileGet(const FileMeta& f, std::string_view key, LookupIo* io,
                                                   std::shared_ptr<const DataPage>* pin) const {
  if (key < std::string_view(f.min_key) || std::string_view(f.max_key) < key) return std::optional<EntryView>();
  if (f.filter.size > 0) {
    const int k = static_cast<int>(BlockKind::kFilter);
    uint32_t miss_pages = 0;
    auto filter = FetchBlock<FilterBlock>(f, BlockKind::kFilter, 0, f.filter, &miss_pages, &io->cache_hits[k]);
    if (!filter.ok()) return filter.status();
    io->filter_pages += miss_pages;
    if (miss_pages) io->cache_misses[k]++;
    io->filter_probes++;
    if (!(*filter)->view().MayContain(key)) return std::optional<EntryView>();
  }
  const int ki = static_cast<int>(BlockKind::kIndex);
  uint32_t miss_pages = 0;
  auto index = FetchBlock<IndexBlock>(f, BlockKind::kIndex, 0, f.index, &miss_pages, &io->cache_hits[ki]);
  if (!index.ok()) return index.status();
  io->index_pages += miss_pages;
  if (miss_pages) io->cache_misses[ki]++;
  const size_t page = (*index)->FindPage(key);
  if (page >= (*index)->size()) return std::optional<EntryView>();

  const int kd = static_cast<int>(BlockKind::kData);
  miss_pages = 0;
  auto data = FetchBlock<DataPage>(f, BlockKind::kData, static_cast<uint32_t>(page), (*index)->fence(page).page,
                                   &miss_pages, &io->cache_hits[kd]);
  if (!data.ok()) return data.status();
  io->data_pages += miss_pages;
  if (miss_pages) io->cache_misses[kd]++;
  io->data_page_accesses++;
  f.last_access_tick.store(tick_, std::memory_order_relaxed);
  const EntryView* e = (*data)->Find(key);
  if (!e) return std::optional<EntryView>();
  *pin = *data;
  return std::optional<EntryView>(*e);
}

StatusOr<LookupResult> Engine::Lookup(const VersionPtr& v, std::string_view key) const {
  LookupResult r;
  for (int lvl = 1; lvl <= v->num_levels(); ++lvl) {
    for (const auto& run : v->level(lvl).runs) {
      const FileHandle* f = run.FileFor(key);
      if (!f) continue;
      std::shared_ptr<const DataPage> pin;
      auto e = FileGet(**f, key, &r.io, &pin);
      if (!e.ok()) return e.status();
      if (!e->has_value()) continue;
      if ((*e)->kind == EntryKind::kPut) {
        r.found = true;
        r.value.assign((*e)->value);
      }
      return r;
    }
  }
  return r;
}

StatusOr<LookupResult> Engine::Get(std::string_view key) {
  ++tick_;
  LSMCLAB_RETURN_IF_ERROR(MaybeRunTimedCompactions());
  const auto start = std::chrono::steady_clock::now();
  LookupResult r;
  auto it = buffer_.find(key);
  if (it != buffer_.end()) {
    r.from_buffer = true;
    r.found = it->second.kind == EntryKind::kPut;
    if (r.found) r.value = it->second.value;
  } else {
    auto disk = Lookup(current(), key);
    if (!disk.ok()) return disk.status();
    r = std::move(*disk);
  }
  metrics_.RecordCacheAccesses(r.io);
  metrics_.RecordPointLookup(r.io, r.found, Latency(r.io.total_pages(), start));
  return r;
}

StatusOr<std::vector<KeyValue>> Engine::Scan(std::string_view low, std::string_view high) {
  if (high < low) return Status::InvalidArgument("scan range has low > high");
  ++tick_;
  LSMCLAB_RETURN_IF_ERROR(MaybeRunTimedCompactions());
  const auto start = std::chrono::steady_clock::now();

  // One sorted source per run, buffer first; every source holds each key at
  // most once.
  std::vector<std::vector<EntryView>> sources;
  std::vector<std::shared_ptr<const DataPage>> pins;
  LookupIo io;
  {
    std::vector<EntryView> buf;
    for (auto it = buffer_.lower_bound(low); it != buffer_.end() && it->first < high; ++it) {
      buf.push_back(EntryView{it->first, it->second.value, it->second.seqnum, it->second.kind});
    }
    if (!buf.empty()) sources.push_back(std::move(buf));
  }
  VersionPtr v = current();
  if (low < high) {
    for (int lvl = 1; lvl <= v->num_levels(); ++lvl) {
      for (const auto& run : v->level(lvl).runs) {
        std::vector<EntryView> out;
        auto [b, e] = run.OverlappingRange(low, high);
        for (size_t i = b; i < e; ++i) {
          const FileMeta& f = *run.files[i];
          if (!(std::string_view(f.min_key) < high)) continue;
          uint32_t miss = 0;
          auto index = FetchBlock<IndexBlock>(f, BlockKind::kIndex, 0, f.index, &miss,
                                              &io.cache_hits[static_cast<int>(BlockKind::kIndex)]);
          if (!index.ok()) return index.status();
          io.index_pages += miss;
          if (miss) io.cache_misses[static_cast<int>(BlockKind::kIndex)]++;
          for (size_t p = (*index)->LowerBoundPage(low); p < (*index)->size(); ++p) {
            if (!((*index)->fence(p).first_key < high)) break;
            miss = 0;
            auto page = FetchBlock<DataPage>(f, BlockKind::kData, static_cast<uint32_t>(p), (*index)->fence(p).page,
                                             &miss, &io.cache_hits[static_cast<int>(BlockKind::kData)]);
            if (!page.ok()) return page.status();
            io.data_pages += miss;
            if (miss) io.cache_misses[static_cast<int>(BlockKind::kData)]++;
            io.data_page_accesses++;
            for (const EntryView& ev : (*page)->entries()) {
              if (ev.key >= low && ev.key < high) out.push_back(ev);
            }
            pins.push_back(std::move(*page));
          }
          f.last_access_tick.store(tick_, std::memory_order_relaxed);
        }
        if (!out.empty()) sources.push_back(std::move(out));
      }
    }
  }

  std::vector<KeyValue> result;
  std::vector<size_t> pos(sources.size(), 0);
  auto greater = [&](size_t a, size_t b) {
    return CompareInternal(sources[a][pos[a]], sources[b][pos[b]]) > 0;
  };
  std::priority_queue<size_t, std::vector<size_t>, decltype(greater)> heap(greater);
  for (size_t i = 0; i < sources.size(); ++i) heap.push(i);
  std::string_view last;
  bool have_last = false;
  while (!heap.empty()) {
    const size_t s = heap.top();
    heap.pop();
    const EntryView& e = sources[s][pos[s]];
    if (!have_last || e.key != last) {
      last = e.key;
      have_last = true;
      if (!e.is_tombstone()) result.emplace_back(std::string(e.key), std::string(e.value));
    }
    if (++pos[s] < sources[s].size()) heap.push(s);
  }
  metrics_.RecordCacheAccesses(io);
  metrics_.RecordRangeLookup(io.total_pages(), Latency(io.total_pages(), start));
  return result;
}

MetricsReport Engine::Report() const { return metrics_.Report(*current(), tick_, SpaceAmp()); }

std::string Engine::DumpManifest() const {
  std::ostringstream os;
  VersionPtr v = current();
  os << "# lsmclab manifest dump\n";
  os << "strategy " << opts_.strategy.ToString() << "\n";
  os << "tick " << tick_ << "\n";
  os << "next_file_id " << next_file_id_ << "\n";
  os << "disk_levels " << v->nonempty_level_count() << "\n";
  os << "buffer_entries " << buffer_.size() << "\n";
  os << v->DebugString();
  return os.str();
}

}  // namespace lsmclab
