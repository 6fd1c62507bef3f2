#include "lsmclab/compaction.h"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <unordered_set>

#include "lsmclab/sorted_file.h"

namespace lsmclab {

namespace {

bool LevelTiered(const Version& v, const CompactionStrategy& s, int level) {
  return s.layout.IsTiered(level, TreeDepth(v));
}

bool InScope(const Trigger& t, bool tiered) {
  switch (t.scope) {
    case Trigger::Scope::kAll: return true;
    case Trigger::Scope::kTiered: return tiered;
    case Trigger::Scope::kLeveled: return !tiered;
  }
  return true;
}

bool TombstoneExpired(const FileMeta& f, int level, int depth, double d_th, Tick now) {
  if (!f.oldest_tombstone_tick) return false;
  const Tick t = *f.oldest_tombstone_tick;
  return now > t && static_cast<double>(now - t) > TombstoneLevelTTL(level, depth, d_th);
}

uint64_t OverlapBytes(const Version& v, int level, std::string_view lo, std::string_view hi) {
  uint64_t bytes = 0;
  for (const auto& run : v.level(level).runs) {
    auto [b, e] = run.OverlappingRange(lo, hi);
    for (size_t i = b; i < e; ++i) bytes += run.files[i]->data_bytes;
  }
  return bytes;
}

// Lower key (then lower file id) wins all ties.
bool TieBreakLess(const FileMeta& a, const FileMeta& b) {
  if (a.min_key != b.min_key) return a.min_key < b.min_key;
  return a.file_id < b.file_id;
}

template <typename Score>
const FileHandle* ArgMin(const std::vector<FileHandle>& files, Score score) {
  const FileHandle* best = nullptr;
  decltype(score(*files.front())) best_score{};
  for (const auto& f : files) {
    auto sc = score(*f);
    if (!best || sc < best_score || (sc == best_score && TieBreakLess(*f, **best))) {
      best = &f;
      best_score = sc;
    }
  }
  return best;
}

// Returns the index of the picked file, or nullopt when the policy abstains.
std::optional<size_t> PickOne(MovementPolicy p, const Version& v, int level,
                              const std::vector<FileHandle>& files, const PickContext& ctx,
                              const CompactionStrategy& s) {
  const FileHandle* pick = nullptr;
  auto parent_overlap = [&](const FileMeta& f) { return OverlapBytes(v, level + 1, f.min_key, f.max_key); };
  switch (p) {
    case MovementPolicy::kRoundRobin: {
      const std::string* cursor = nullptr;
      if (ctx.rr_cursors) {
        auto it = ctx.rr_cursors->find(level);
        if (it != ctx.rr_cursors->end()) cursor = &it->second;
      }
      size_t i = 0;
      if (cursor) {
        while (i < files.size() && !(*cursor < files[i]->min_key)) ++i;
        if (i == files.size()) i = 0;
      }
      return i;
    }
    case MovementPolicy::kLeastOverlapParent:
      pick = ArgMin(files, [&](const FileMeta& f) { return OverlapBytes(v, level + 1, f.min_key, f.max_key); });
      break;
    case MovementPolicy::kLeastOverlapGrandparent:
      pick = ArgMin(files, [&](const FileMeta& f) {
        return std::pair(OverlapBytes(v, level + 2, f.min_key, f.max_key), parent_overlap(f));
      });
      break;
    // Files written by one merge share their ticks; parent overlap breaks
    // those ties before key order does.
    case MovementPolicy::kColdest:
      pick = ArgMin(files, [&](const FileMeta& f) {
        return std::pair(f.last_access_tick.load(std::memory_order_relaxed), parent_overlap(f));
      });
      break;
    case MovementPolicy::kOldest:
      pick = ArgMin(files, [&](const FileMeta& f) { return std::pair(f.created_tick, parent_overlap(f)); });
      break;
    case MovementPolicy::kMostTombstones: {
      bool any = std::any_of(files.begin(), files.end(), [](const FileHandle& f) { return f->tombstone_count > 0; });
      if (!any) return std::nullopt;
      pick = ArgMin(files, [&](const FileMeta& f) { return std::pair(-f.tombstone_density(), parent_overlap(f)); });
      break;
    }
    case MovementPolicy::kExpiredTombstoneTTL: {
      std::optional<double> d_th;
      for (const auto& t : s.triggers) {
        if (t.kind == Trigger::Kind::kTombstoneTTL) d_th = t.value;
      }
      if (!d_th && ctx.cfg && ctx.cfg->delete_persistence_threshold) {
        d_th = static_cast<double>(*ctx.cfg->delete_persistence_threshold);
      }
      if (!d_th) return std::nullopt;
      const int depth = TreeDepth(v);
      std::vector<FileHandle> expired;
      for (const auto& f : files) {
        if (TombstoneExpired(*f, level, depth, *d_th, ctx.now)) expired.push_back(f);
      }
      if (expired.empty()) return std::nullopt;
      const FileHandle* e =
          ArgMin(expired, [&](const FileMeta& f) { return std::pair(*f.oldest_tombstone_tick, parent_overlap(f)); });
      for (size_t i = 0; i < files.size(); ++i) {
        if (files[i]->file_id == (*e)->file_id) return i;
      }
      return std::nullopt;
    }
    case MovementPolicy::kEntireLevel:
      return std::nullopt;
  }
  if (!pick) return std::nullopt;
  return static_cast<size_t>(pick - files.data());
}

void AddTargets(const Version& v, int target_level, std::string_view lo, std::string_view hi,
                std::vector<JobFile>* targets) {
  for (const auto& run : v.level(target_level).runs) {
    auto [b, e] = run.OverlappingRange(lo, hi);
    for (size_t i = b; i < e; ++i) targets->push_back({target_level, run.files[i]});
  }
}

void KeyRange(const std::vector<JobFile>& files, std::string* lo, std::string* hi) {
  for (size_t i = 0; i < files.size(); ++i) {
    const FileMeta& f = *files[i].file;
    if (i == 0 || f.min_key < *lo) *lo = f.min_key;
    if (i == 0 || *hi < f.max_key) *hi = f.max_key;
  }
}

uint64_t PagesFor(const FileMeta& f) { return f.num_pages; }

struct MergeSource {
  SortedFileIterator it;
};

struct HeapGreater {
  const std::vector<MergeSource>* sources;
  bool operator()(size_t a, size_t b) const {
    return CompareInternal((*sources)[a].it.entry(), (*sources)[b].it.entry()) > 0;
  }
};

}  // namespace

int TreeDepth(const Version& v) { return std::max(v.deepest_nonempty_level(), 1); }

double TombstoneLevelTTL(int level, int depth, double d_th) {
  depth = std::max(depth, 1);
  level = std::clamp(level, 1, depth);
  return d_th * level / depth;
}

std::vector<FiringTrigger> EvaluateTriggers(const Version& v, const CompactionStrategy& s,
                                            const PickContext& ctx) {
  std::vector<FiringTrigger> out;
  const int deepest = v.deepest_nonempty_level();
  const int depth = TreeDepth(v);

  for (int lvl = 1; lvl <= deepest; ++lvl) {
    if (!LevelTiered(v, s, lvl) && v.level(lvl).runs.size() > 1) {
      out.push_back({lvl, -1, Trigger::SortedRunCount(2)});
    }
  }

  for (size_t ti = 0; ti < s.triggers.size(); ++ti) {
    const Trigger& t = s.triggers[ti];
    if (t.kind == Trigger::Kind::kSpaceAmp) {
      uint64_t runs = 0;
      for (int lvl = 1; lvl <= deepest; ++lvl) runs += v.level(lvl).runs.size();
      if (runs > 1 && ctx.space_amp > t.value) out.push_back({1, static_cast<int>(ti), t});
      continue;
    }
    for (int lvl = 1; lvl <= deepest; ++lvl) {
      const LevelState& l = v.level(lvl);
      if (l.empty() || !InScope(t, LevelTiered(v, s, lvl))) continue;
      bool fire = false;
      switch (t.kind) {
        case Trigger::Kind::kLevelSaturation:
          fire = static_cast<double>(l.data_bytes) > t.value * static_cast<double>(ctx.cfg->capacity_bytes(lvl));
          break;
        case Trigger::Kind::kSortedRunCount:
          fire = static_cast<double>(l.runs.size()) >= t.value;
          break;
        case Trigger::Kind::kFileStaleness:
          // Stale files drain towards the last level; there is nowhere
          // further to move them from there.
          if (lvl == deepest) break;
          for (const auto& run : l.runs) {
            for (const auto& f : run.files) {
              if (ctx.now > f->created_tick && static_cast<double>(ctx.now - f->created_tick) > t.value) fire = true;
            }
          }
          break;
        case Trigger::Kind::kTombstoneTTL:
          for (const auto& run : l.runs) {
            for (const auto& f : run.files) {
              if (TombstoneExpired(*f, lvl, depth, t.value, ctx.now)) fire = true;
            }
          }
          break;
        case Trigger::Kind::kTombstoneDensity:
          for (const auto& run : l.runs) {
            for (const auto& f : run.files) {
              if (f->tombstone_count > 0 && f->tombstone_density() >= t.value) fire = true;
            }
          }
          break;
        case Trigger::Kind::kSpaceAmp:
          break;
      }
      if (fire) out.push_back({lvl, static_cast<int>(ti), t});
    }
  }
  return out;
}

std::optional<Tick> NextTimedEvent(const Version& v, const CompactionStrategy& s, const PickContext& ctx) {
  std::optional<Tick> next;
  auto consider = [&](double deadline) {
    // Fires once age strictly exceeds the limit.
    const Tick t = static_cast<Tick>(std::floor(deadline)) + 1;
    if (!next || t < *next) next = t;
  };
  const int deepest = v.deepest_nonempty_level();
  const int depth = TreeDepth(v);
  for (const auto& t : s.triggers) {
    if (t.kind != Trigger::Kind::kTombstoneTTL && t.kind != Trigger::Kind::kFileStaleness) continue;
    for (int lvl = 1; lvl <= deepest; ++lvl) {
      if (!InScope(t, LevelTiered(v, s, lvl))) continue;
      if (t.kind == Trigger::Kind::kFileStaleness && lvl == deepest) continue;
      for (const auto& run : v.level(lvl).runs) {
        for (const auto& f : run.files) {
          if (t.kind == Trigger::Kind::kTombstoneTTL) {
            if (f->oldest_tombstone_tick) consider(*f->oldest_tombstone_tick + TombstoneLevelTTL(lvl, depth, t.value));
          } else {
            consider(f->created_tick + t.value);
          }
        }
      }
    }
  }
  (void)ctx;
  return next;
}

std::string CompactionJob::ToString() const {
  std::ostringstream os;
  os << "L" << source_level << "->L" << target_level << " victims=" << victims.size()
     << " targets=" << targets.size() << (pseudo ? " pseudo" : "")
     << " cause=" << (cause.run_limit() ? "run_limit" : cause.trigger.ToString());
  if (policy) os << " policy=" << MovementPolicyName(*policy);
  return os.str();
}

StatusOr<CompactionJob> SelectCompaction(const Version& v, const FiringTrigger& ft,
                                         const CompactionStrategy& s, const PickContext& ctx) {
  CompactionJob job;
  job.cause = ft;
  const int src = ft.level;
  const LevelState& level = v.level(src);

  // Whole tree into one run at the deepest level.
  if (!ft.run_limit() && ft.trigger.kind == Trigger::Kind::kSpaceAmp) {
    const int deepest = v.deepest_nonempty_level();
    job.source_level = 1;
    job.target_level = deepest;
    for (int lvl = 1; lvl <= deepest; ++lvl) {
      for (const auto& run : v.level(lvl).runs) {
        for (const auto& f : run.files) job.victims.push_back({lvl, f});
      }
    }
    return job;
  }
  if (level.empty()) return Status::InvariantViolation("compaction requested on empty level " + std::to_string(src));

  // Newer runs of a leveled level merge into its oldest run.
  if (ft.run_limit()) {
    job.source_level = src;
    job.target_level = src;
    for (size_t r = 0; r + 1 < level.runs.size(); ++r) {
      for (const auto& f : level.runs[r].files) job.victims.push_back({src, f});
    }
    std::string lo, hi;
    KeyRange(job.victims, &lo, &hi);
    const SortedRun& oldest = level.runs.back();
    auto [b, e] = oldest.OverlappingRange(lo, hi);
    for (size_t i = b; i < e; ++i) job.targets.push_back({src, oldest.files[i]});
    job.output_run_id = oldest.run_id;
    // A single newer run that overlaps nothing can join the old run as is.
    if (job.targets.empty() && level.runs.size() == 2) {
      const bool has_tombstones = std::any_of(job.victims.begin(), job.victims.end(),
                                              [](const JobFile& f) { return f.file->tombstone_count > 0; });
      job.pseudo = !(src >= v.deepest_nonempty_level() && has_tombstones);
    }
    return job;
  }

  const int tgt = src + 1;
  job.source_level = src;
  job.target_level = tgt;
  const bool src_tiered = LevelTiered(v, s, src);
  const bool tgt_tiered = s.layout.IsTiered(tgt, std::max(TreeDepth(v), tgt));
  const bool whole = src_tiered || !s.granularity.per_file();

  if (whole) {
    for (const auto& run : level.runs) {
      for (const auto& f : run.files) job.victims.push_back({src, f});
    }
  } else {
    const std::vector<FileHandle>& files = level.runs.front().files;
    std::optional<size_t> idx;
    for (MovementPolicy p : s.movement) {
      idx = PickOne(p, v, src, files, ctx, s);
      if (idx) {
        job.policy = p;
        break;
      }
    }
    if (!idx) return Status::InvariantViolation("movement chain abstained");
    const size_t n = std::min<size_t>(s.granularity.files_per_job(), files.size());
    size_t begin = std::min(*idx, files.size() - n);
    for (size_t i = begin; i < begin + n; ++i) job.victims.push_back({src, files[i]});
    if (job.policy == MovementPolicy::kRoundRobin) job.rr_cursor = job.victims.back().file->max_key;
  }

  std::string lo, hi;
  KeyRange(job.victims, &lo, &hi);
  if (!tgt_tiered) {
    AddTargets(v, tgt, lo, hi, &job.targets);
    const LevelState& t = v.level(tgt);
    if (!t.empty()) job.output_run_id = t.runs.back().run_id;
  }

  // Nothing to merge with, and the victims form one run: move them as is.
  if (job.targets.empty() && (!whole || level.runs.size() == 1)) {
    const bool into_last = tgt >= v.deepest_nonempty_level();
    const bool has_tombstones = std::any_of(job.victims.begin(), job.victims.end(),
                                            [](const JobFile& f) { return f.file->tombstone_count > 0; });
    // Tombstones reaching the last level are purged, which needs a rewrite.
    job.pseudo = !(into_last && has_tombstones);
  }
  return job;
}

StatusOr<CompactionResult> ExecuteCompaction(const Version& v, const CompactionJob& job,
                                             const CompactionEnv& env) {
  CompactionResult r;
  VersionEdit& edit = r.edit;
  edit.tick = env.now;
  if (job.rr_cursor) edit.rr_cursors[job.source_level] = *job.rr_cursor;

  uint64_t run_id = job.output_run_id;
  if (run_id == 0) run_id = (*env.next_run_id)++;

  for (const auto& f : job.victims) edit.deleted.push_back({f.level, f.file->file_id});
  if (job.pseudo) {
    for (const auto& f : job.victims) edit.added.push_back({job.target_level, run_id, f.file});
    edit.next_file_id = *env.next_file_id;
    edit.next_run_id = *env.next_run_id;
    return r;
  }
  for (const auto& f : job.targets) edit.deleted.push_back({f.level, f.file->file_id});

  std::unordered_set<uint64_t> participating;
  std::vector<JobFile> inputs = job.victims;
  inputs.insert(inputs.end(), job.targets.begin(), job.targets.end());
  for (const auto& f : inputs) participating.insert(f.file->file_id);

  // Runs at or below the output level that stay put; a tombstone they might
  // cover has to survive.
  std::vector<std::vector<FileHandle>> guards;
  for (int lvl = job.target_level; lvl <= v.deepest_nonempty_level(); ++lvl) {
    for (const auto& run : v.level(lvl).runs) {
      std::vector<FileHandle> rest;
      for (const auto& f : run.files) {
        if (!participating.count(f->file_id)) rest.push_back(f);
      }
      if (!rest.empty()) guards.push_back(std::move(rest));
    }
  }
  auto covered_below = [&](std::string_view key) {
    for (const auto& files : guards) {
      auto it = std::partition_point(files.begin(), files.end(),
                                     [&](const FileHandle& f) { return f->max_key < key; });
      if (it != files.end() && !(key < (*it)->min_key)) return true;
    }
    return false;
  };

  std::vector<MergeSource> sources;
  sources.reserve(inputs.size());
  for (const auto& f : inputs) {
    auto image = env.device->ReadFile(f.file->name());
    if (!image.ok()) return image.status();
    r.bytes_read += f.file->data_bytes;
    r.pages_read += PagesFor(*f.file);
    r.entries_read += f.file->entry_count;
    sources.push_back(MergeSource{SortedFileIterator(std::move(*image), *f.file)});
    if (!sources.back().it.status().ok()) return sources.back().it.status();
  }

  std::vector<size_t> heap_store;
  heap_store.reserve(sources.size());
  std::priority_queue<size_t, std::vector<size_t>, HeapGreater> heap(HeapGreater{&sources}, std::move(heap_store));
  for (size_t i = 0; i < sources.size(); ++i) {
    if (sources[i].it.Valid()) heap.push(i);
  }

  std::vector<std::pair<std::string, FileMeta>> written;  // name, meta
  Status failure;
  std::unique_ptr<SortedFileBuilder> builder;
  auto finish_file = [&]() {
    BuiltFile built = builder->Finish();
    builder.reset();
    const std::string name = built.meta.name();
    Status s = env.device->WriteFile(name, std::move(built.image));
    if (!s.ok()) {
      failure = s;
      return;
    }
    written.emplace_back(name, std::move(built.meta));
  };

  std::string last_key;
  bool have_last = false;
  while (!heap.empty() && failure.ok()) {
    const size_t top = heap.top();
    heap.pop();
    MergeSource& src = sources[top];
    const EntryView e = src.it.entry();
    const bool newest = !have_last || e.key != std::string_view(last_key);
    if (newest) {
      last_key.assign(e.key);
      have_last = true;
      if (e.is_tombstone() && !covered_below(e.key)) {
        r.tombstones_dropped++;
      } else {
        if (!builder) builder = std::make_unique<SortedFileBuilder>(*env.cfg, (*env.next_file_id)++, env.now);
        builder->Add(e);
        if (builder->Full()) finish_file();
      }
    }
    src.it.Next();
    if (!src.it.status().ok()) {
      failure = src.it.status();
      break;
    }
    if (src.it.Valid()) heap.push(top);
  }
  if (builder && failure.ok() && !builder->empty()) finish_file();

  if (!failure.ok()) {
    for (const auto& [name, meta] : written) env.device->RemoveFile(name);
    return failure;
  }

  for (auto& [name, meta] : written) {
    r.bytes_written += meta.data_bytes;
    r.pages_written += meta.num_pages;
    r.entries_written += meta.entry_count;
    FileHandle h = MakeFileHandle(std::move(meta), env.device);
    r.outputs.push_back(h);
    edit.added.push_back({job.target_level, run_id, h});
  }
  r.entries_dropped = r.entries_read - r.entries_written;
  edit.next_file_id = *env.next_file_id;
  edit.next_run_id = *env.next_run_id;
  return r;
}

void DiscardOutputs(const CompactionResult& r) {
  // The device copies go away with the last handle.
  for (const auto& f : r.outputs) f->obsolete.store(true);
}

}  // namespace lsmclab
