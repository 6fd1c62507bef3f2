#include "lsmclab/version.h"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "lsmclab/coding.h"
#include "lsmclab/hash.h"

namespace lsmclab {

namespace {

const LevelState kEmptyLevel;

enum Tag : uint32_t {
  kTagNextFileId = 1,
  kTagNextRunId = 2,
  kTagTick = 3,
  kTagDeleted = 4,
  kTagAdded = 5,
  kTagCursor = 6,
};

void EncodeMeta(std::string* dst, const FileMeta& m) {
  PutFixed64(dst, m.file_id);
  PutLengthPrefixed(dst, m.min_key);
  PutLengthPrefixed(dst, m.max_key);
  PutFixed64(dst, m.entry_count);
  PutFixed64(dst, m.tombstone_count);
  dst->push_back(m.oldest_tombstone_tick ? 1 : 0);
  PutFixed64(dst, m.oldest_tombstone_tick.value_or(0));
  PutFixed64(dst, m.created_tick);
  PutFixed64(dst, m.data_bytes);
  PutFixed64(dst, m.file_size);
  PutFixed32(dst, m.num_pages);
  PutFixed64(dst, m.index.offset);
  PutFixed64(dst, m.index.size);
  PutFixed64(dst, m.filter.offset);
  PutFixed64(dst, m.filter.size);
  PutFixed32(dst, m.filter_probes);
}

bool DecodeMeta(Decoder* d, FileMeta* m) {
  std::string_view min_key, max_key, flag;
  uint64_t oldest = 0, created = 0;
  if (!d->GetFixed64(&m->file_id) || !d->GetLengthPrefixed(&min_key) ||
      !d->GetLengthPrefixed(&max_key) || !d->GetFixed64(&m->entry_count) ||
      !d->GetFixed64(&m->tombstone_count) || !d->GetBytes(1, &flag) ||
      !d->GetFixed64(&oldest) || !d->GetFixed64(&created) || !d->GetFixed64(&m->data_bytes) ||
      !d->GetFixed64(&m->file_size) || !d->GetFixed32(&m->num_pages) ||
      !d->GetFixed64(&m->index.offset) || !d->GetFixed64(&m->index.size) ||
      !d->GetFixed64(&m->filter.offset) || !d->GetFixed64(&m->filter.size) ||
      !d->GetFixed32(&m->filter_probes)) {
    return false;
  }
  m->min_key.assign(min_key);
  m->max_key.assign(max_key);
  if (flag[0]) m->oldest_tombstone_tick = oldest;
  m->created_tick = created;
  m->last_access_tick.store(created);
  return true;
}

void Recount(SortedRun* run) {
  run->data_bytes = 0;
  run->entry_count = 0;
  for (const auto& f : run->files) {
    run->data_bytes += f->data_bytes;
    run->entry_count += f->entry_count;
  }
}

void Recount(LevelState* level) {
  level->data_bytes = 0;
  level->file_count = 0;
  for (auto& run : level->runs) {
    Recount(&run);
    level->data_bytes += run.data_bytes;
    level->file_count += run.files.size();
  }
}

Status CheckRun(const SortedRun& run) {
  for (size_t i = 0; i < run.files.size(); ++i) {
    const FileMeta& f = *run.files[i];
    if (f.max_key < f.min_key) return Status::InvariantViolation("file key range inverted");
    if (i > 0 && !(run.files[i - 1]->max_key < f.min_key)) {
      return Status::InvariantViolation("overlapping files in run " + std::to_string(run.run_id) +
                                        ": " + run.files[i - 1]->name() + " and " + f.name());
    }
  }
  return Status::OK();
}

}  // namespace

std::pair<size_t, size_t> SortedRun::OverlappingRange(std::string_view lo, std::string_view hi) const {
  auto first = std::partition_point(files.begin(), files.end(),
                                    [&](const FileHandle& f) { return f->max_key < lo; });
  auto last = std::partition_point(first, files.end(),
                                   [&](const FileHandle& f) { return !(hi < f->min_key); });
  return {static_cast<size_t>(first - files.begin()), static_cast<size_t>(last - files.begin())};
}

const FileHandle* SortedRun::FileFor(std::string_view key) const {
  auto it = std::partition_point(files.begin(), files.end(),
                                 [&](const FileHandle& f) { return f->max_key < key; });
  if (it == files.end() || key < (*it)->min_key) return nullptr;
  return &*it;
}

const LevelState& Version::level(int lvl) const {
  if (lvl < 1 || lvl > num_levels()) return kEmptyLevel;
  return levels_[lvl - 1];
}

int Version::deepest_nonempty_level() const {
  for (int i = num_levels(); i >= 1; --i) {
    if (!levels_[i - 1].empty()) return i;
  }
  return 0;
}

int Version::nonempty_level_count() const {
  int n = 0;
  for (const auto& l : levels_) n += l.empty() ? 0 : 1;
  return n;
}

uint64_t Version::total_data_bytes() const {
  uint64_t n = 0;
  for (const auto& l : levels_) n += l.data_bytes;
  return n;
}

uint64_t Version::total_entries() const {
  uint64_t n = 0;
  for (const auto& l : levels_) {
    for (const auto& r : l.runs) n += r.entry_count;
  }
  return n;
}

uint64_t Version::file_count() const {
  uint64_t n = 0;
  for (const auto& l : levels_) n += l.file_count;
  return n;
}

std::vector<FileHandle> Version::AllFiles() const {
  std::vector<FileHandle> out;
  for (const auto& l : levels_) {
    for (const auto& r : l.runs) out.insert(out.end(), r.files.begin(), r.files.end());
  }
  return out;
}

int Version::LevelOf(uint64_t file_id) const {
  for (int i = 1; i <= num_levels(); ++i) {
    for (const auto& r : levels_[i - 1].runs) {
      for (const auto& f : r.files) {
        if (f->file_id == file_id) return i;
      }
    }
  }
  return 0;
}

Status Version::CheckConsistency() const {
  std::unordered_set<uint64_t> seen;
  for (int i = 1; i <= num_levels(); ++i) {
    const LevelState& l = levels_[i - 1];
    uint64_t bytes = 0, files = 0;
    for (size_t r = 0; r < l.runs.size(); ++r) {
      const SortedRun& run = l.runs[r];
      if (run.files.empty()) return Status::InvariantViolation("empty run");
      if (r > 0 && l.runs[r - 1].run_id <= run.run_id) {
        return Status::InvariantViolation("runs not ordered newest first");
      }
      LSMCLAB_RETURN_IF_ERROR(CheckRun(run));
      for (const auto& f : run.files) {
        if (!seen.insert(f->file_id).second) {
          return Status::InvariantViolation("file listed twice: " + f->name());
        }
        bytes += f->data_bytes;
      }
      files += run.files.size();
    }
    if (bytes != l.data_bytes || files != l.file_count) {
      return Status::InvariantViolation("level totals out of date");
    }
  }
  return Status::OK();
}

std::string Version::DebugString() const {
  std::ostringstream os;
  for (int i = 1; i <= num_levels(); ++i) {
    const LevelState& l = levels_[i - 1];
    os << "level " << i << ": " << l.runs.size() << " run(s), " << l.file_count << " file(s), "
       << l.data_bytes << " bytes\n";
    for (const auto& run : l.runs) {
      os << "  run " << run.run_id << ": " << run.files.size() << " file(s), " << run.entry_count
         << " entries\n";
      for (const auto& f : run.files) {
        os << "    " << f->name() << " [" << f->min_key << " .. " << f->max_key << "] entries="
           << f->entry_count << " tombstones=" << f->tombstone_count
           << " bytes=" << f->data_bytes << " created=" << f->created_tick << "\n";
      }
    }
  }
  return os.str();
}

void VersionEdit::EncodeTo(std::string* dst) const {
  PutFixed32(dst, kTagNextFileId);
  PutFixed64(dst, next_file_id);
  PutFixed32(dst, kTagNextRunId);
  PutFixed64(dst, next_run_id);
  PutFixed32(dst, kTagTick);
  PutFixed64(dst, tick);
  for (const auto& d : deleted) {
    PutFixed32(dst, kTagDeleted);
    PutFixed32(dst, static_cast<uint32_t>(d.level));
    PutFixed64(dst, d.file_id);
  }
  for (const auto& a : added) {
    PutFixed32(dst, kTagAdded);
    PutFixed32(dst, static_cast<uint32_t>(a.level));
    PutFixed64(dst, a.run_id);
    EncodeMeta(dst, *a.file);
  }
  for (const auto& [level, key] : rr_cursors) {
    PutFixed32(dst, kTagCursor);
    PutFixed32(dst, static_cast<uint32_t>(level));
    PutLengthPrefixed(dst, key);
  }
}

Status DecodeVersionEdit(std::string_view in, DecodedEdit* out) {
  Decoder d(in);
  while (!d.empty()) {
    uint32_t tag = 0;
    if (!d.GetFixed32(&tag)) return Status::Corruption("edit tag");
    bool ok = true;
    switch (tag) {
      case kTagNextFileId: ok = d.GetFixed64(&out->next_file_id); break;
      case kTagNextRunId: ok = d.GetFixed64(&out->next_run_id); break;
      case kTagTick: ok = d.GetFixed64(&out->tick); break;
      case kTagDeleted: {
        uint32_t level = 0;
        VersionEdit::DeletedFile del;
        ok = d.GetFixed32(&level) && d.GetFixed64(&del.file_id);
        del.level = static_cast<int>(level);
        out->deleted.push_back(del);
        break;
      }
      case kTagAdded: {
        uint32_t level = 0;
        DecodedEdit::AddedFile add;
        ok = d.GetFixed32(&level) && d.GetFixed64(&add.run_id) && DecodeMeta(&d, &add.meta);
        add.level = static_cast<int>(level);
        out->added.push_back(std::move(add));
        break;
      }
      case kTagCursor: {
        uint32_t level = 0;
        std::string_view key;
        ok = d.GetFixed32(&level) && d.GetLengthPrefixed(&key);
        out->rr_cursors[static_cast<int>(level)] = std::string(key);
        break;
      }
      default:
        return Status::Corruption("unknown edit tag " + std::to_string(tag));
    }
    if (!ok) return Status::Corruption("truncated edit field");
  }
  return Status::OK();
}

StatusOr<VersionPtr> ApplyEdit(const Version& base, const VersionEdit& edit) {
  auto v = std::make_shared<Version>(base);
  std::set<int> touched;

  for (const auto& del : edit.deleted) {
    if (del.level < 1 || del.level > v->num_levels()) {
      return Status::InvariantViolation("delete from missing level " + std::to_string(del.level));
    }
    LevelState& l = v->levels_[del.level - 1];
    bool found = false;
    for (auto& run : l.runs) {
      auto it = std::find_if(run.files.begin(), run.files.end(),
                             [&](const FileHandle& f) { return f->file_id == del.file_id; });
      if (it != run.files.end()) {
        run.files.erase(it);
        found = true;
        break;
      }
    }
    if (!found) {
      return Status::InvariantViolation("delete of file " + std::to_string(del.file_id) +
                                        " not in level " + std::to_string(del.level));
    }
    touched.insert(del.level);
  }

  for (const auto& add : edit.added) {
    if (add.level < 1) return Status::InvariantViolation("add to level < 1");
    if (add.level > v->num_levels()) v->levels_.resize(add.level);
    LevelState& l = v->levels_[add.level - 1];
    auto run = std::find_if(l.runs.begin(), l.runs.end(),
                            [&](const SortedRun& r) { return r.run_id == add.run_id; });
    if (run == l.runs.end()) {
      l.runs.push_back(SortedRun{});
      run = l.runs.end() - 1;
      run->run_id = add.run_id;
    }
    auto pos = std::partition_point(run->files.begin(), run->files.end(),
                                    [&](const FileHandle& f) { return f->min_key < add.file->min_key; });
    run->files.insert(pos, add.file);
    touched.insert(add.level);
  }

  for (int lvl : touched) {
    LevelState& l = v->levels_[lvl - 1];
    std::erase_if(l.runs, [](const SortedRun& r) { return r.files.empty(); });
    std::sort(l.runs.begin(), l.runs.end(),
              [](const SortedRun& a, const SortedRun& b) { return a.run_id > b.run_id; });
    for (const auto& run : l.runs) LSMCLAB_RETURN_IF_ERROR(CheckRun(run));
    Recount(&l);
  }
  while (!v->levels_.empty() && v->levels_.back().empty()) v->levels_.pop_back();
  return VersionPtr(std::move(v));
}

StatusOr<std::unique_ptr<Manifest>> Manifest::Open(std::shared_ptr<Device> device) {
  std::unique_ptr<Manifest> m(new Manifest(std::move(device)));
  m->state_.version = std::make_shared<Version>();
  LSMCLAB_RETURN_IF_ERROR(m->Replay());

  std::unordered_set<std::string> live;
  for (const auto& f : m->state_.version->AllFiles()) live.insert(f->name());
  for (const auto& name : m->device_->ListFiles()) {
    if (name.size() > 4 && name.ends_with(".sst") && !live.count(name)) {
      LSMCLAB_RETURN_IF_ERROR(m->device_->RemoveFile(name));
    }
  }
  return m;
}

Status Manifest::Replay() {
  if (!device_->FileExists(kFileName)) return Status::OK();
  auto log = device_->ReadFile(kFileName);
  if (!log.ok()) return log.status();
  Decoder d(log->data);
  // Every file ever added, so that moves can find the handle again.
  std::unordered_map<uint64_t, FileHandle> handles;
  while (!d.empty()) {
    uint32_t len = 0, crc = 0;
    std::string_view payload;
    // A torn final record is ignored; only complete records count.
    if (!d.GetFixed32(&len) || !d.GetFixed32(&crc) || !d.GetBytes(len, &payload)) break;
    if (Crc32(payload) != crc) break;
    DecodedEdit de;
    LSMCLAB_RETURN_IF_ERROR(DecodeVersionEdit(payload, &de));
    VersionEdit edit;
    edit.deleted = de.deleted;
    for (auto& a : de.added) {
      auto it = handles.find(a.meta.file_id);
      FileHandle h;
      if (it != handles.end()) {
        h = it->second;
      } else {
        h = MakeFileHandle(a.meta, device_);
        handles.emplace(a.meta.file_id, h);
      }
      edit.added.push_back({a.level, a.run_id, h});
    }
    auto v = ApplyEdit(*state_.version, edit);
    if (!v.ok()) return v.status();
    state_.version = *v;
    state_.next_file_id = std::max(state_.next_file_id, de.next_file_id);
    state_.next_run_id = std::max(state_.next_run_id, de.next_run_id);
    state_.tick = std::max(state_.tick, de.tick);
    for (auto& [level, key] : de.rr_cursors) state_.rr_cursors[level] = key;
    records_++;
  }
  return state_.version->CheckConsistency();
}

Status Manifest::LogAndApply(const VersionEdit& edit) {
  auto next = ApplyEdit(*state_.version, edit);
  if (!next.ok()) return next.status();

  std::string payload;
  edit.EncodeTo(&payload);
  std::string record;
  PutFixed32(&record, static_cast<uint32_t>(payload.size()));
  PutFixed32(&record, Crc32(payload));
  record.append(payload);
  LSMCLAB_RETURN_IF_ERROR(device_->AppendFile(kFileName, record));

  std::unordered_set<uint64_t> readded;
  for (const auto& a : edit.added) readded.insert(a.file->file_id);
  for (const auto& del : edit.deleted) {
    if (readded.count(del.file_id)) continue;
    for (const auto& f : state_.version->level(del.level).runs) {
      for (const auto& h : f.files) {
        if (h->file_id == del.file_id) h->obsolete.store(true);
      }
    }
  }

  state_.version = *next;
  state_.next_file_id = std::max(state_.next_file_id, edit.next_file_id);
  state_.next_run_id = std::max(state_.next_run_id, edit.next_run_id);
  state_.tick = std::max(state_.tick, edit.tick);
  for (const auto& [level, key] : edit.rr_cursors) state_.rr_cursors[level] = key;
  records_++;
  return Status::OK();
}

}  // namespace lsmclab
