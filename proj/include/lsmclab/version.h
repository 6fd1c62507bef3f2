#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lsmclab/device.h"
#include "lsmclab/file_meta.h"
#include "lsmclab/options.h"
#include "lsmclab/status.h"

namespace lsmclab {

class Version;
using VersionPtr = std::shared_ptr<const Version>;
struct VersionEdit;

// Key-disjoint files ordered by min_key.
struct SortedRun {
  uint64_t run_id = 0;
  std::vector<FileHandle> files;
  uint64_t data_bytes = 0;
  uint64_t entry_count = 0;

  std::string_view min_key() const { return files.front()->min_key; }
  std::string_view max_key() const { return files.back()->max_key; }
  // Files whose key range intersects [lo, hi], as a half-open index range.
  std::pair<size_t, size_t> OverlappingRange(std::string_view lo, std::string_view hi) const;
  // File that may hold `key`, or nullptr.
  const FileHandle* FileFor(std::string_view key) const;
};

// Runs ordered newest first (descending run_id).
struct LevelState {
  std::vector<SortedRun> runs;
  uint64_t data_bytes = 0;
  uint64_t file_count = 0;

  bool empty() const { return runs.empty(); }
};

// Immutable tree shape. Readers hold a shared_ptr to the version current at
// the start of their operation.
class Version {
 public:
  Version() = default;

  // Number of allocated levels; trailing levels may be empty.
  int num_levels() const { return static_cast<int>(levels_.size()); }
  // 1-based. Levels past the end read as empty.
  const LevelState& level(int lvl) const;
  // 0 when the tree holds no files.
  int deepest_nonempty_level() const;
  int nonempty_level_count() const;
  uint64_t total_data_bytes() const;
  uint64_t total_entries() const;
  uint64_t file_count() const;
  std::vector<FileHandle> AllFiles() const;
  // Level holding the file, or 0.
  int LevelOf(uint64_t file_id) const;

  // Structural checks: run ordering, key disjointness, cached totals.
  Status CheckConsistency() const;
  std::string DebugString() const;

 private:
  friend StatusOr<VersionPtr> ApplyEdit(const Version& base, const VersionEdit& edit);
  std::vector<LevelState> levels_;
};

// One atomic manifest change. Moving a file is a delete plus an add of the
// same handle.
struct VersionEdit {
  struct AddedFile {
    int level = 0;
    uint64_t run_id = 0;
    FileHandle file;
  };
  struct DeletedFile {
    int level = 0;
    uint64_t file_id = 0;
  };

  std::vector<DeletedFile> deleted;
  std::vector<AddedFile> added;
  uint64_t next_file_id = 0;
  uint64_t next_run_id = 0;
  Tick tick = 0;
  // Round-robin cursor (last picked max_key) per level.
  std::map<int, std::string> rr_cursors;

  void EncodeTo(std::string* dst) const;
};

// An edit as read back from the log, before files are attached to a device.
struct DecodedEdit {
  struct AddedFile {
    int level = 0;
    uint64_t run_id = 0;
    FileMeta meta;
  };
  std::vector<VersionEdit::DeletedFile> deleted;
  std::vector<AddedFile> added;
  uint64_t next_file_id = 0;
  uint64_t next_run_id = 0;
  Tick tick = 0;
  std::map<int, std::string> rr_cursors;
};

Status DecodeVersionEdit(std::string_view in, DecodedEdit* out);

// Produces the version that results from applying `edit` to `base`.
StatusOr<VersionPtr> ApplyEdit(const Version& base, const VersionEdit& edit);

// Recovered state of a manifest log.
struct ManifestState {
  VersionPtr version;
  uint64_t next_file_id = 1;
  uint64_t next_run_id = 1;
  Tick tick = 0;
  std::map<int, std::string> rr_cursors;
};

// Append-only log of version edits. Each record is framed as
// u32 length, u32 crc32(payload), payload.
class Manifest {
 public:
  static constexpr const char* kFileName = "MANIFEST";

  // Replays the log (if any) and removes sorted files it does not reference.
  static StatusOr<std::unique_ptr<Manifest>> Open(std::shared_ptr<Device> device);

  // Appends the edit and installs the resulting version. On failure the
  // current state is unchanged.
  Status LogAndApply(const VersionEdit& edit);

  const ManifestState& state() const { return state_; }
  VersionPtr current() const { return state_.version; }
  uint64_t records() const { return records_; }

 private:
  explicit Manifest(std::shared_ptr<Device> device) : device_(std::move(device)) {}
  Status Replay();

  std::shared_ptr<Device> device_;
  ManifestState state_;
  uint64_t records_ = 0;
};

}  // namespace lsmclab
