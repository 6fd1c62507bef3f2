#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lsmclab/device.h"
#include "lsmclab/options.h"
#include "lsmclab/strategy.h"
#include "lsmclab/version.h"

namespace lsmclab {

// Inputs the trigger and picking logic read besides the version itself.
struct PickContext {
  const TreeConfig* cfg = nullptr;
  Tick now = 0;
  // Measured space amplification of the on-disk tree.
  double space_amp = 0.0;
  const std::map<int, std::string>* rr_cursors = nullptr;
};

struct FiringTrigger {
  int level = 0;
  // Index into strategy.triggers; -1 for the leveling run limit.
  int trigger_index = -1;
  Trigger trigger;

  bool run_limit() const { return trigger_index < 0; }
};

// Deepest level used as "L" by per-level rules (at least 1).
int TreeDepth(const Version& v);

// Age beyond which a tombstone in `level` must move on: level * D_th / depth.
double TombstoneLevelTTL(int level, int depth, double d_th);

// All firing triggers, strategy order first, then shallower level first. A
// leveled level holding more than one run (after a flush) always comes first.
std::vector<FiringTrigger> EvaluateTriggers(const Version& v, const CompactionStrategy& s,
                                            const PickContext& ctx);

// First tick at which a time-based trigger (tombstone TTL, file staleness)
// will fire with the current version, if any.
std::optional<Tick> NextTimedEvent(const Version& v, const CompactionStrategy& s, const PickContext& ctx);

struct JobFile {
  int level = 0;
  FileHandle file;
};

struct CompactionJob {
  FiringTrigger cause;
  int source_level = 0;
  int target_level = 0;
  std::vector<JobFile> victims;
  std::vector<JobFile> targets;
  bool pseudo = false;
  // Run the output joins; 0 means a fresh run.
  uint64_t output_run_id = 0;
  // Policy that picked the victims (per-file granularity only).
  std::optional<MovementPolicy> policy;
  // New round-robin cursor for the source level.
  std::optional<std::string> rr_cursor;

  std::string ToString() const;
};

// Builds the job for one firing trigger.
StatusOr<CompactionJob> SelectCompaction(const Version& v, const FiringTrigger& ft,
                                         const CompactionStrategy& s, const PickContext& ctx);

struct CompactionResult {
  uint64_t bytes_read = 0;
  uint64_t bytes_written = 0;
  uint64_t pages_read = 0;
  uint64_t pages_written = 0;
  uint64_t entries_read = 0;
  uint64_t entries_written = 0;
  uint64_t entries_dropped = 0;
  uint64_t tombstones_dropped = 0;
  std::vector<FileHandle> outputs;
  // Edit that installs the outputs; the caller logs it.
  VersionEdit edit;
};

struct CompactionEnv {
  const TreeConfig* cfg = nullptr;
  std::shared_ptr<Device> device;
  uint64_t* next_file_id = nullptr;
  uint64_t* next_run_id = nullptr;
  Tick now = 0;
};

// Merges the job's inputs and writes the output files. Nothing is installed;
// on failure every output already written is removed again.
StatusOr<CompactionResult> ExecuteCompaction(const Version& v, const CompactionJob& job,
                                             const CompactionEnv& env);

// Drops the outputs of a result whose edit could not be installed.
void DiscardOutputs(const CompactionResult& r);

}  // namespace lsmclab
