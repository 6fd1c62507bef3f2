#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsmclab/options.h"
#include "lsmclab/status.h"

namespace lsmclab {

// When a compaction starts.
struct Trigger {
  enum class Kind {
    kLevelSaturation,   // level bytes > value * capacity
    kSortedRunCount,    // runs in level >= value
    kFileStaleness,     // now - created_tick > value
    kSpaceAmp,          // measured space amplification > value
    kTombstoneTTL,      // tombstone age > level share of value (D_th)
    kTombstoneDensity,  // tombstones / entries >= value in some file
  };
  // Which levels the trigger watches in a hybrid layout.
  enum class Scope { kAll, kTiered, kLeveled };

  Kind kind = Kind::kLevelSaturation;
  double value = 1.0;
  Scope scope = Scope::kAll;

  static Trigger LevelSaturation(double threshold = 1.0) { return {Kind::kLevelSaturation, threshold}; }
  static Trigger SortedRunCount(int k) { return {Kind::kSortedRunCount, static_cast<double>(k)}; }
  static Trigger FileStaleness(Tick ttl) { return {Kind::kFileStaleness, static_cast<double>(ttl)}; }
  static Trigger SpaceAmp(double max_ratio) { return {Kind::kSpaceAmp, max_ratio}; }
  static Trigger TombstoneTTL(Tick d_th) { return {Kind::kTombstoneTTL, static_cast<double>(d_th)}; }
  static Trigger TombstoneDensity(double min_fraction) { return {Kind::kTombstoneDensity, min_fraction}; }

  Trigger Scoped(Scope s) const {
    Trigger t = *this;
    t.scope = s;
    return t;
  }

  Status Validate() const;
  std::string ToString() const;
  friend bool operator==(const Trigger&, const Trigger&) = default;
};

// How runs are arranged per level.
struct DataLayout {
  enum class Kind { kLeveling, kTiering, kOneLeveling, kLLeveling, kHybrid };

  Kind kind = Kind::kLeveling;
  // For kHybrid: entry i describes level i+1; levels past the end repeat the
  // last entry.
  std::vector<bool> tiered;

  // `last_level` is the deepest level of the tree (used by L-leveling).
  bool IsTiered(int level, int last_level) const;

  std::string ToString() const;
  friend bool operator==(const DataLayout&, const DataLayout&) = default;
};

// How much data one job moves out of a leveled level. Tiered levels always
// compact whole runs.
struct Granularity {
  enum class Kind { kLevel, kSortedRun, kFile, kFiles };
  Kind kind = Kind::kFile;
  int n = 1;

  static Granularity Level() { return {Kind::kLevel, 0}; }
  static Granularity SortedRun() { return {Kind::kSortedRun, 0}; }
  static Granularity File() { return {Kind::kFile, 1}; }
  static Granularity Files(int n = 2) { return {Kind::kFiles, n}; }

  bool per_file() const { return kind == Kind::kFile || kind == Kind::kFiles; }
  int files_per_job() const { return kind == Kind::kFiles ? n : 1; }

  std::string ToString() const;
  friend bool operator==(const Granularity&, const Granularity&) = default;
};

// Which file(s) a per-file job picks. Policies are tried in chain order; a
// policy may abstain, the last one never does.
enum class MovementPolicy {
  kRoundRobin,
  kLeastOverlapParent,
  kLeastOverlapGrandparent,
  kColdest,
  kOldest,
  kMostTombstones,
  kExpiredTombstoneTTL,
  kEntireLevel,
};

const char* MovementPolicyName(MovementPolicy p);
bool PolicyMayAbstain(MovementPolicy p);

struct CompactionStrategy {
  std::string name;
  std::vector<Trigger> triggers;
  DataLayout layout;
  Granularity granularity;
  std::vector<MovementPolicy> movement;

  Status Validate() const;
  std::string ToString() const;
  // Equal ensembles, ignoring the name.
  bool SamePrimitives(const CompactionStrategy& o) const {
    return triggers == o.triggers && layout == o.layout && granularity == o.granularity &&
           movement == o.movement;
  }
};

// Knobs of the presets that the paper leaves open.
struct PresetOptions {
  int size_ratio = 10;
  // Needed by "tsa".
  std::optional<Tick> delete_persistence_threshold;
  double tsd_density = 0.05;
  double tier_space_amp = 0.5;
};

// The ten named strategies: full, lo1, cold, old, tsd, rr, lo2, tsa, tier, 1lvl.
const std::vector<std::string>& PresetNames();
StatusOr<CompactionStrategy> MakePreset(std::string_view name, const PresetOptions& opts);

// Builds a strategy from flat key/value settings: either preset = NAME, or
// the explicit keys triggers, layout, granularity, movement.
StatusOr<CompactionStrategy> StrategyFromSettings(const std::map<std::string, std::string>& kv,
                                                  const PresetOptions& opts);

StatusOr<Trigger> ParseTrigger(std::string_view text);
StatusOr<DataLayout> ParseLayout(std::string_view text);
StatusOr<Granularity> ParseGranularity(std::string_view text);
StatusOr<MovementPolicy> ParseMovementPolicy(std::string_view text);

}  // namespace lsmclab
