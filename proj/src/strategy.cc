#include "lsmclab/strategy.h"

#include <charconv>
#include <cmath>
#include <sstream>

#include "lsmclab/strutil.h"

namespace lsmclab {

namespace {

struct TriggerName {
  Trigger::Kind kind;
  const char* name;
};
constexpr TriggerName kTriggerNames[] = {
    {Trigger::Kind::kLevelSaturation, "level_saturation"},
    {Trigger::Kind::kSortedRunCount, "sorted_runs"},
    {Trigger::Kind::kFileStaleness, "file_staleness"},
    {Trigger::Kind::kSpaceAmp, "space_amp"},
    {Trigger::Kind::kTombstoneTTL, "tombstone_ttl"},
    {Trigger::Kind::kTombstoneDensity, "tombstone_density"},
};

struct PolicyName {
  MovementPolicy policy;
  const char* name;
};
constexpr PolicyName kPolicyNames[] = {
    {MovementPolicy::kRoundRobin, "round_robin"},
    {MovementPolicy::kLeastOverlapParent, "least_overlap_parent"},
    {MovementPolicy::kLeastOverlapGrandparent, "least_overlap_grandparent"},
    {MovementPolicy::kColdest, "coldest"},
    {MovementPolicy::kOldest, "oldest"},
    {MovementPolicy::kMostTombstones, "most_tombstones"},
    {MovementPolicy::kExpiredTombstoneTTL, "expired_ttl"},
    {MovementPolicy::kEntireLevel, "entire_level"},
};

const char* TriggerKindName(Trigger::Kind k) {
  for (const auto& t : kTriggerNames) {
    if (t.kind == k) return t.name;
  }
  return "?";
}

std::string FormatNumber(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

Status Trigger::Validate() const {
  switch (kind) {
    case Kind::kLevelSaturation:
      if (!(value > 0 && value <= 2)) return Status::InvalidArgument("level saturation threshold must be in (0, 2]");
      break;
    case Kind::kSortedRunCount:
      if (!(value >= 2) || value != std::floor(value)) return Status::InvalidArgument("sorted run limit must be an integer >= 2");
      break;
    case Kind::kFileStaleness:
      if (!(value > 0)) return Status::InvalidArgument("file staleness ttl must be > 0");
      break;
    case Kind::kSpaceAmp:
      if (!(value > 0)) return Status::InvalidArgument("space amplification limit must be > 0");
      break;
    case Kind::kTombstoneTTL:
      if (!(value > 0)) return Status::InvalidArgument("delete persistence threshold must be > 0");
      break;
    case Kind::kTombstoneDensity:
      if (!(value > 0 && value <= 1)) return Status::InvalidArgument("tombstone density must be in (0, 1]");
      break;
  }
  return Status::OK();
}

std::string Trigger::ToString() const {
  std::string s = std::string(TriggerKindName(kind)) + ":" + FormatNumber(value);
  if (scope == Scope::kTiered) s += "@tiered";
  if (scope == Scope::kLeveled) s += "@leveled";
  return s;
}

bool DataLayout::IsTiered(int level, int last_level) const {
  switch (kind) {
    case Kind::kLeveling: return false;
    case Kind::kTiering: return true;
    case Kind::kOneLeveling: return level == 1;
    case Kind::kLLeveling: return level < std::max(last_level, 1);
    case Kind::kHybrid:
      if (tiered.empty()) return false;
      return tiered[std::min<size_t>(level - 1, tiered.size() - 1)];
  }
  return false;
}

std::string DataLayout::ToString() const {
  switch (kind) {
    case Kind::kLeveling: return "leveling";
    case Kind::kTiering: return "tiering";
    case Kind::kOneLeveling: return "1leveling";
    case Kind::kLLeveling: return "lleveling";
    case Kind::kHybrid: {
      std::string s = "hybrid:";
      for (bool t : tiered) s.push_back(t ? 't' : 'l');
      return s;
    }
  }
  return "?";
}

std::string Granularity::ToString() const {
  switch (kind) {
    case Kind::kLevel: return "level";
    case Kind::kSortedRun: return "sorted_run";
    case Kind::kFile: return "file";
    case Kind::kFiles: return "files:" + std::to_string(n);
  }
  return "?";
}

const char* MovementPolicyName(MovementPolicy p) {
  for (const auto& e : kPolicyNames) {
    if (e.policy == p) return e.name;
  }
  return "?";
}

bool PolicyMayAbstain(MovementPolicy p) {
  return p == MovementPolicy::kMostTombstones || p == MovementPolicy::kExpiredTombstoneTTL;
}

Status CompactionStrategy::Validate() const {
  if (triggers.empty()) return Status::InvalidArgument("strategy needs at least one trigger");
  for (const auto& t : triggers) LSMCLAB_RETURN_IF_ERROR(t.Validate());
  if (layout.kind == DataLayout::Kind::kHybrid && layout.tiered.empty()) {
    return Status::InvalidArgument("hybrid layout needs per-level flags");
  }
  if (granularity.kind == Granularity::Kind::kFiles && granularity.n < 2) {
    return Status::InvalidArgument("files granularity needs n >= 2");
  }
  if (movement.empty()) return Status::InvalidArgument("movement chain must not be empty");
  if (PolicyMayAbstain(movement.back())) {
    return Status::InvalidArgument(std::string("movement chain must end in a decidable policy, not ") +
                                   MovementPolicyName(movement.back()));
  }
  const bool whole = granularity.kind == Granularity::Kind::kLevel ||
                     granularity.kind == Granularity::Kind::kSortedRun;
  for (auto p : movement) {
    if (p == MovementPolicy::kEntireLevel && !whole) {
      return Status::InvalidArgument("entire_level movement requires level or sorted_run granularity");
    }
  }
  return Status::OK();
}

std::string CompactionStrategy::ToString() const {
  std::string s = "name=" + name + " triggers=";
  for (size_t i = 0; i < triggers.size(); ++i) s += (i ? "," : "") + triggers[i].ToString();
  s += " layout=" + layout.ToString() + " granularity=" + granularity.ToString() + " movement=";
  for (size_t i = 0; i < movement.size(); ++i) s += std::string(i ? "," : "") + MovementPolicyName(movement[i]);
  return s;
}

const std::vector<std::string>& PresetNames() {
  static const std::vector<std::string> names = {"full", "lo1", "cold", "old", "tsd",
                                                 "rr",   "lo2", "tsa",  "tier", "1lvl"};
  return names;
}

StatusOr<CompactionStrategy> MakePreset(std::string_view name, const PresetOptions& opts) {
  using MP = MovementPolicy;
  CompactionStrategy s;
  s.name = std::string(name);
  s.layout.kind = DataLayout::Kind::kLeveling;
  s.granularity = Granularity::File();
  s.triggers = {Trigger::LevelSaturation()};

  if (name == "full") {
    s.granularity = Granularity::Level();
    s.movement = {MP::kEntireLevel};
  } else if (name == "lo1") {
    s.movement = {MP::kLeastOverlapParent};
  } else if (name == "cold") {
    s.movement = {MP::kColdest};
  } else if (name == "old") {
    s.movement = {MP::kOldest};
  } else if (name == "tsd") {
    s.triggers = {Trigger::TombstoneDensity(opts.tsd_density), Trigger::LevelSaturation()};
    s.movement = {MP::kMostTombstones, MP::kLeastOverlapParent};
  } else if (name == "rr") {
    s.movement = {MP::kRoundRobin};
  } else if (name == "lo2") {
    s.movement = {MP::kLeastOverlapGrandparent};
  } else if (name == "tsa") {
    if (!opts.delete_persistence_threshold) {
      return Status::InvalidArgument("tsa needs a delete persistence threshold");
    }
    s.triggers = {Trigger::TombstoneTTL(*opts.delete_persistence_threshold), Trigger::LevelSaturation()};
    s.movement = {MP::kExpiredTombstoneTTL, MP::kLeastOverlapParent};
  } else if (name == "tier") {
    s.layout.kind = DataLayout::Kind::kTiering;
    s.granularity = Granularity::SortedRun();
    s.triggers = {Trigger::SortedRunCount(opts.size_ratio), Trigger::SpaceAmp(opts.tier_space_amp)};
    s.movement = {MP::kEntireLevel};
  } else if (name == "1lvl") {
    s.layout.kind = DataLayout::Kind::kOneLeveling;
    s.triggers = {Trigger::SortedRunCount(opts.size_ratio).Scoped(Trigger::Scope::kTiered),
                  Trigger::LevelSaturation().Scoped(Trigger::Scope::kLeveled)};
    s.movement = {MP::kLeastOverlapParent};
  } else {
    return Status::InvalidArgument("unknown strategy preset '" + std::string(name) + "'");
  }
  LSMCLAB_RETURN_IF_ERROR(s.Validate());
  return s;
}

StatusOr<Trigger> ParseTrigger(std::string_view text) {
  text = Trim(text);
  Trigger::Scope scope = Trigger::Scope::kAll;
  if (auto at = text.find('@'); at != std::string_view::npos) {
    std::string_view sc = text.substr(at + 1);
    if (sc == "tiered") scope = Trigger::Scope::kTiered;
    else if (sc == "leveled") scope = Trigger::Scope::kLeveled;
    else return Status::InvalidArgument("unknown trigger scope '" + std::string(sc) + "'");
    text = text.substr(0, at);
  }
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  for (const auto& t : kTriggerNames) {
    if (kind != t.name) continue;
    Trigger trig{t.kind, 1.0, scope};
    if (colon == std::string_view::npos) {
      if (t.kind != Trigger::Kind::kLevelSaturation) {
        return Status::InvalidArgument("trigger '" + std::string(kind) + "' needs a value");
      }
    } else {
      auto v = ParseDouble(text.substr(colon + 1));
      if (!v) return Status::InvalidArgument("bad trigger value in '" + std::string(text) + "'");
      trig.value = *v;
    }
    LSMCLAB_RETURN_IF_ERROR(trig.Validate());
    return trig;
  }
  return Status::InvalidArgument("unknown trigger '" + std::string(kind) + "'");
}

StatusOr<DataLayout> ParseLayout(std::string_view text) {
  text = Trim(text);
  DataLayout l;
  if (text == "leveling") l.kind = DataLayout::Kind::kLeveling;
  else if (text == "tiering") l.kind = DataLayout::Kind::kTiering;
  else if (text == "1leveling") l.kind = DataLayout::Kind::kOneLeveling;
  else if (text == "lleveling") l.kind = DataLayout::Kind::kLLeveling;
  else if (text.starts_with("hybrid:")) {
    l.kind = DataLayout::Kind::kHybrid;
    for (char c : text.substr(7)) {
      if (c == 't') l.tiered.push_back(true);
      else if (c == 'l') l.tiered.push_back(false);
      else return Status::InvalidArgument("hybrid layout flags must be 't' or 'l'");
    }
    if (l.tiered.empty()) return Status::InvalidArgument("hybrid layout needs per-level flags");
  } else {
    return Status::InvalidArgument("unknown layout '" + std::string(text) + "'");
  }
  return l;
}

StatusOr<Granularity> ParseGranularity(std::string_view text) {
  text = Trim(text);
  if (text == "level") return Granularity::Level();
  if (text == "sorted_run") return Granularity::SortedRun();
  if (text == "file") return Granularity::File();
  if (text == "files") return Granularity::Files();
  if (text.starts_with("files:")) {
    auto n = ParseInt(text.substr(6));
    if (!n || *n < 2) return Status::InvalidArgument("files granularity needs n >= 2");
    return Granularity::Files(static_cast<int>(*n));
  }
  return Status::InvalidArgument("unknown granularity '" + std::string(text) + "'");
}

StatusOr<MovementPolicy> ParseMovementPolicy(std::string_view text) {
  text = Trim(text);
  for (const auto& e : kPolicyNames) {
    if (text == e.name) return e.policy;
  }
  return Status::InvalidArgument("unknown movement policy '" + std::string(text) + "'");
}

StatusOr<CompactionStrategy> StrategyFromSettings(const std::map<std::string, std::string>& kv,
                                                  const PresetOptions& opts) {
  if (auto it = kv.find("preset"); it != kv.end()) {
    for (const char* k : {"triggers", "layout", "granularity", "movement"}) {
      if (kv.count(k)) return Status::InvalidArgument(std::string("'preset' and '") + k + "' are exclusive");
    }
    return MakePreset(Trim(it->second), opts);
  }
  CompactionStrategy s;
  auto get = [&](const char* key) -> StatusOr<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return Status::InvalidArgument(std::string("strategy is missing '") + key + "'");
    return it->second;
  };
  auto name = kv.find("name");
  s.name = name != kv.end() ? std::string(Trim(name->second)) : "custom";

  auto triggers = get("triggers");
  if (!triggers.ok()) return triggers.status();
  for (auto part : Split(*triggers, ',')) {
    auto t = ParseTrigger(part);
    if (!t.ok()) return t.status();
    s.triggers.push_back(*t);
  }
  auto layout = get("layout");
  if (!layout.ok()) return layout.status();
  auto l = ParseLayout(*layout);
  if (!l.ok()) return l.status();
  s.layout = *l;

  auto gran = get("granularity");
  if (!gran.ok()) return gran.status();
  auto g = ParseGranularity(*gran);
  if (!g.ok()) return g.status();
  s.granularity = *g;

  auto movement = get("movement");
  if (!movement.ok()) return movement.status();
  for (auto part : Split(*movement, ',')) {
    auto p = ParseMovementPolicy(part);
    if (!p.ok()) return p.status();
    s.movement.push_back(*p);
  }
  LSMCLAB_RETURN_IF_ERROR(s.Validate());
  return s;
}

}  // namespace lsmclab
