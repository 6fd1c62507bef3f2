// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "lsmclab/bloom.h"
#include "lsmclab/cost_model.h"
#include "lsmclab/engine.h"
#include "lsmclab/experiment.h"
#include "lsmclab/strutil.h"
#include "lsmclab/workload.h"

namespace lsmclab {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Runs of one suite, in a fixed order, plus anything the check needs that
// the CSV does not carry.
struct SuiteRuns {
  std::vector<RunResult> runs;
  std::map<std::string, double> extra;
  Status status;

  const RunResult& Get(const std::string& strategy, uint64_t seed = 0) const {
    for (const auto& r : runs) {
      if (r.strategy == strategy && (seed == 0 || r.seed == seed)) return r;
    }
    std::fprintf(stderr, "no run for %s\n", strategy.c_str());
    std::abort();
  }
  std::string Csv() const {
    std::string csv = CsvHeader();
    for (const auto& r : runs) csv += CsvRow(r);
    return csv;
  }
};

// Leveled desk-scale tree: 1024 entries of 128 bytes per buffer.
TreeConfig DeskTree() {
  TreeConfig t;
  t.size_ratio = 10;
  t.buffer_bytes = 128 * kKiB;
  t.page_bytes = 4 * kKiB;
  t.entry_bytes = 128;
  t.block_cache_bytes = 0;
  return t;
}

ExperimentConfig MakeConfig(const TreeConfig& tree, const WorkloadSpec& w) {
  ExperimentConfig cfg;
  cfg.tree = tree;
  cfg.preset_opts.size_ratio = tree.size_ratio;
  cfg.workload = w;
  cfg.workload.entry_bytes = tree.entry_bytes;
  return cfg;
}

// Runs one preset through the same path as the CLI.
Status RunPreset(ExperimentConfig cfg, const std::string& preset, SuiteRuns* out) {
  cfg.strategies = {preset};
  auto ops = WorkloadOpCount(cfg);
  if (!ops.ok()) return ops.status();
  auto strategies = ResolveStrategies(cfg, *ops);
  if (!strategies.ok()) return strategies.status();
  auto r = RunOnce(cfg, strategies->front(), cfg.workload.seed);
  if (!r.ok()) return r.status().WithContext(preset);
  out->runs.push_back(std::move(*r));
  return Status::OK();
}

double CompactionBytes(const RunResult& r) {
  return static_cast<double>(r.report.bytes_compaction_read + r.report.bytes_compaction_written);
}

std::string Num(double v) { return StringPrintf("%.4g", v); }

// ---- 1. oracle equivalence -------------------------------------------------

WorkloadSpec RandomSpec(std::mt19937_64& rng, int i) {
  auto pick = [&](std::initializer_list<double> xs) { return *(xs.begin() + UniformInt(rng, xs.size())); };
  WorkloadSpec w;
  w.inserts = 2000 + UniformInt(rng, 10000);
  w.update_ratio = pick({0, 0.5, 1, 3});
  w.delete_fraction = pick({0, 0.1, 0.3});
  w.point_lookups = UniformInt(rng, 3000);
  w.alpha = pick({0, 0.5, 1});
  w.range_lookups = UniformInt(rng, 120);
  w.selectivity = pick({0.0005, 0.005, 0.02});
  const Distribution dists[] = {Distribution::Uniform(), Distribution::Normal(), Distribution::Zipfian(1.0),
                                Distribution::PrefixZipf(1.0, 2)};
  w.insert_dist = dists[UniformInt(rng, 4)];
  w.lookup_dist = dists[UniformInt(rng, 4)];
  w.interleaving = UniformInt(rng, 2) ? Interleaving::kInterleaved : Interleaving::kSerial;
  w.seed = 1000 + static_cast<uint64_t>(i);
  return w;
}

SuiteRuns OracleSuite() {
  SuiteRuns s;
  std::mt19937_64 rng(20240501);
  for (int i = 0; i < 50; ++i) {
    const WorkloadSpec w = RandomSpec(rng, i);
    TreeConfig tree;
    tree.size_ratio = 2 + static_cast<int>(UniformInt(rng, 5));
    tree.buffer_bytes = 4096;
    tree.page_bytes = 512;
    tree.entry_bytes = 64;
    tree.block_cache_bytes = UniformInt(rng, 2) ? 64 * kKiB : 0;
    ExperimentConfig cfg = MakeConfig(tree, w);
    cfg.verify = true;
    cfg.delete_persistence_pct = 33;
    for (const auto& preset : PresetNames()) {
      s.status = RunPreset(cfg, preset, &s);
      if (!s.status.ok()) {
        s.status = s.status.WithContext("spec " + std::to_string(i) + " " + w.ToString());
        return s;
      }
    }
  }
  return s;
}

Outcome CheckOracle(const SuiteRuns& s) {
  if (!s.status.ok()) return {false, s.status.ToString()};
  uint64_t ops = 0, max_ops = 0;
  for (const auto& r : s.runs) {
    ops += r.operations;
    max_ops = std::max(max_ops, r.operations);
  }
  return {s.runs.size() == 500 && max_ops <= 100000,
          StringPrintf("%zu verified runs (50 specs x %zu presets), %llu ops, zero mismatches", s.runs.size(),
                       PresetNames().size(), static_cast<unsigned long long>(ops))};
}

// ---- 2. level count --------------------------------------------------------

struct LevelCase {
  int T;
  uint64_t buffer_bytes;
  int L;  // the N chosen sits geometrically mid-way inside this level
};
const LevelCase kLevelCases[] = {{2, 4096, 5},  {3, 4096, 4},  {3, 8192, 3}, {4, 8192, 3},
                                 {4, 4096, 4},  {5, 4096, 3},  {6, 16384, 2}, {10, 4096, 2},
                                 {10, 4096, 3}};

uint64_t MidLevelEntries(const LevelCase& c, uint64_t pb) {
  return static_cast<uint64_t>(static_cast<double>(pb) * std::pow(c.T, c.L + 0.5) / (c.T - 1));
}

TreeConfig LevelTree(const LevelCase& c) {
  TreeConfig t;
  t.size_ratio = c.T;
  t.buffer_bytes = c.buffer_bytes;
  t.page_bytes = 512;
  t.entry_bytes = 64;
  t.block_cache_bytes = 0;
  return t;
}

SuiteRuns LevelSuite() {
  SuiteRuns s;
  for (const auto& c : kLevelCases) {
    const TreeConfig tree = LevelTree(c);
    WorkloadSpec w;
    w.inserts = MidLevelEntries(c, tree.entries_per_buffer());
    w.seed = 7;
    // File-at-a-time leveling: whole-level moves would leave hollow levels.
    s.status = RunPreset(MakeConfig(tree, w), "lo1", &s);
    if (!s.status.ok()) return s;
  }
  return s;
}

Outcome CheckLevels(const SuiteRuns& s) {
  if (!s.status.ok()) return {false, s.status.ToString()};
  bool ok = true;
  std::string d;
  for (size_t i = 0; i < std::size(kLevelCases); ++i) {
    const auto& c = kLevelCases[i];
    const TreeConfig tree = LevelTree(c);
    const auto& r = s.runs[i];
    const int model = model::LevelCount(static_cast<double>(r.inserts), static_cast<double>(tree.pages_per_buffer()),
                                        tree.entries_per_page(), c.T);
    const int realized = r.report.disk_levels;
    ok &= model == realized;
    d += StringPrintf("%sT=%d N=%llu model=%d realized=%d", i ? "; " : "", c.T,
                      static_cast<unsigned long long>(r.inserts), model, realized);
  }
  return {ok, d};
}

// ---- 3, 4, 5. insert-only 1M -----------------------------------------------

const char* const kInsertPresets[] = {"full", "lo1", "lo2", "rr", "cold", "old", "tsd", "tsa", "tier"};
const char* const kPartialPresets[] = {"lo1", "lo2", "rr", "cold", "old", "tsd", "tsa"};

SuiteRuns InsertOnlySuite() {
  SuiteRuns s;
  WorkloadSpec w;
  w.inserts = 1000000;
  w.seed = 11;
  ExperimentConfig cfg = MakeConfig(DeskTree(), w);
  cfg.delete_persistence_pct = 33;
  for (const char* p : kInsertPresets) {
    s.status = RunPreset(cfg, p, &s);
    if (!s.status.ok()) return s;
  }
  return s;
}

int RealizedL(const SuiteRuns& s) { return s.Get("lo1").report.disk_levels; }

Outcome CheckCompactionCount(const SuiteRuns& s) {
  if (!s.status.ok()) return {false, s.status.ToString()};
  const double lo1 = static_cast<double>(s.Get("lo1").report.compaction_count);
  const double full = static_cast<double>(s.Get("full").report.compaction_count);
  const int L = RealizedL(s);
  const double ratio = lo1 / full;
  return {ratio >= 0.5 * L && ratio <= 1.5 * L,
          StringPrintf("count(lo1)/count(full) = %.0f/%.0f = %.3f, L = %d, band [%.1f, %.1f]", lo1, full, ratio, L,
                       0.5 * L, 1.5 * L)};
}

Outcome CheckDataMovement(const SuiteRuns& s) {
  if (!s.status.ok()) return {false, s.status.ToString()};
  const double full = CompactionBytes(s.Get("full"));
  const double tier = CompactionBytes(s.Get("tier"));
  bool ok = true;
  std::string d = "bytes: full=" + Num(full) + " tier=" + Num(tier);
  for (const char* p : kPartialPresets) {
    const double b = CompactionBytes(s.Get(p));
    const double less = 1 - b / full;
    ok &= tier < b && b < full && less >= 0.2 && less <= 0.7;
    d += StringPrintf(" %s=%s (%+.0f%%)", p, Num(b).c_str(), -100 * less);
  }
  return {ok, d + "; need tier < partial < full, partial 20-70% below full"};
}

Outcome CheckWriteAmpBand(const SuiteRuns& s) {
  if (!s.status.ok()) return {false, s.status.ToString()};
  const int L = RealizedL(s);
  const int T = DeskTree().size_ratio;
  const double full = s.Get("full").report.write_amp;
  const double tier = s.Get("tier").report.write_amp;
  const double est_full = model::WriteAmpEstimate(T, L, L);
  const double est_tier = model::WriteAmpEstimate(T, L, 0);
  const double rf = full / est_full, rt = tier / est_tier;
  return {rf >= 0.5 && rf <= 2.0 && rt >= 0.5 && rt <= 2.0,
          StringPrintf("full WA %.2f / est %.0f = %.2f; tier WA %.2f / est %.0f = %.2f; L = %d", full, est_full, rf,
                       tier, est_tier, rt, L)};
}

// ---- 6. pseudo compaction --------------------------------------------------

// Ascending keys: every flush lands beyond the key range already on disk.
SuiteRuns PseudoSuite() {
  SuiteRuns s;
  const auto dir = std::filesystem::temp_directory_path() / "lsmclab_acceptance";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "ascending.txt").string();
  {
    std::ofstream out(path, std::ios::trunc);
    WorkloadWriter writer(&out);
    for (uint64_t i = 0; i < 20000; ++i) writer.Write({Operation::Type::kInsert, EncodeKey(i, 16), "v"});
  }
  TreeConfig tree = DeskTree();
  tree.buffer_bytes = 16 * kKiB;
  ExperimentConfig cfg = MakeConfig(tree, WorkloadSpec{});
  cfg.workload_file = path;
  cfg.verify = true;
  for (const char* p : {"lo1", "full"}) {
    s.status = RunPreset(cfg, p, &s);
    if (!s.status.ok()) break;
  }
  std::filesystem::remove_all(dir);
  return s;
}

Outcome CheckPseudo(const SuiteRuns& s) {
  if (!s.status.ok()) return {false, s.status.ToString()};
  bool ok = true;
  std::string d;
  for (const auto& r : s.runs) {
    const auto& m = r.report;
    ok &= m.pseudo_compaction_count >= 1 && m.bytes_compaction_read == 0 && m.bytes_compaction_written == 0;
    d += StringPrintf("%s: %llu pseudo of %llu jobs, read=%llu written=%llu; ", r.strategy.c_str(),
                      static_cast<unsigned long long>(m.pseudo_compaction_count),
                      static_cast<unsigned long long>(m.compaction_count),
                      static_cast<unsigned long long>(m.bytes_compaction_read),
                      static_cast<unsigned long long>(m.bytes_compaction_written));
  }
  return {ok, d + "disk levels key-disjoint"};
}

// ---- 7. bloom FPR ----------------------------------------------------------

SuiteRuns BloomSuite() {
  SuiteRuns s;
  BloomFilterBuilder b(10);
  const uint64_t n = 100000;
  for (uint64_t i = 0; i < n; ++i) b.AddKey(EncodeKey(2 * i, 16));
  const uint32_t probes = b.num_probes();
  const std::string bits = b.Finish();
  BloomFilterView f(bits, probes);
  uint64_t fp = 0, fn = 0;
  for (uint64_t i = 0; i < n; ++i) fn += f.MayContain(EncodeKey(2 * i, 16)) ? 0 : 1;
  for (uint64_t i = 0; i < 100000; ++i) fp += f.MayContain(EncodeKey(2 * i + 1, 16)) ? 1 : 0;
  s.extra["fpr"] = static_cast<double>(fp) / 100000;
  s.extra["false_negatives"] = static_cast<double>(fn);
  return s;
}

Outcome CheckBloom(const SuiteRuns& s) {
  const double fpr = s.extra.at("fpr");
  return {std::abs(fpr - 0.0082) <= 0.004 && s.extra.at("false_negatives") == 0,
          StringPrintf("measured FPR %.4f over 1e5 absent probes (target 0.0082 +- 0.004), model %.4f", fpr,
                       FilterFalsePositiveRate(10))};
}

// ---- 8. point-lookup I/O ---------------------------------------------------

SuiteRuns LookupSuite() {
  SuiteRuns s;
  for (double alpha : {0.0, 1.0}) {
    WorkloadSpec w;
    w.inserts = 1000000;
    w.point_lookups = 20000;
    w.alpha = alpha;
    w.seed = 13;
    for (const char* p : {"full", "tier"}) {
      s.status = RunPreset(MakeConfig(DeskTree(), w), p, &s);
      if (!s.status.ok()) return s;
    }
  }
  return s;
}

Outcome CheckLookupIo(const SuiteRuns& s) {
  if (!s.status.ok()) return {false, s.status.ToString()};
  const int T = DeskTree().size_ratio;
  bool ok = true;
  std::string d;
  for (size_t i = 0; i + 1 < s.runs.size(); i += 2) {
    const auto& lev = s.runs[i].report;
    const auto& tier = s.runs[i + 1].report;
    const double a = static_cast<double>(lev.lookup_data_pages) / static_cast<double>(lev.point_lookups);
    const double b = static_cast<double>(tier.lookup_data_pages) / static_cast<double>(tier.point_lookups);
    const double ratio = b / a;
    ok &= ratio >= 1.05 && ratio <= T;
    d += StringPrintf("%salpha=%.0f: tier %.4f / full %.4f = %.2f", i ? "; " : "", s.runs[i].spec.alpha, b, a, ratio);
  }
  return {ok, d + StringPrintf(" (band [1.05, %d])", T)};
}

// ---- 9, 10. deletes --------------------------------------------------------

SuiteRuns DeleteSuite() {
  SuiteRuns s;
  WorkloadSpec w;
  w.inserts = 500000;
  w.delete_fraction = 0.1;
  w.seed = 17;
  ExperimentConfig cfg = MakeConfig(DeskTree(), w);
  cfg.delete_persistence_pct = 33;
  for (const char* p : {"tsa", "tsd", "lo1", "tier"}) {
    s.status = RunPreset(cfg, p, &s);
    if (!s.status.ok()) return s;
  }
  auto ops = WorkloadOpCount(cfg);
  s.extra["d_th"] = std::llround(0.33 * static_cast<double>(*ops));
  return s;
}

Outcome CheckDeleteEfficacy(const SuiteRuns& s) {
  if (!s.status.ok()) return {false, s.status.ToString()};
  const auto t = [&](const char* p) { return s.Get(p).report.tombstones_remaining; };
  const uint64_t age = s.Get("tsa").report.max_tombstone_age_ticks;
  const auto d_th = static_cast<uint64_t>(s.extra.at("d_th"));
  const bool order = t("tsa") <= t("tsd") && t("tsd") <= t("lo1") && t("lo1") <= t("tier");
  return {order && age <= d_th,
          StringPrintf("tombstones tsa=%llu tsd=%llu lo1=%llu tier=%llu (need ascending); tsa oldest %llu <= D_th %llu",
                       static_cast<unsigned long long>(t("tsa")), static_cast<unsigned long long>(t("tsd")),
                       static_cast<unsigned long long>(t("lo1")), static_cast<unsigned long long>(t("tier")),
                       static_cast<unsigned long long>(age), static_cast<unsigned long long>(d_th))};
}

Outcome CheckDeleteCost(const SuiteRuns& s) {
  if (!s.status.ok()) return {false, s.status.ToString()};
  const double tsa = CompactionBytes(s.Get("tsa")), tsd = CompactionBytes(s.Get("tsd")),
               lo1 = CompactionBytes(s.Get("lo1"));
  return {tsa > tsd && tsd > lo1, "compaction bytes tsa=" + Num(tsa) + " tsd=" + Num(tsd) + " lo1=" + Num(lo1) +
                                      " (need tsa > tsd > lo1)"};
}

// ---- 11. update-heavy ------------------------------------------------------

SuiteRuns UpdateSuite() {
  SuiteRuns s;
  for (double ratio : {0.0, 8.0}) {
    WorkloadSpec w;
    w.inserts = 1000000;
    w.update_ratio = ratio;
    w.seed = 19;
    for (const char* p : {"tier", "lo1", "lo2"}) {
      s.status = RunPreset(MakeConfig(DeskTree(), w), p, &s);
      if (!s.status.ok()) return s;
    }
  }
  return s;
}

Outcome CheckUpdates(const SuiteRuns& s) {
  if (!s.status.ok()) return {false, s.status.ToString()};
  auto mean = [](const RunResult& r) {
    const uint64_t jobs = r.report.compaction_count - r.report.pseudo_compaction_count;
    return CompactionBytes(r) / static_cast<double>(std::max<uint64_t>(jobs, 1));
  };
  const double tier0 = mean(s.runs[0]), tier8 = mean(s.runs[3]);
  const double lo1 = CompactionBytes(s.runs[4]), lo2 = CompactionBytes(s.runs[5]);
  const double drop = 1 - tier8 / tier0;
  return {drop >= 0.25 && lo2 < lo1,
          StringPrintf("tier mean bytes/compaction %s -> %s (%+.0f%%, need <= -25%%); ratio 8: lo2 %s vs lo1 %s "
                       "(need lo2 < lo1)",
                       Num(tier0).c_str(), Num(tier8).c_str(), -100 * drop, Num(lo2).c_str(), Num(lo1).c_str())};
}

// ---- driver ----------------------------------------------------------------

struct Suite {
  const char* name;
  std::function<SuiteRuns()> run;
};

struct Criterion {
  int id;
  const char* name;
  const char* suite;
  std::function<Outcome(const SuiteRuns&)> check;
};

int Main(int argc, char** argv) {
  const std::vector<Suite> suites = {
      {"oracle", OracleSuite},   {"levels", LevelSuite},   {"insert_only", InsertOnlySuite},
      {"pseudo", PseudoSuite},   {"bloom", BloomSuite},    {"lookups", LookupSuite},
      {"deletes", DeleteSuite},  {"updates", UpdateSuite},
  };
  const std::vector<Criterion> criteria = {
      {1, "oracle equivalence", "oracle", CheckOracle},
      {2, "level-count formula", "levels", CheckLevels},
      {3, "compaction-count ratio", "insert_only", CheckCompactionCount},
      {4, "data-movement ordering", "insert_only", CheckDataMovement},
      {5, "WA estimate band", "insert_only", CheckWriteAmpBand},
      {6, "pseudo compaction", "pseudo", CheckPseudo},
      {7, "bloom FPR", "bloom", CheckBloom},
      {8, "point-lookup I/O ratio", "lookups", CheckLookupIo},
      {9, "delete efficacy", "deletes", CheckDeleteEfficacy},
      {10, "delete cost trade-off", "deletes", CheckDeleteCost},
      {11, "update-heavy behavior", "updates", CheckUpdates},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  auto want = [&](int id) { return wanted.empty() || wanted.count(id) > 0; };

  std::set<std::string> needed;
  for (const auto& c : criteria) {
    if (want(c.id) || want(12)) needed.insert(c.suite);
  }
  std::map<std::string, SuiteRuns> results;
  std::map<std::string, double> seconds;
  for (const auto& s : suites) {
    if (!needed.count(s.name)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    results[s.name] = s.run();
    seconds[s.name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "suite %-12s %6.1fs\n", s.name, seconds[s.name]);
  }

  int failed = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("%s C%d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  };
  for (const auto& c : criteria) {
    if (want(c.id)) report(c.id, c.name, c.check(results.at(c.suite)));
  }

  if (want(12)) {
    bool same = true;
    std::string d;
    for (const auto& s : suites) {
      if (!results.count(s.name)) continue;
      const SuiteRuns again = s.run();
      const bool eq = again.status.ok() && results[s.name].status.ok() && again.Csv() == results[s.name].Csv() &&
                      again.extra == results[s.name].extra;
      same &= eq;
      d += StringPrintf("%s%s %s (%zu rows)", d.empty() ? "" : ", ", s.name, eq ? "identical" : "DIFFERS",
                        again.runs.size());
    }
    report(12, "determinism", {same, "rerun with same seeds: " + d});
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace lsmclab

int main(int argc, char** argv) { return lsmclab::Main(argc, argv); }
